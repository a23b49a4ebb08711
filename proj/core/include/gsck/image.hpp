// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gsck {

/// Row-major H x W buffer of doubles.
struct ScalarImage {
    int width  = 0;
    int height = 0;
    std::vector<double> values;

    ScalarImage() = default;
    ScalarImage(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t
    pixelCount() const {
        return values.size();
    }
    double &
    at(int x, int y) {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    double
    at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }

    bool operator==(const ScalarImage &) const = default;
};

/// Row-major interleaved RGB buffer of doubles.
struct ColorImage {
    int width  = 0;
    int height = 0;
    std::vector<double> values;

    ColorImage() = default;
    ColorImage(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h * 3) {}

    double &
    at(int x, int y, int c) {
        return values[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double
    at(int x, int y, int c) const {
        return values[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    /// One channel as a scalar image.
    ScalarImage channel(int c) const;
};

/// Binary per-pixel labelling for one view: 1 = tampered, 0 = authentic. Used for
/// both input masks and binarized predictions.
struct TamperMask {
    int width  = 0;
    int height = 0;
    int viewId = 0;
    std::vector<std::uint8_t> labels;

    TamperMask() = default;
    TamperMask(int w, int h, int view = 0, bool tampered = false)
        : width(w), height(h), viewId(view),
          labels(static_cast<std::size_t>(w) * h, tampered ? 1 : 0) {}

    bool
    tampered(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x] != 0;
    }
    std::size_t
    pixelCount() const {
        return labels.size();
    }
    std::size_t tamperedCount() const;

    bool operator==(const TamperMask &) const = default;
};

/// 8-bit grayscale image as read from or written to PNG / PGM.
struct GrayImage {
    int width  = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    bool operator==(const GrayImage &) const = default;
};

GrayImage toGray(const ScalarImage &image);
GrayImage toGray(const TamperMask &mask);

} // namespace gsck

// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/image.hpp>

#include <algorithm>
#include <cmath>

namespace gsck {

ScalarImage
ColorImage::channel(int c) const {
    ScalarImage out(width, height);
    for (std::size_t p = 0; p < out.values.size(); ++p) {
        out.values[p] = values[p * 3 + static_cast<std::size_t>(c)];
    }
    return out;
}

std::size_t
TamperMask::tamperedCount() const {
    return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                                  [](std::uint8_t l) { return l != 0; }));
}

GrayImage
toGray(const ScalarImage &image) {
    GrayImage out{image.width, image.height, {}};
    out.pixels.resize(image.values.size());
    std::transform(image.values.begin(), image.values.end(), out.pixels.begin(), [](double v) {
        return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    });
    return out;
}

GrayImage
toGray(const TamperMask &mask) {
    GrayImage out{mask.width, mask.height, {}};
    out.pixels.resize(mask.labels.size());
    std::transform(mask.labels.begin(), mask.labels.end(), out.pixels.begin(),
                   [](std::uint8_t l) { return static_cast<std::uint8_t>(l != 0 ? 255 : 0); });
    return out;
}

} // namespace gsck

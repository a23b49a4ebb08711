// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/camera.hpp>
#include <gsck/image.hpp>
#include <gsck/render.hpp>
#include <gsck/scene.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gsck {

/// Pixel is tampered iff value >= threshold.
TamperMask binarize(const ScalarImage &image, double threshold, int viewId = 0);

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    bool operator==(const Confusion &) const = default;
};

struct ViewScore {
    int viewId = 0;
    double f1  = 0.0;
    double iou = 0.0;
    Confusion confusion;

    bool operator==(const ViewScore &) const = default;
};

/// F1 = 2TP / (2TP + FP + FN), IoU = TP / (TP + FP + FN); both are 1 when prediction
/// and ground truth are both empty. Throws ShapeError on a size mismatch.
ViewScore score(const TamperMask &pred, const TamperMask &gt);

/// F1 and IoU from raw counts, with the both-empty convention.
ViewScore scoreFromConfusion(const Confusion &c);

struct ScoreReport {
    double threshold = 0.5;
    std::vector<ViewScore> views;
    double meanF1  = 0.0;
    double meanIoU = 0.0;

    bool operator==(const ScoreReport &) const = default;
};

/// Unweighted means over `views`.
ScoreReport summarize(std::vector<ViewScore> views, double threshold);

/// Renders the attribute per view, binarizes at `threshold` and scores against the
/// paired ground truth. Throws ConfigError when cameras and masks are not paired.
ScoreReport evaluateViews(const GaussianScene &scene,
                          std::span<const Camera> cameras,
                          std::span<const TamperMask> gtMasks,
                          double threshold);

ScoreReport evaluateViews(std::span<const BlendWeights> views,
                          std::span<const double> r,
                          std::span<const TamperMask> gtMasks,
                          double threshold);

/// Evaluates every threshold and returns the report with the highest mean F1 (the
/// earliest threshold wins ties).
ScoreReport bestOverThresholds(std::span<const BlendWeights> views,
                               std::span<const double> r,
                               std::span<const TamperMask> gtMasks,
                               std::span<const double> thresholds);

std::string reportToJson(const ScoreReport &report);
/// Aligned-column text table, one row per view plus a mean row.
std::string reportToTable(const ScoreReport &report);
void writeReport(const ScoreReport &report,
                 const std::filesystem::path &jsonPath,
                 const std::filesystem::path &tablePath);

} // namespace gsck

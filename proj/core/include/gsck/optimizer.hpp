// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/camera.hpp>
#include <gsck/contrastive.hpp>
#include <gsck/image.hpp>
#include <gsck/render.hpp>
#include <gsck/scene.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gsck {

struct OptimConfig {
    double lambda1      = 1.0;
    double lambda2      = 10.0;
    double beta         = 1.0;
    double gamma        = 10.0;
    double learningRate = 1.0;
    double adamBeta1    = 0.9;
    double adamBeta2    = 0.999;
    double adamEpsilon  = 1e-8;
    int warmupIters     = 50;
    int totalIters      = 200;
    double tauHigh      = 0.7;
    double tauLow       = 0.05;
    /// Attribute value at or above which a Gaussian is reported as tampered.
    double threshold      = 0.1;
    int viewsPerIteration = 1;
    FeatureOptions features;
    /// Keep the partition from the first joint iteration instead of recomputing it.
    bool freezePartition = false;

    /// Throws ConfigError on out-of-range values. The loss weights may be 0 (ablations);
    /// the learning rate and Adam constants must be positive.
    void validate() const;
};

struct Loss2d {
    double value = 0.0;
    ScalarImage gradImage;
};

/// value = -lambda1 * sum_{tampered p} M(p) + lambda2 * sum_{authentic p} M(p); the
/// gradient image is -lambda1 on tampered pixels and +lambda2 on authentic ones.
/// Throws ShapeError on a size mismatch.
Loss2d loss2d(const ScalarImage &rendered, const TamperMask &mask, double lambda1, double lambda2);

inline double
lossCyclic(double l2d, double l3d, double beta, double gamma) {
    return beta * l2d + gamma * l3d;
}

struct AdamParams {
    double learningRate = 1.0;
    double beta1        = 0.9;
    double beta2        = 0.999;
    double epsilon      = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam step. Returns the raw update for every element and applies
/// it to `r`, clamping the result to [0, 1]. Throws ShapeError on length mismatch.
std::vector<double> adamStep(AdamState &state,
                             std::span<double> r,
                             std::span<const double> grad,
                             const AdamParams &params);

struct TraceRow {
    int iteration = 0;
    int viewId    = 0;
    double l2d    = 0.0;
    double l3d    = 0.0;
    double total  = 0.0;
    double meanR  = 0.0;
    std::size_t high   = 0;
    std::size_t middle = 0;
    std::size_t low    = 0;
    /// Joint-phase iteration whose 3D term was dropped for lack of anchors.
    bool anchorsMissing = false;
};

struct OptimResult {
    GaussianScene scene;
    std::vector<TraceRow> trace;
};

/// Round-robin loop over views: warmup iterations use the 2D loss alone; later ones add
/// gamma times the contrastive loss with the partition and anchors recomputed from the
/// current attribute. Only the attribute changes. Throws ConfigError for zero views or
/// mismatched cameras and masks.
OptimResult runOptimization(const GaussianScene &scene,
                            std::span<const Camera> cameras,
                            std::span<const TamperMask> masks,
                            const OptimConfig &config,
                            const std::function<void(const TraceRow &)> &onIteration = {});

/// Same loop over precomputed per-view blend weights.
OptimResult runOptimization(const GaussianScene &scene,
                            std::span<const BlendWeights> views,
                            std::span<const TamperMask> masks,
                            const OptimConfig &config,
                            const std::function<void(const TraceRow &)> &onIteration = {});

/// CSV with header: iteration,view_id,l2d,l3d,l_total,mean_r,n_high,n_middle,n_low
void writeTraceCsv(std::span<const TraceRow> trace, const std::filesystem::path &path);

/// Number of Gaussians whose attribute is at or above `threshold`.
std::size_t countAtOrAbove(std::span<const float> r, double threshold);

} // namespace gsck

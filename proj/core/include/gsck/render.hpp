// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/camera.hpp>
#include <gsck/image.hpp>
#include <gsck/scene.hpp>

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gsck {

/// Per-Gaussian alpha is clamped to this value.
inline constexpr double kMaxAlpha = 0.99;
/// Contributions with alpha below this are skipped.
inline constexpr double kMinAlpha = 1.0 / 255.0;
/// A pixel stops blending once its transmittance falls below this.
inline constexpr double kMinTransmittance = 1e-4;

/// Screen-space footprint of one Gaussian in one view.
struct ProjectedGaussian {
    double u = 0.0;
    double v = 0.0;
    double z = 0.0;
    /// Sigma' including the low-pass term.
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
    /// Inverse of `cov`, stored as (a, b, c) for [[a, b], [b, c]].
    double conicA  = 1.0;
    double conicB  = 0.0;
    double conicC  = 1.0;
    double opacity = 0.0;
    /// Half-width of the pixel box outside which alpha is provably below kMinAlpha.
    double cutoffRadius = 0.0;
    /// Set when the Gaussian is behind the near plane or its center lies outside the
    /// image expanded by 3 standard deviations.
    bool culled = true;

    /// Alpha at pixel sample (px, py), before the kMinAlpha test.
    double alphaAt(double px, double py) const;
};

ProjectedGaussian projectGaussian(const GaussianScene &scene, const Camera &camera, std::size_t i);

/// Non-culled Gaussian indices in blending order: ascending depth, ties by index.
std::vector<std::uint32_t> depthOrder(std::span<const ProjectedGaussian> projected);

/// Per-pixel front-to-back blend weights w_i = alpha_i * prod_{j<i}(1 - alpha_j) for one
/// view, stored in compressed rows. Depends only on geometry (not on the tampering
/// attribute), so it can be reused across optimizer iterations while positions, scales,
/// rotations and opacities are fixed.
struct BlendWeights {
    int width                 = 0;
    int height                = 0;
    std::size_t gaussianCount = 0;
    /// Entries of pixel p live in [offsets[p], offsets[p+1]), in blending order.
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> indices;
    std::vector<double> weights;
    /// Transmittance left after blending, per pixel.
    std::vector<double> transmittance;

    std::size_t
    pixelCount() const {
        return transmittance.size();
    }
};

/// Rasterizes one view. Pixel (x, y) is sampled at (x + 0.5, y + 0.5). Work is split
/// over 16x16 tiles; the result does not depend on the worker count.
BlendWeights computeBlendWeights(const GaussianScene &scene, const Camera &camera);

/// M^R(p) = sum_i r_i w_i(p). Throws ShapeError if `values` does not match the scene.
ScalarImage renderAttribute(const BlendWeights &weights, std::span<const double> values);
ScalarImage renderAttribute(const GaussianScene &scene, const Camera &camera);

/// Per-pixel sum_i w_i(p): the image rendered with every attribute equal to 1.
ScalarImage renderCoverage(const BlendWeights &weights);

/// dL/dr_i = sum_p dL/dM^R(p) * w_i(p), accumulated in pixel order. Throws ShapeError
/// when the gradient image size does not match.
std::vector<double> backwardAttribute(const BlendWeights &weights, const ScalarImage &gradImage);
std::vector<double> backwardAttribute(const GaussianScene &scene,
                                      const Camera &camera,
                                      const ScalarImage &gradImage);

/// View-dependent RGB of every Gaussian from its SH coefficients (3DGS convention:
/// SH value + 0.5, clamped below at 0).
std::vector<Eigen::Vector3d> gaussianColors(const GaussianScene &scene, const Camera &camera);

ColorImage renderColor(const BlendWeights &weights, std::span<const Eigen::Vector3d> colors);
ColorImage renderColor(const GaussianScene &scene, const Camera &camera);

} // namespace gsck

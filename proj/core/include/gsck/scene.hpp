// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gsck {

inline constexpr int kMaxShDegree = 3;

/// Number of SH basis functions per color channel for a given degree.
constexpr int
shCoeffsPerChannel(int degree) {
    return (degree + 1) * (degree + 1);
}

/// A 3D Gaussian Splatting model plus the per-Gaussian tampering attribute.
///
/// Parameters are stored the way the public 3DGS PLY files store them: scales in log
/// space, opacities as pre-sigmoid logits, quaternions as (w, x, y, z). All storage is
/// float32 so that a PLY round-trip is bit-exact. SH coefficients are laid out per
/// Gaussian as `[coefficient][channel]`, coefficient 0 being the DC term.
struct GaussianScene {
    std::vector<std::array<float, 3>> positions;
    std::vector<std::array<float, 4>> rotations;
    std::vector<std::array<float, 3>> logScales;
    std::vector<float> opacityLogits;
    int shDegree = 0;
    std::vector<float> sh;
    std::vector<float> tamper;

    std::size_t
    size() const {
        return positions.size();
    }

    bool
    empty() const {
        return positions.empty();
    }

    int
    shStride() const {
        return 3 * shCoeffsPerChannel(shDegree);
    }

    /// Appends one Gaussian. `shCoeffs` must hold `shStride()` values.
    void push_back(const std::array<float, 3> &position,
                   const std::array<float, 4> &rotation,
                   const std::array<float, 3> &logScale,
                   float opacityLogit,
                   std::span<const float> shCoeffs,
                   float tamperValue = 0.0f);

    void resize(std::size_t count);

    /// Throws SchemaError when array lengths disagree or the SH degree is unsupported.
    void validate() const;

    Eigen::Vector3d position(std::size_t i) const;
    Eigen::Vector3d scale(std::size_t i) const;
    double opacity(std::size_t i) const;
    /// Unit quaternion (w, x, y, z).
    Eigen::Vector4d rotation(std::size_t i) const;
    std::span<const float> shCoeffs(std::size_t i) const;
    std::span<float> shCoeffs(std::size_t i);

    /// Rescales every quaternion to unit length; quaternions already within 1e-6 of
    /// unit norm are left untouched so that round-trips stay bit-exact.
    void normalizeRotations();

    std::vector<double> tamperAsDouble() const;
    void setTamper(std::span<const double> values);

    bool operator==(const GaussianScene &other) const = default;
};

double sigmoid(double x);
double logit(double p);

/// Symmetric 3x3 covariance stored as its six unique entries.
struct Covariance3 {
    double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;

    Eigen::Matrix3d matrix() const;
    static Covariance3 fromMatrix(const Eigen::Matrix3d &m);
};

/// Rotation matrix of a (w, x, y, z) quaternion; the quaternion is normalized first.
Eigen::Matrix3d rotationMatrix(const Eigen::Vector4d &quatWxyz);

/// Sigma = R diag(s)^2 R^T for activated (positive) scales. Throws NumericError on
/// non-finite input.
Covariance3 covariance(const Eigen::Vector3d &scale, const Eigen::Vector4d &quatWxyz);

/// Covariance of Gaussian `i` of a scene, using activated scales.
Covariance3 covariance(const GaussianScene &scene, std::size_t i);

/// Min-max normalization of the attribute to [0, 1]. A constant attribute maps to
/// all zeros.
void normalizeTamper(std::span<double> values);
GaussianScene normalizeTamper(GaussianScene scene);

} // namespace gsck

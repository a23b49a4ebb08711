// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/scene.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace gsck {

/// Split of Gaussians by attribute value: high (r >= tauHigh), low (r <= tauLow) and
/// the middle band in between. Index lists are ascending.
struct Partition {
    std::vector<std::uint32_t> high;
    std::vector<std::uint32_t> middle;
    std::vector<std::uint32_t> low;
    double tauHigh = 0.7;
    double tauLow  = 0.05;

    bool operator==(const Partition &) const = default;
};

/// Throws ConfigError unless 0 <= tauLow < tauHigh <= 1.
Partition partition(std::span<const double> r, double tauHigh, double tauLow);
Partition partition(const GaussianScene &scene, double tauHigh, double tauLow);

enum class ShFeature { Dc, Full };

struct FeatureOptions {
    ShFeature sh     = ShFeature::Dc;
    bool standardize = true;
};

/// Per-Gaussian attribute vector: position (3), activated opacity (1), activated
/// scale (3), unit quaternion wxyz (4), then SH: the DC color (3) or every coefficient.
/// Rows are Gaussians.
Eigen::MatrixXd rawFeatures(const GaussianScene &scene, ShFeature sh = ShFeature::Dc);

struct FeatureStats {
    Eigen::VectorXd mean;
    /// Population standard deviation; 0 for constant dimensions.
    Eigen::VectorXd stddev;
};

FeatureStats featureStats(const Eigen::MatrixXd &raw);

/// Standardizes each column to zero mean and unit variance using `stats`; columns with
/// zero deviation become 0.
Eigen::MatrixXd standardize(const Eigen::MatrixXd &raw, const FeatureStats &stats);

/// Feature matrix for the contrastive step, standardized over the whole scene unless
/// `options.standardize` is off.
Eigen::MatrixXd featureVectors(const GaussianScene &scene, const FeatureOptions &options = {});

/// Mean feature row over `members`. Throws AnchorError when `members` is empty.
Eigen::VectorXd anchorMean(const Eigen::MatrixXd &features, std::span<const std::uint32_t> members);

struct Similarities {
    double high = 0.0;
    double low  = 0.0;
};

/// Squared Euclidean distances from `f` to the high and low anchors (smaller means
/// more similar).
Similarities similarities(const Eigen::Ref<const Eigen::VectorXd> &f,
                          const Eigen::Ref<const Eigen::VectorXd> &highAnchor,
                          const Eigen::Ref<const Eigen::VectorXd> &lowAnchor);

/// sign(simLow - simHigh): +1 when closer to the high anchor, -1 when closer to the
/// low anchor, 0 on a tie.
int updateDirection(double simHigh, double simLow);

/// Directions for every member of `part.middle`, in that order. Throws AnchorError if
/// the high or low set is empty.
std::vector<int> updateDirections(const Eigen::MatrixXd &features, const Partition &part);

struct Loss3d {
    double value = 0.0;
    std::vector<double> grad;
};

/// value = -(1/K) sum_{k} u_k r_{middle[k]}, K = |middle|; grad is dense over the
/// scene and zero outside the middle set. K = 0 gives zero loss and zero gradient.
Loss3d loss3d(std::span<const int> directions,
              std::span<const double> r,
              std::span<const std::uint32_t> middle);

} // namespace gsck

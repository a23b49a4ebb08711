// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/contrastive.hpp>
#include <gsck/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace gsck {

Partition
partition(std::span<const double> r, double tauHigh, double tauLow) {
    if (!(tauLow >= 0.0 && tauLow < tauHigh && tauHigh <= 1.0)) {
        throw ConfigError("partition: need 0 <= tau_low < tau_high <= 1, got tau_low=" +
                          std::to_string(tauLow) + " tau_high=" + std::to_string(tauHigh));
    }
    Partition part;
    part.tauHigh = tauHigh;
    part.tauLow  = tauLow;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto idx = static_cast<std::uint32_t>(i);
        if (r[i] >= tauHigh) {
            part.high.push_back(idx);
        } else if (r[i] <= tauLow) {
            part.low.push_back(idx);
        } else {
            part.middle.push_back(idx);
        }
    }
    return part;
}

Partition
partition(const GaussianScene &scene, double tauHigh, double tauLow) {
    const auto r = scene.tamperAsDouble();
    return partition(r, tauHigh, tauLow);
}

Eigen::MatrixXd
rawFeatures(const GaussianScene &scene, ShFeature sh) {
    const int shCols = sh == ShFeature::Dc ? 3 : scene.shStride();
    const auto n     = static_cast<Eigen::Index>(scene.size());
    Eigen::MatrixXd f(n, 11 + shCols);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        f.block<1, 3>(i, 0) = scene.position(k).transpose();
        f(i, 3)             = scene.opacity(k);
        f.block<1, 3>(i, 4) = scene.scale(k).transpose();
        f.block<1, 4>(i, 7) = scene.rotation(k).transpose();
        const auto coeffs   = scene.shCoeffs(k);
        for (int c = 0; c < shCols; ++c) {
            f(i, 11 + c) = coeffs[static_cast<std::size_t>(c)];
        }
    }
    return f;
}

FeatureStats
featureStats(const Eigen::MatrixXd &raw) {
    FeatureStats stats;
    const auto cols = raw.cols();
    stats.mean      = Eigen::VectorXd::Zero(cols);
    stats.stddev    = Eigen::VectorXd::Zero(cols);
    if (raw.rows() == 0) {
        return stats;
    }
    stats.mean = raw.colwise().mean().transpose();
    for (Eigen::Index c = 0; c < cols; ++c) {
        const double var = (raw.col(c).array() - stats.mean[c]).square().mean();
        stats.stddev[c]  = std::sqrt(var);
    }
    return stats;
}

Eigen::MatrixXd
standardize(const Eigen::MatrixXd &raw, const FeatureStats &stats) {
    Eigen::MatrixXd out(raw.rows(), raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        // Tiny deviations relative to the mean are round-off on a constant column.
        const double scale = std::max(1.0, std::abs(stats.mean[c]));
        if (stats.stddev[c] > 1e-12 * scale) {
            out.col(c) = (raw.col(c).array() - stats.mean[c]) / stats.stddev[c];
        } else {
            out.col(c).setZero();
        }
    }
    return out;
}

Eigen::MatrixXd
featureVectors(const GaussianScene &scene, const FeatureOptions &options) {
    Eigen::MatrixXd raw = rawFeatures(scene, options.sh);
    if (!options.standardize) {
        return raw;
    }
    return standardize(raw, featureStats(raw));
}

Eigen::VectorXd
anchorMean(const Eigen::MatrixXd &features, std::span<const std::uint32_t> members) {
    if (members.empty()) {
        throw AnchorError("anchor set is empty");
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(features.cols());
    for (std::uint32_t idx : members) {
        sum += features.row(idx).transpose();
    }
    return sum / static_cast<double>(members.size());
}

Similarities
similarities(const Eigen::Ref<const Eigen::VectorXd> &f,
             const Eigen::Ref<const Eigen::VectorXd> &highAnchor,
             const Eigen::Ref<const Eigen::VectorXd> &lowAnchor) {
    return {(f - highAnchor).squaredNorm(), (f - lowAnchor).squaredNorm()};
}

int
updateDirection(double simHigh, double simLow) {
    const double delta = simLow - simHigh;
    return (delta > 0.0) - (delta < 0.0);
}

std::vector<int>
updateDirections(const Eigen::MatrixXd &features, const Partition &part) {
    const Eigen::VectorXd highAnchor = anchorMean(features, part.high);
    const Eigen::VectorXd lowAnchor  = anchorMean(features, part.low);
    std::vector<int> dirs;
    dirs.reserve(part.middle.size());
    for (std::uint32_t idx : part.middle) {
        const auto sim = similarities(features.row(idx).transpose(), highAnchor, lowAnchor);
        dirs.push_back(updateDirection(sim.high, sim.low));
    }
    return dirs;
}

Loss3d
loss3d(std::span<const int> directions, std::span<const double> r, std::span<const std::uint32_t> middle) {
    if (directions.size() != middle.size()) {
        throw ShapeError("loss3d: " + std::to_string(directions.size()) + " directions for " +
                         std::to_string(middle.size()) + " middle Gaussians");
    }
    Loss3d out;
    out.grad.assign(r.size(), 0.0);
    if (middle.empty()) {
        return out;
    }
    const double invK = 1.0 / static_cast<double>(middle.size());
    double sum        = 0.0;
    for (std::size_t k = 0; k < middle.size(); ++k) {
        const auto i = middle[k];
        sum += directions[k] * r[i];
        out.grad[i] = -directions[k] * invK;
    }
    out.value = -sum * invK;
    return out;
}

} // namespace gsck

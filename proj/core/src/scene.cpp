// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/errors.hpp>
#include <gsck/scene.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <string>

namespace gsck {

void
GaussianScene::push_back(const std::array<float, 3> &position,
                         const std::array<float, 4> &rotation,
                         const std::array<float, 3> &logScale,
                         float opacityLogit,
                         std::span<const float> shCoeffs,
                         float tamperValue) {
    if (static_cast<int>(shCoeffs.size()) != shStride()) {
        throw SchemaError("push_back: expected " + std::to_string(shStride()) +
                          " SH values, got " + std::to_string(shCoeffs.size()));
    }
    positions.push_back(position);
    rotations.push_back(rotation);
    logScales.push_back(logScale);
    opacityLogits.push_back(opacityLogit);
    sh.insert(sh.end(), shCoeffs.begin(), shCoeffs.end());
    tamper.push_back(tamperValue);
}

void
GaussianScene::resize(std::size_t count) {
    positions.resize(count);
    rotations.resize(count, {1.0f, 0.0f, 0.0f, 0.0f});
    logScales.resize(count);
    opacityLogits.resize(count);
    sh.resize(count * static_cast<std::size_t>(shStride()));
    tamper.resize(count);
}

void
GaussianScene::validate() const {
    if (shDegree < 0 || shDegree > kMaxShDegree) {
        throw SchemaError("unsupported SH degree " + std::to_string(shDegree));
    }
    const std::size_t n = positions.size();
    auto check          = [n](std::size_t got, std::size_t want, const char *name) {
        if (got != want) {
            throw SchemaError(std::string("scene array '") + name + "' has length " +
                              std::to_string(got) + ", expected " + std::to_string(want));
        }
    };
    check(rotations.size(), n, "rotations");
    check(logScales.size(), n, "logScales");
    check(opacityLogits.size(), n, "opacityLogits");
    check(tamper.size(), n, "tamper");
    check(sh.size(), n * static_cast<std::size_t>(shStride()), "sh");
}

Eigen::Vector3d
GaussianScene::position(std::size_t i) const {
    const auto &p = positions[i];
    return {p[0], p[1], p[2]};
}

Eigen::Vector3d
GaussianScene::scale(std::size_t i) const {
    const auto &s = logScales[i];
    return {std::exp(double(s[0])), std::exp(double(s[1])), std::exp(double(s[2]))};
}

double
GaussianScene::opacity(std::size_t i) const {
    return sigmoid(opacityLogits[i]);
}

Eigen::Vector4d
GaussianScene::rotation(std::size_t i) const {
    const auto &q = rotations[i];
    Eigen::Vector4d v(q[0], q[1], q[2], q[3]);
    const double n = v.norm();
    return n > 0.0 ? Eigen::Vector4d(v / n) : Eigen::Vector4d(1, 0, 0, 0);
}

std::span<const float>
GaussianScene::shCoeffs(std::size_t i) const {
    const auto stride = static_cast<std::size_t>(shStride());
    return std::span<const float>(sh).subspan(i * stride, stride);
}

std::span<float>
GaussianScene::shCoeffs(std::size_t i) {
    const auto stride = static_cast<std::size_t>(shStride());
    return std::span<float>(sh).subspan(i * stride, stride);
}

void
GaussianScene::normalizeRotations() {
    for (auto &q : rotations) {
        const double n = std::sqrt(double(q[0]) * q[0] + double(q[1]) * q[1] +
                                   double(q[2]) * q[2] + double(q[3]) * q[3]);
        if (n == 0.0) {
            q = {1.0f, 0.0f, 0.0f, 0.0f};
        } else if (std::abs(n - 1.0) > 1e-6) {
            for (auto &c : q) {
                c = static_cast<float>(c / n);
            }
        }
    }
}

std::vector<double>
GaussianScene::tamperAsDouble() const {
    return {tamper.begin(), tamper.end()};
}

void
GaussianScene::setTamper(std::span<const double> values) {
    if (values.size() != size()) {
        throw ShapeError("setTamper: length " + std::to_string(values.size()) +
                         " does not match scene size " + std::to_string(size()));
    }
    std::transform(values.begin(), values.end(), tamper.begin(),
                   [](double v) { return static_cast<float>(v); });
}

double
sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

double
logit(double p) {
    return std::log(p / (1.0 - p));
}

Eigen::Matrix3d
Covariance3::matrix() const {
    Eigen::Matrix3d m;
    m << xx, xy, xz, xy, yy, yz, xz, yz, zz;
    return m;
}

Covariance3
Covariance3::fromMatrix(const Eigen::Matrix3d &m) {
    // Average the off-diagonal pairs so round-off asymmetry does not leak through.
    return {m(0, 0),
            0.5 * (m(0, 1) + m(1, 0)),
            0.5 * (m(0, 2) + m(2, 0)),
            m(1, 1),
            0.5 * (m(1, 2) + m(2, 1)),
            m(2, 2)};
}

Eigen::Matrix3d
rotationMatrix(const Eigen::Vector4d &quatWxyz) {
    Eigen::Quaterniond q(quatWxyz[0], quatWxyz[1], quatWxyz[2], quatWxyz[3]);
    q.normalize();
    return q.toRotationMatrix();
}

Covariance3
covariance(const Eigen::Vector3d &scale, const Eigen::Vector4d &quatWxyz) {
    if (!scale.allFinite() || !quatWxyz.allFinite()) {
        throw NumericError("covariance: non-finite scale or rotation");
    }
    if (quatWxyz.squaredNorm() == 0.0) {
        throw NumericError("covariance: zero quaternion");
    }
    const Eigen::Matrix3d R = rotationMatrix(quatWxyz);
    const Eigen::Matrix3d M = R * scale.asDiagonal();
    return Covariance3::fromMatrix(M * M.transpose());
}

Covariance3
covariance(const GaussianScene &scene, std::size_t i) {
    return covariance(scene.scale(i), scene.rotation(i));
}

void
normalizeTamper(std::span<double> values) {
    if (values.empty()) {
        return;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double minV   = *lo;
    const double maxV   = *hi;
    if (!(maxV > minV)) {
        std::fill(values.begin(), values.end(), 0.0);
        return;
    }
    const double range = maxV - minV;
    for (auto &v : values) {
        v = (v - minV) / range;
    }
}

GaussianScene
normalizeTamper(GaussianScene scene) {
    auto r = scene.tamperAsDouble();
    normalizeTamper(r);
    scene.setTamper(r);
    return scene;
}

} // namespace gsck

// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/errors.hpp>
#include <gsck/parallel.hpp>
#include <gsck/render.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gsck {

namespace {

constexpr int kTileSize = 16;

struct Entry {
    std::uint32_t index;
    double weight;
};

double
largestEigenvalue(const Eigen::Matrix2d &m) {
    const double mid  = 0.5 * (m(0, 0) + m(1, 1));
    const double det  = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::sqrt(std::max(0.0, mid * mid - det));
    return mid + disc;
}

void
checkValues(const BlendWeights &weights, std::span<const double> values) {
    if (values.size() != weights.gaussianCount) {
        throw ShapeError("attribute array has " + std::to_string(values.size()) +
                         " entries, scene has " + std::to_string(weights.gaussianCount));
    }
}

} // namespace

double
ProjectedGaussian::alphaAt(double px, double py) const {
    const double dx    = px - u;
    const double dy    = py - v;
    const double power = -0.5 * (conicA * dx * dx + 2.0 * conicB * dx * dy + conicC * dy * dy);
    return std::min(kMaxAlpha, opacity * std::exp(power));
}

ProjectedGaussian
projectGaussian(const GaussianScene &scene, const Camera &camera, std::size_t i) {
    ProjectedGaussian pg;
    const Eigen::Vector3d mu = scene.position(i);
    const Eigen::Vector3d p  = camera.toCamera(mu);
    pg.z                     = p.z();
    if (!(p.z() > kZNear)) {
        return pg;
    }
    pg.u       = camera.fx * p.x() / p.z() + camera.cx;
    pg.v       = camera.fy * p.y() / p.z() + camera.cy;
    pg.cov     = projectCovariance(camera, mu, covariance(scene, i));
    pg.opacity = scene.opacity(i);

    const double det = pg.cov.determinant();
    if (!(det > 0.0)) {
        return pg;
    }
    pg.conicA = pg.cov(1, 1) / det;
    pg.conicB = -pg.cov(0, 1) / det;
    pg.conicC = pg.cov(0, 0) / det;

    const double lambdaMax = largestEigenvalue(pg.cov);
    const double extent    = 3.0 * std::sqrt(lambdaMax);
    pg.culled = pg.u < -extent || pg.u > camera.width + extent || pg.v < -extent ||
                pg.v > camera.height + extent;

    // alpha >= kMinAlpha requires d^T conic d <= 2 ln(opacity / kMinAlpha), and
    // d^T conic d >= |d|^2 / lambdaMax.
    const double budget = 2.0 * std::log(pg.opacity / kMinAlpha);
    pg.cutoffRadius     = budget > 0.0 ? std::sqrt(budget * lambdaMax) * (1.0 + 1e-9) + 1e-9 : 0.0;
    return pg;
}

std::vector<std::uint32_t>
depthOrder(std::span<const ProjectedGaussian> projected) {
    std::vector<std::uint32_t> order;
    order.reserve(projected.size());
    for (std::size_t i = 0; i < projected.size(); ++i) {
        if (!projected[i].culled) {
            order.push_back(static_cast<std::uint32_t>(i));
        }
    }
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (projected[a].z != projected[b].z) {
            return projected[a].z < projected[b].z;
        }
        return a < b;
    });
    return order;
}

BlendWeights
computeBlendWeights(const GaussianScene &scene, const Camera &camera) {
    scene.validate();
    camera.validate();
    const std::size_t n = scene.size();

    std::vector<ProjectedGaussian> projected(n);
    parallelFor(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            projected[i] = projectGaussian(scene, camera, i);
        }
    });
    const auto order = depthOrder(projected);

    const int tilesX = (camera.width + kTileSize - 1) / kTileSize;
    const int tilesY = (camera.height + kTileSize - 1) / kTileSize;
    std::vector<std::vector<std::uint32_t>> tileLists(static_cast<std::size_t>(tilesX) * tilesY);
    for (std::uint32_t idx : order) {
        const auto &pg = projected[idx];
        if (pg.cutoffRadius <= 0.0) {
            continue;
        }
        // Pixel x is covered when |x + 0.5 - u| <= radius.
        const int x0 = std::max(0, static_cast<int>(std::ceil(pg.u - pg.cutoffRadius - 0.5)));
        const int x1 = std::min(camera.width - 1, static_cast<int>(std::floor(pg.u + pg.cutoffRadius - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(pg.v - pg.cutoffRadius - 0.5)));
        const int y1 = std::min(camera.height - 1, static_cast<int>(std::floor(pg.v + pg.cutoffRadius - 0.5)));
        if (x0 > x1 || y0 > y1) {
            continue;
        }
        for (int ty = y0 / kTileSize; ty <= y1 / kTileSize; ++ty) {
            for (int tx = x0 / kTileSize; tx <= x1 / kTileSize; ++tx) {
                tileLists[static_cast<std::size_t>(ty) * tilesX + tx].push_back(idx);
            }
        }
    }

    const std::size_t pixels = static_cast<std::size_t>(camera.width) * camera.height;
    std::vector<std::vector<Entry>> perPixel(pixels);
    BlendWeights out;
    out.width         = camera.width;
    out.height        = camera.height;
    out.gaussianCount = n;
    out.transmittance.assign(pixels, 1.0);

    parallelFor(tileLists.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const int tx   = static_cast<int>(t % tilesX);
            const int ty   = static_cast<int>(t / tilesX);
            const auto &tl = tileLists[t];
            for (int y = ty * kTileSize; y < std::min(camera.height, (ty + 1) * kTileSize); ++y) {
                for (int x = tx * kTileSize; x < std::min(camera.width, (tx + 1) * kTileSize); ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * camera.width + x;
                    const double px     = x + 0.5;
                    const double py     = y + 0.5;
                    double T            = 1.0;
                    auto &list          = perPixel[p];
                    for (std::uint32_t idx : tl) {
                        const double alpha = projected[idx].alphaAt(px, py);
                        if (alpha < kMinAlpha) {
                            continue;
                        }
                        list.push_back({idx, alpha * T});
                        T *= 1.0 - alpha;
                        if (T < kMinTransmittance) {
                            break;
                        }
                    }
                    out.transmittance[p] = T;
                }
            }
        }
    });

    out.offsets.resize(pixels + 1, 0);
    for (std::size_t p = 0; p < pixels; ++p) {
        out.offsets[p + 1] = out.offsets[p] + perPixel[p].size();
    }
    out.indices.resize(out.offsets.back());
    out.weights.resize(out.offsets.back());
    for (std::size_t p = 0; p < pixels; ++p) {
        std::size_t k = out.offsets[p];
        for (const auto &e : perPixel[p]) {
            out.indices[k] = e.index;
            out.weights[k] = e.weight;
            ++k;
        }
    }
    return out;
}

ScalarImage
renderAttribute(const BlendWeights &weights, std::span<const double> values) {
    checkValues(weights, values);
    ScalarImage img(weights.width, weights.height);
    for (std::size_t p = 0; p < weights.pixelCount(); ++p) {
        double acc = 0.0;
        for (std::size_t k = weights.offsets[p]; k < weights.offsets[p + 1]; ++k) {
            acc += values[weights.indices[k]] * weights.weights[k];
        }
        img.values[p] = acc;
    }
    return img;
}

ScalarImage
renderAttribute(const GaussianScene &scene, const Camera &camera) {
    const auto r = scene.tamperAsDouble();
    return renderAttribute(computeBlendWeights(scene, camera), r);
}

ScalarImage
renderCoverage(const BlendWeights &weights) {
    ScalarImage img(weights.width, weights.height);
    for (std::size_t p = 0; p < weights.pixelCount(); ++p) {
        img.values[p] = std::accumulate(weights.weights.begin() + static_cast<std::ptrdiff_t>(weights.offsets[p]),
                                        weights.weights.begin() + static_cast<std::ptrdiff_t>(weights.offsets[p + 1]),
                                        0.0);
    }
    return img;
}

std::vector<double>
backwardAttribute(const BlendWeights &weights, const ScalarImage &gradImage) {
    if (gradImage.width != weights.width || gradImage.height != weights.height ||
        gradImage.values.size() != weights.pixelCount()) {
        throw ShapeError("gradient image is " + std::to_string(gradImage.width) + "x" +
                         std::to_string(gradImage.height) + ", view is " +
                         std::to_string(weights.width) + "x" + std::to_string(weights.height));
    }
    std::vector<double> grad(weights.gaussianCount, 0.0);
    for (std::size_t p = 0; p < weights.pixelCount(); ++p) {
        const double g = gradImage.values[p];
        if (g == 0.0) {
            continue;
        }
        for (std::size_t k = weights.offsets[p]; k < weights.offsets[p + 1]; ++k) {
            grad[weights.indices[k]] += g * weights.weights[k];
        }
    }
    return grad;
}

std::vector<double>
backwardAttribute(const GaussianScene &scene, const Camera &camera, const ScalarImage &gradImage) {
    if (gradImage.width != camera.width || gradImage.height != camera.height) {
        throw ShapeError("gradient image does not match camera dimensions");
    }
    return backwardAttribute(computeBlendWeights(scene, camera), gradImage);
}

namespace {

constexpr double kShC0    = 0.28209479177387814;
constexpr double kShC1    = 0.4886025119029199;
constexpr double kShC2[]  = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                             -1.0925484305920792, 0.5462742152960396};
constexpr double kShC3[]  = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                             0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                             -0.5900435899266435};

} // namespace

std::vector<Eigen::Vector3d>
gaussianColors(const GaussianScene &scene, const Camera &camera) {
    const Eigen::Vector3d eye = camera.center();
    std::vector<Eigen::Vector3d> colors(scene.size());
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const auto sh = scene.shCoeffs(i);
        auto coef     = [&](int k) {
            return Eigen::Vector3d(sh[3 * k], sh[3 * k + 1], sh[3 * k + 2]);
        };
        Eigen::Vector3d c = kShC0 * coef(0);
        if (scene.shDegree > 0) {
            Eigen::Vector3d dir = scene.position(i) - eye;
            const double len    = dir.norm();
            dir                 = len > 0.0 ? Eigen::Vector3d(dir / len) : Eigen::Vector3d(0, 0, 1);
            const double x = dir.x(), y = dir.y(), z = dir.z();
            c += -kShC1 * y * coef(1) + kShC1 * z * coef(2) - kShC1 * x * coef(3);
            if (scene.shDegree > 1) {
                const double xx = x * x, yy = y * y, zz = z * z;
                const double xy = x * y, yz = y * z, xz = x * z;
                c += kShC2[0] * xy * coef(4) + kShC2[1] * yz * coef(5) +
                     kShC2[2] * (2.0 * zz - xx - yy) * coef(6) + kShC2[3] * xz * coef(7) +
                     kShC2[4] * (xx - yy) * coef(8);
                if (scene.shDegree > 2) {
                    c += kShC3[0] * y * (3.0 * xx - yy) * coef(9) + kShC3[1] * xy * z * coef(10) +
                         kShC3[2] * y * (4.0 * zz - xx - yy) * coef(11) +
                         kShC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * coef(12) +
                         kShC3[4] * x * (4.0 * zz - xx - yy) * coef(13) +
                         kShC3[5] * z * (xx - yy) * coef(14) +
                         kShC3[6] * x * (xx - 3.0 * yy) * coef(15);
                }
            }
        }
        colors[i] = (c.array() + 0.5).max(0.0).matrix();
    }
    return colors;
}

ColorImage
renderColor(const BlendWeights &weights, std::span<const Eigen::Vector3d> colors) {
    if (colors.size() != weights.gaussianCount) {
        throw ShapeError("color array does not match scene size");
    }
    ColorImage img(weights.width, weights.height);
    for (std::size_t p = 0; p < weights.pixelCount(); ++p) {
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        for (std::size_t k = weights.offsets[p]; k < weights.offsets[p + 1]; ++k) {
            acc += weights.weights[k] * colors[weights.indices[k]];
        }
        for (int c = 0; c < 3; ++c) {
            img.values[p * 3 + static_cast<std::size_t>(c)] = acc[c];
        }
    }
    return img;
}

ColorImage
renderColor(const GaussianScene &scene, const Camera &camera) {
    const auto colors = gaussianColors(scene, camera);
    return renderColor(computeBlendWeights(scene, camera), colors);
}

} // namespace gsck

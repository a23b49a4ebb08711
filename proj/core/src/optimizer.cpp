// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/errors.hpp>
#include <gsck/optimizer.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>

namespace gsck {

void
OptimConfig::validate() const {
    auto nonNegative = [](double v, const char *name) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be a finite value >= 0");
        }
    };
    nonNegative(lambda1, "lambda1");
    nonNegative(lambda2, "lambda2");
    nonNegative(beta, "beta");
    nonNegative(gamma, "gamma");
    if (!(learningRate > 0.0) || !std::isfinite(learningRate)) {
        throw ConfigError("learning rate must be positive");
    }
    if (!(adamBeta1 >= 0.0 && adamBeta1 < 1.0) || !(adamBeta2 >= 0.0 && adamBeta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(adamEpsilon > 0.0)) {
        throw ConfigError("Adam epsilon must be positive");
    }
    if (totalIters < 0 || warmupIters < 0 || warmupIters > totalIters) {
        throw ConfigError("need 0 <= warmup <= iters, got warmup=" + std::to_string(warmupIters) +
                          " iters=" + std::to_string(totalIters));
    }
    if (!(tauLow >= 0.0 && tauLow < tauHigh && tauHigh <= 1.0)) {
        throw ConfigError("need 0 <= tau_low < tau_high <= 1");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ConfigError("threshold must lie in [0, 1]");
    }
    if (viewsPerIteration < 1) {
        throw ConfigError("views per iteration must be at least 1");
    }
}

Loss2d
loss2d(const ScalarImage &rendered, const TamperMask &mask, double lambda1, double lambda2) {
    if (rendered.width != mask.width || rendered.height != mask.height ||
        rendered.values.size() != mask.labels.size()) {
        throw ShapeError("loss2d: rendered image is " + std::to_string(rendered.width) + "x" +
                         std::to_string(rendered.height) + ", mask is " +
                         std::to_string(mask.width) + "x" + std::to_string(mask.height));
    }
    Loss2d out;
    out.gradImage = ScalarImage(rendered.width, rendered.height);
    double tamperedSum  = 0.0;
    double authenticSum = 0.0;
    for (std::size_t p = 0; p < rendered.values.size(); ++p) {
        if (mask.labels[p] != 0) {
            tamperedSum += rendered.values[p];
            out.gradImage.values[p] = -lambda1;
        } else {
            authenticSum += rendered.values[p];
            out.gradImage.values[p] = lambda2;
        }
    }
    out.value = -lambda1 * tamperedSum + lambda2 * authenticSum;
    return out;
}

std::vector<double>
adamStep(AdamState &state, std::span<double> r, std::span<const double> grad, const AdamParams &params) {
    if (grad.size() != r.size() || state.m.size() != r.size() || state.v.size() != r.size()) {
        throw ShapeError("adamStep: gradient, attribute and state lengths differ");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(state.step));
    std::vector<double> delta(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double g = grad[i];
        state.m[i]     = params.beta1 * state.m[i] + (1.0 - params.beta1) * g;
        state.v[i]     = params.beta2 * state.v[i] + (1.0 - params.beta2) * g * g;
        const double mHat = state.m[i] / bc1;
        const double vHat = state.v[i] / bc2;
        delta[i]          = -params.learningRate * mHat / (std::sqrt(vHat) + params.epsilon);
        r[i]              = std::clamp(r[i] + delta[i], 0.0, 1.0);
    }
    return delta;
}

OptimResult
runOptimization(const GaussianScene &scene,
                std::span<const Camera> cameras,
                std::span<const TamperMask> masks,
                const OptimConfig &config,
                const std::function<void(const TraceRow &)> &onIteration) {
    if (cameras.empty()) {
        throw ConfigError("runOptimization: no views");
    }
    if (cameras.size() != masks.size()) {
        throw ConfigError("runOptimization: " + std::to_string(cameras.size()) + " cameras but " +
                          std::to_string(masks.size()) + " masks");
    }
    for (std::size_t j = 0; j < cameras.size(); ++j) {
        if (cameras[j].id != masks[j].viewId) {
            throw ConfigError("runOptimization: camera/mask view ids are not paired");
        }
    }
    config.validate();
    std::vector<BlendWeights> views;
    views.reserve(cameras.size());
    for (const auto &cam : cameras) {
        views.push_back(computeBlendWeights(scene, cam));
    }
    return runOptimization(scene, views, masks, config, onIteration);
}

OptimResult
runOptimization(const GaussianScene &scene,
                std::span<const BlendWeights> views,
                std::span<const TamperMask> masks,
                const OptimConfig &config,
                const std::function<void(const TraceRow &)> &onIteration) {
    if (views.empty()) {
        throw ConfigError("runOptimization: no views");
    }
    if (views.size() != masks.size()) {
        throw ConfigError("runOptimization: view and mask counts differ");
    }
    config.validate();
    scene.validate();

    OptimResult result;
    result.scene = scene;
    std::vector<double> r = scene.tamperAsDouble();
    if (config.totalIters == 0) {
        return result;
    }

    const Eigen::MatrixXd features = featureVectors(scene, config.features);
    const AdamParams adam{config.learningRate, config.adamBeta1, config.adamBeta2, config.adamEpsilon};
    AdamState state(r.size());
    std::optional<Partition> frozen;
    const std::size_t viewCount = views.size();

    for (int t = 1; t <= config.totalIters; ++t) {
        TraceRow row;
        row.iteration = t;

        std::vector<double> grad(r.size(), 0.0);
        double l2d = 0.0;
        for (int s = 0; s < config.viewsPerIteration; ++s) {
            const std::size_t j =
                (static_cast<std::size_t>(t - 1) * config.viewsPerIteration + s) % viewCount;
            if (s == 0) {
                row.viewId = masks[j].viewId;
            }
            const ScalarImage rendered = renderAttribute(views[j], r);
            const Loss2d loss          = loss2d(rendered, masks[j], config.lambda1, config.lambda2);
            const auto g               = backwardAttribute(views[j], loss.gradImage);
            l2d += loss.value;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                grad[i] += config.beta * g[i];
            }
        }

        const bool joint = t > config.warmupIters;
        Partition part;
        if (joint && config.freezePartition) {
            if (!frozen) {
                frozen = partition(r, config.tauHigh, config.tauLow);
            }
            part = *frozen;
        } else {
            part = partition(r, config.tauHigh, config.tauLow);
        }

        double l3d = 0.0;
        if (joint) {
            try {
                const auto dirs = updateDirections(features, part);
                const Loss3d l  = loss3d(dirs, r, part.middle);
                l3d             = l.value;
                for (std::size_t i = 0; i < grad.size(); ++i) {
                    grad[i] += config.gamma * l.grad[i];
                }
            } catch (const AnchorError &) {
                row.anchorsMissing = true;
            }
        }

        adamStep(state, r, grad, adam);

        row.l2d    = l2d;
        row.l3d    = l3d;
        row.total  = lossCyclic(l2d, l3d, config.beta, joint ? config.gamma : 0.0);
        row.meanR  = r.empty() ? 0.0 : std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
        row.high   = part.high.size();
        row.middle = part.middle.size();
        row.low    = part.low.size();
        result.trace.push_back(row);
        if (onIteration) {
            onIteration(row);
        }
    }
    result.scene.setTamper(r);
    return result;
}

void
writeTraceCsv(std::span<const TraceRow> trace, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw WriteError(path.string() + ": cannot open for writing");
    }
    out.precision(17);
    out << "iteration,view_id,l2d,l3d,l_total,mean_r,n_high,n_middle,n_low\n";
    for (const auto &row : trace) {
        out << row.iteration << ',' << row.viewId << ',' << row.l2d << ',' << row.l3d << ','
            << row.total << ',' << row.meanR << ',' << row.high << ',' << row.middle << ','
            << row.low << '\n';
    }
    if (!out) {
        throw WriteError(path.string() + ": write failed");
    }
}

std::size_t
countAtOrAbove(std::span<const float> r, double threshold) {
    return static_cast<std::size_t>(
        std::count_if(r.begin(), r.end(), [threshold](float v) { return v >= threshold; }));
}

} // namespace gsck

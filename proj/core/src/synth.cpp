// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/errors.hpp>
#include <gsck/evaluation.hpp>
#include <gsck/ply.hpp>
#include <gsck/render.hpp>
#include <gsck/synth.hpp>
#include <gsck/voting.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

namespace gsck {

namespace {

constexpr double kShC0 = 0.28209479177387814;

struct ObjectStyle {
    Eigen::Vector3d center;
    Eigen::Vector3d color;
    double logScale      = 0.0;
    double opacityLogit  = 0.0;
    double spread        = 0.0;
};

class Generator {
  public:
    explicit Generator(std::uint64_t seed) : mRng(seed) {}

    double
    uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(mRng);
    }
    double
    normal(double mean, double sd) {
        return std::normal_distribution<double>(mean, sd)(mRng);
    }
    std::size_t
    index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(mRng);
    }
    std::mt19937_64 &
    engine() {
        return mRng;
    }

    std::array<float, 4>
    randomQuaternion() {
        Eigen::Vector4d q(normal(0, 1), normal(0, 1), normal(0, 1), normal(0, 1));
        q.normalize();
        if (q[0] < 0) {
            q = -q;
        }
        return {float(q[0]), float(q[1]), float(q[2]), float(q[3])};
    }

  private:
    std::mt19937_64 mRng;
};

ObjectStyle
randomStyle(Generator &gen, const Eigen::Vector3d &center, const SynthSpec &spec) {
    ObjectStyle s;
    s.center       = center;
    s.color        = {gen.uniform(0.2, 0.8), gen.uniform(0.2, 0.8), gen.uniform(0.2, 0.8)};
    s.logScale     = std::log(0.045) + gen.normal(0.0, 0.1);
    s.opacityLogit = logit(0.75);
    s.spread       = spec.clusterSpread;
    return s;
}

void
addGaussian(GaussianScene &scene, Generator &gen, const ObjectStyle &style) {
    const std::array<float, 3> pos = {
        float(style.center.x() + gen.normal(0.0, style.spread)),
        float(style.center.y() + gen.normal(0.0, style.spread)),
        float(style.center.z() + gen.normal(0.0, style.spread)),
    };
    const std::array<float, 3> logScale = {
        float(style.logScale + gen.normal(0.0, 0.25)),
        float(style.logScale + gen.normal(0.0, 0.25)),
        float(style.logScale + gen.normal(0.0, 0.25)),
    };
    const float opacity = float(style.opacityLogit + gen.normal(0.0, 0.5));
    std::vector<float> sh(static_cast<std::size_t>(scene.shStride()), 0.0f);
    for (int c = 0; c < 3; ++c) {
        const double rgb = std::clamp(style.color[c] + gen.normal(0.0, 0.04), 0.0, 1.0);
        sh[static_cast<std::size_t>(c)] = float((rgb - 0.5) / kShC0);
    }
    scene.push_back(pos, gen.randomQuaternion(), logScale, opacity, sh);
}

/// Object centers in the z = 0 band, kept apart so objects stay distinguishable.
std::vector<Eigen::Vector3d>
placeCenters(Generator &gen, int count, const SynthSpec &spec, std::vector<Eigen::Vector3d> taken = {}) {
    const double minSep = 4.0 * spec.clusterSpread;
    std::vector<Eigen::Vector3d> centers;
    for (int k = 0; k < count; ++k) {
        Eigen::Vector3d best = Eigen::Vector3d::Zero();
        double bestGap       = -1.0;
        for (int attempt = 0; attempt < 200; ++attempt) {
            const double rad = spec.layoutRadius * std::sqrt(gen.uniform(0.0, 1.0));
            const double ang = gen.uniform(0.0, 2.0 * std::numbers::pi);
            const Eigen::Vector3d c(rad * std::cos(ang), rad * std::sin(ang), gen.uniform(0.0, 0.3));
            double gap = std::numeric_limits<double>::infinity();
            for (const auto &o : taken) {
                gap = std::min(gap, (o - c).norm());
            }
            if (gap > bestGap) {
                best    = c;
                bestGap = gap;
            }
            if (gap >= minSep) {
                break;
            }
        }
        centers.push_back(best);
        taken.push_back(best);
    }
    return centers;
}

struct Stage {
    GaussianScene scene;
    std::vector<ObjectStyle> styles;
};

Stage
buildStage(Generator &gen, const SynthSpec &spec, std::size_t count) {
    Stage stage;
    const auto centers = placeCenters(gen, spec.clusterCount, spec);
    for (const auto &c : centers) {
        stage.styles.push_back(randomStyle(gen, c, spec));
    }
    const std::size_t k = stage.styles.size();
    for (std::size_t obj = 0; obj < k; ++obj) {
        const std::size_t members = count / k + (obj < count % k ? 1 : 0);
        for (std::size_t m = 0; m < members; ++m) {
            addGaussian(stage.scene, gen, stage.styles[obj]);
        }
    }
    return stage;
}

/// Indices of the `m` Gaussians nearest to `center`, ties by index.
std::vector<std::size_t>
nearest(const GaussianScene &scene, const Eigen::Vector3d &center, std::size_t m) {
    std::vector<std::size_t> idx(scene.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> d(scene.size());
    for (std::size_t i = 0; i < scene.size(); ++i) {
        d[i] = (scene.position(i) - center).squaredNorm();
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Eigen::Vector3d
shiftedColor(Generator &gen, const Eigen::Vector3d &base, double shift) {
    Eigen::Vector3d out;
    for (int c = 0; c < 3; ++c) {
        double sign = gen.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        // Push away from the nearer bound so the shift survives clamping.
        if (base[c] + sign * shift > 1.0 || base[c] + sign * shift < 0.0) {
            sign = -sign;
        }
        out[c] = std::clamp(base[c] + sign * shift, 0.0, 1.0);
    }
    return out;
}

std::size_t
tamperedCount(const SynthSpec &spec) {
    return static_cast<std::size_t>(std::llround(spec.tamperFraction * double(spec.gaussianCount)));
}

std::vector<double>
gaussianKernel(int radius) {
    const double sigma = 0.5 * radius;
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w                      = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (auto &w : k) {
        w /= sum;
    }
    return k;
}

} // namespace

TamperKind
parseTamperKind(std::string_view name) {
    if (name == "incorporate") {
        return TamperKind::Incorporate;
    }
    if (name == "modify") {
        return TamperKind::Modify;
    }
    if (name == "remove-and-fill") {
        return TamperKind::RemoveAndFill;
    }
    throw ConfigError("unknown tamper kind '" + std::string(name) +
                      "' (expected incorporate, modify or remove-and-fill)");
}

std::string_view
toString(TamperKind kind) {
    switch (kind) {
    case TamperKind::Incorporate: return "incorporate";
    case TamperKind::Modify: return "modify";
    case TamperKind::RemoveAndFill: return "remove-and-fill";
    }
    return "?";
}

void
SynthSpec::validate() const {
    if (gaussianCount < 1 || clusterCount < 1 || viewCount < 1) {
        throw ConfigError("synth: gaussian, cluster and view counts must be at least 1");
    }
    if (!(tamperFraction > 0.0 && tamperFraction < 1.0)) {
        throw ConfigError("synth: tamper fraction must lie in (0, 1)");
    }
    if (imageWidth < 1 || imageHeight < 1) {
        throw ConfigError("synth: image size must be at least 1x1");
    }
    if (!(layoutRadius >= 0.0) || !(clusterSpread > 0.0) || !(cameraDistance > 0.0) ||
        !(fovDeg > 0.0 && fovDeg < 180.0) || !(scaleFactor > 0.0) || !(positionJitter >= 0.0) ||
        !(colorShift >= 0.0)) {
        throw ConfigError("synth: geometry and perturbation parameters out of range");
    }
}

std::string
SynthSpec::toJson() const {
    nlohmann::ordered_json j;
    j["seed"]                 = seed;
    j["gaussian_count"]       = gaussianCount;
    j["cluster_count"]        = clusterCount;
    j["layout_radius"]        = layoutRadius;
    j["cluster_spread"]       = clusterSpread;
    j["tamper_fraction"]      = tamperFraction;
    j["tamper_kind"]          = std::string(toString(kind));
    j["color_shift"]          = colorShift;
    j["scale_factor"]         = scaleFactor;
    j["position_jitter"]      = positionJitter;
    j["view_count"]           = viewCount;
    j["image_width"]          = imageWidth;
    j["image_height"]         = imageHeight;
    j["camera_distance"]      = cameraDistance;
    j["camera_elevation_deg"] = cameraElevationDeg;
    j["fov_deg"]              = fovDeg;
    return j.dump(2);
}

SynthScene
generateAuthenticScene(const SynthSpec &spec) {
    if (spec.gaussianCount < 1 || spec.clusterCount < 1) {
        throw ConfigError("synth: gaussian and cluster counts must be at least 1");
    }
    Generator gen(spec.seed);
    Stage stage = buildStage(gen, spec, spec.gaussianCount);
    SynthScene out;
    out.scene = std::move(stage.scene);
    out.labels.assign(out.scene.size(), 0);
    return out;
}

SynthScene
generateScene(const SynthSpec &spec) {
    spec.validate();
    Generator gen(spec.seed);
    const std::size_t m = tamperedCount(spec);
    if (m == 0 || m >= spec.gaussianCount) {
        throw ConfigError("synth: tamper fraction selects " + std::to_string(m) + " of " +
                          std::to_string(spec.gaussianCount) + " Gaussians");
    }

    SynthScene out;
    switch (spec.kind) {
    case TamperKind::Modify: {
        Stage stage      = buildStage(gen, spec, spec.gaussianCount);
        const auto &obj  = stage.styles[gen.index(stage.styles.size())];
        const auto chosen = nearest(stage.scene, obj.center, m);
        const Eigen::Vector3d newColor = shiftedColor(gen, obj.color, spec.colorShift);
        const Eigen::Vector3d delta    = newColor - obj.color;
        out.labels.assign(stage.scene.size(), 0);
        for (std::size_t i : chosen) {
            out.labels[i] = 1;
            auto sh       = stage.scene.shCoeffs(i);
            for (int c = 0; c < 3; ++c) {
                sh[static_cast<std::size_t>(c)] += float(delta[c] / kShC0);
            }
            for (auto &s : stage.scene.logScales[i]) {
                s += float(std::log(spec.scaleFactor));
            }
            for (auto &p : stage.scene.positions[i]) {
                p += float(gen.normal(0.0, spec.positionJitter));
            }
        }
        out.scene = std::move(stage.scene);
        break;
    }
    case TamperKind::Incorporate: {
        Stage stage = buildStage(gen, spec, spec.gaussianCount - m);
        std::vector<Eigen::Vector3d> taken;
        for (const auto &s : stage.styles) {
            taken.push_back(s.center);
        }
        const auto center = placeCenters(gen, 1, spec, taken).front();
        ObjectStyle added = randomStyle(gen, center, spec);
        added.logScale += std::log(spec.scaleFactor);
        added.color = shiftedColor(gen, added.color, spec.colorShift);
        out.labels.assign(stage.scene.size(), 0);
        for (std::size_t k = 0; k < m; ++k) {
            addGaussian(stage.scene, gen, added);
            out.labels.push_back(1);
        }
        out.scene = std::move(stage.scene);
        break;
    }
    case TamperKind::RemoveAndFill: {
        Stage stage       = buildStage(gen, spec, spec.gaussianCount);
        const auto &obj   = stage.styles[gen.index(stage.styles.size())];
        const auto chosen = nearest(stage.scene, obj.center, m);
        std::vector<std::uint8_t> drop(stage.scene.size(), 0);
        for (std::size_t i : chosen) {
            drop[i] = 1;
        }
        GaussianScene kept;
        kept.shDegree = stage.scene.shDegree;
        for (std::size_t i = 0; i < stage.scene.size(); ++i) {
            if (drop[i] == 0) {
                kept.push_back(stage.scene.positions[i], stage.scene.rotations[i],
                               stage.scene.logScales[i], stage.scene.opacityLogits[i],
                               stage.scene.shCoeffs(i));
            }
        }
        // The fill is a flatter, blurrier patch whose color is off from the removed object.
        ObjectStyle fill = obj;
        fill.logScale += std::log(spec.scaleFactor);
        fill.color        = shiftedColor(gen, obj.color, spec.colorShift);
        fill.opacityLogit = logit(0.6);
        fill.spread       = 0.8 * obj.spread;
        out.labels.assign(kept.size(), 0);
        for (std::size_t k = 0; k < m; ++k) {
            addGaussian(kept, gen, fill);
            out.labels.push_back(1);
        }
        out.scene = std::move(kept);
        break;
    }
    }
    return out;
}

std::vector<Camera>
ringCameras(const SynthSpec &spec) {
    std::vector<Camera> cams;
    const double elev = spec.cameraElevationDeg * std::numbers::pi / 180.0;
    const double fx   = 0.5 * spec.imageWidth / std::tan(0.5 * spec.fovDeg * std::numbers::pi / 180.0);
    for (int k = 0; k < spec.viewCount; ++k) {
        const double az = 2.0 * std::numbers::pi * k / spec.viewCount;
        const Eigen::Vector3d eye(spec.cameraDistance * std::cos(elev) * std::cos(az),
                                  spec.cameraDistance * std::cos(elev) * std::sin(az),
                                  spec.cameraDistance * std::sin(elev));
        Camera cam = Camera::lookAt(eye, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(),
                                    spec.imageWidth, spec.imageHeight, fx, fx);
        cam.id     = k;
        cams.push_back(cam);
    }
    return cams;
}

std::vector<TamperMask>
renderGtMasks(const GaussianScene &scene, std::span<const std::uint8_t> labels, std::span<const Camera> cameras) {
    if (labels.size() != scene.size()) {
        throw ShapeError("renderGtMasks: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(scene.size()) + " Gaussians");
    }
    std::vector<double> r(labels.begin(), labels.end());
    std::vector<TamperMask> masks;
    for (const auto &cam : cameras) {
        const ScalarImage img = renderAttribute(computeBlendWeights(scene, cam), r);
        masks.push_back(binarize(img, 0.5, cam.id));
    }
    return masks;
}

DistortionKind
parseDistortionKind(std::string_view name) {
    if (name == "mask-gauss-noise") {
        return DistortionKind::MaskGaussNoise;
    }
    if (name == "mask-gauss-blur") {
        return DistortionKind::MaskGaussBlur;
    }
    if (name == "scale-noise") {
        return DistortionKind::ScaleNoise;
    }
    if (name == "opacity-noise") {
        return DistortionKind::OpacityNoise;
    }
    throw ConfigError("unknown distortion kind '" + std::string(name) + "'");
}

std::string_view
toString(DistortionKind kind) {
    switch (kind) {
    case DistortionKind::MaskGaussNoise: return "mask-gauss-noise";
    case DistortionKind::MaskGaussBlur: return "mask-gauss-blur";
    case DistortionKind::ScaleNoise: return "scale-noise";
    case DistortionKind::OpacityNoise: return "opacity-noise";
    }
    return "?";
}

bool
isMaskDistortion(DistortionKind kind) {
    return kind == DistortionKind::MaskGaussNoise || kind == DistortionKind::MaskGaussBlur;
}

TamperMask
distortMask(const TamperMask &mask, DistortionKind kind, double magnitude, std::uint64_t seed) {
    if (!isMaskDistortion(kind)) {
        throw ConfigError("distortMask: '" + std::string(toString(kind)) + "' applies to scenes");
    }
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
        throw ConfigError("distortion magnitude must be finite and >= 0");
    }
    if (magnitude == 0.0) {
        return mask;
    }
    TamperMask out = mask;
    if (kind == DistortionKind::MaskGaussNoise) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, magnitude);
        for (auto &l : out.labels) {
            l = (l != 0 ? 1.0 : 0.0) + noise(rng) >= 0.5 ? 1 : 0;
        }
        return out;
    }
    const int radius = static_cast<int>(std::lround(magnitude));
    if (radius == 0) {
        return mask;
    }
    const auto kernel = gaussianKernel(radius);
    const int w = mask.width, h = mask.height;
    std::vector<double> tmp(static_cast<std::size_t>(w) * h), acc(tmp.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int xx = std::clamp(x + k, 0, w - 1);
                s += kernel[static_cast<std::size_t>(k + radius)] * (mask.tampered(xx, y) ? 1.0 : 0.0);
            }
            tmp[static_cast<std::size_t>(y) * w + x] = s;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int yy = std::clamp(y + k, 0, h - 1);
                s += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            acc[static_cast<std::size_t>(y) * w + x] = s;
        }
    }
    for (std::size_t p = 0; p < acc.size(); ++p) {
        out.labels[p] = acc[p] >= 0.5 ? 1 : 0;
    }
    return out;
}

GaussianScene
distortScene(const GaussianScene &scene, DistortionKind kind, double magnitude, std::uint64_t seed) {
    if (isMaskDistortion(kind)) {
        throw ConfigError("distortScene: '" + std::string(toString(kind)) + "' applies to masks");
    }
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
        throw ConfigError("distortion magnitude must be finite and >= 0");
    }
    GaussianScene out = scene;
    if (magnitude == 0.0) {
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, magnitude);
    if (kind == DistortionKind::ScaleNoise) {
        for (auto &s : out.logScales) {
            for (auto &c : s) {
                c = float(c + noise(rng));
            }
        }
    } else {
        for (auto &o : out.opacityLogits) {
            o = float(o + noise(rng));
        }
    }
    return out;
}

std::uint64_t
deriveSeed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<TamperMask>
distortMasks(std::span<const TamperMask> masks, DistortionKind kind, double magnitude, std::uint64_t seed) {
    std::vector<TamperMask> out;
    out.reserve(masks.size());
    for (const auto &m : masks) {
        out.push_back(distortMask(m, kind, magnitude, deriveSeed(seed, static_cast<std::uint64_t>(m.viewId))));
    }
    return out;
}

std::vector<TamperMask>
addFalsePositives(std::span<const TamperMask> masks, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw ConfigError("false-positive fraction must lie in [0, 1]");
    }
    std::vector<TamperMask> out(masks.begin(), masks.end());
    for (auto &m : out) {
        std::mt19937_64 rng(deriveSeed(seed, static_cast<std::uint64_t>(m.viewId)));
        std::vector<std::size_t> idx(m.labels.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto count = static_cast<std::size_t>(std::llround(fraction * double(idx.size())));
        for (std::size_t k = 0; k < count; ++k) {
            m.labels[idx[k]] = 1;
        }
    }
    return out;
}

SynthCase
buildCase(const SynthSpec &spec, const CaseOptions &options) {
    spec.validate();
    SynthCase out;
    out.spec          = spec;
    SynthScene synth  = options.authentic ? generateAuthenticScene(spec) : generateScene(spec);
    out.scene         = std::move(synth.scene);
    out.labels        = std::move(synth.labels);
    if (options.sceneDistortion) {
        out.scene = distortScene(out.scene, *options.sceneDistortion, options.sceneMagnitude,
                                 deriveSeed(spec.seed, 1));
    }
    out.cameras    = ringCameras(spec);
    out.gtMasks    = renderGtMasks(out.scene, out.labels, out.cameras);
    out.inputMasks = out.gtMasks;
    if (options.maskNoise > 0.0) {
        out.inputMasks = distortMasks(out.inputMasks, DistortionKind::MaskGaussNoise, options.maskNoise,
                                      deriveSeed(spec.seed, 2));
    }
    if (options.maskBlur > 0.0) {
        out.inputMasks = distortMasks(out.inputMasks, DistortionKind::MaskGaussBlur, options.maskBlur,
                                      deriveSeed(spec.seed, 3));
    }
    if (options.falsePositiveRate > 0.0) {
        out.inputMasks = addFalsePositives(out.inputMasks, options.falsePositiveRate, deriveSeed(spec.seed, 4));
    }
    for (int id : options.dropViews) {
        auto it = std::find_if(out.inputMasks.begin(), out.inputMasks.end(),
                               [id](const TamperMask &m) { return m.viewId == id; });
        if (it == out.inputMasks.end()) {
            throw ConfigError("drop view " + std::to_string(id) + " is not a camera id");
        }
        std::fill(it->labels.begin(), it->labels.end(), std::uint8_t{0});
    }
    return out;
}

void
writeSynthCase(const std::filesystem::path &dir,
               const SynthSpec &spec,
               const GaussianScene &scene,
               std::span<const std::uint8_t> labels,
               std::span<const Camera> cameras,
               std::span<const TamperMask> inputMasks,
               std::span<const TamperMask> gtMasks) {
    std::filesystem::create_directories(dir);
    savePly(scene, dir / "model.ply");
    saveCameras({cameras.begin(), cameras.end()}, dir / "cameras.json");
    saveMasks({inputMasks.begin(), inputMasks.end()}, dir / "masks");
    saveMasks({gtMasks.begin(), gtMasks.end()}, dir / "gt_masks");

    auto writeText = [](const std::filesystem::path &path, const std::string &text) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) {
            throw WriteError(path.string() + ": cannot open for writing");
        }
        out << text << "\n";
        if (!out) {
            throw WriteError(path.string() + ": write failed");
        }
    };
    nlohmann::json lab = std::vector<int>(labels.begin(), labels.end());
    writeText(dir / "labels.json", lab.dump());
    writeText(dir / "spec.json", spec.toJson());
}

std::vector<std::uint8_t>
loadLabels(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string() + ": cannot open labels file");
    }
    try {
        const auto j = nlohmann::json::parse(in);
        std::vector<std::uint8_t> out;
        for (const auto &v : j) {
            out.push_back(v.get<int>() != 0 ? 1 : 0);
        }
        return out;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace gsck

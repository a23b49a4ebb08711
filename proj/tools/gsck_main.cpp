// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
// gsck: batch tamper localization for Gaussian splat scenes.
//
// Stages talk to each other only through files, so any stage can be rerun alone:
//   synth -> init -> optimize -> render -> evaluate
//
#include <gsck/camera.hpp>
#include <gsck/errors.hpp>
#include <gsck/evaluation.hpp>
#include <gsck/image_io.hpp>
#include <gsck/optimizer.hpp>
#include <gsck/parallel.hpp>
#include <gsck/ply.hpp>
#include <gsck/render.hpp>
#include <gsck/synth.hpp>
#include <gsck/voting.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gsck;

namespace {

struct Paths {
    fs::path model;
    fs::path cameras;
    fs::path masks;
    fs::path gt;
    fs::path out = ".";
};

struct EvalFlags {
    double maskThreshold = 0.5;
    bool sweep           = false;
};

void
requirePath(const fs::path &path, const char *what) {
    if (path.empty()) {
        throw ConfigError(std::string("missing required ") + what + " path");
    }
    if (!fs::exists(path)) {
        throw ConfigError(std::string(what) + " not found: " + path.string());
    }
}

void
addOptimFlags(CLI::App &cmd, OptimConfig &cfg, std::string &shFeature, bool &noStandardize) {
    cmd.add_option("--lambda1", cfg.lambda1, "weight on tampered pixels");
    cmd.add_option("--lambda2", cfg.lambda2, "weight on authentic pixels");
    cmd.add_option("--beta", cfg.beta, "2D loss weight");
    cmd.add_option("--gamma", cfg.gamma, "3D contrastive loss weight");
    cmd.add_option("--lr", cfg.learningRate, "Adam learning rate");
    cmd.add_option("--warmup", cfg.warmupIters, "2D-only iterations");
    cmd.add_option("--iters", cfg.totalIters, "total iterations");
    cmd.add_option("--tau-high", cfg.tauHigh, "high-confidence bound");
    cmd.add_option("--tau-low", cfg.tauLow, "low-confidence bound");
    cmd.add_option("--threshold", cfg.threshold, "3D decision threshold on r");
    cmd.add_option("--views-per-iter", cfg.viewsPerIteration, "views accumulated per step");
    cmd.add_option("--sh-feature", shFeature, "SH columns in the contrastive features")
        ->check(CLI::IsMember({"dc", "full"}));
    cmd.add_flag("--no-standardize", noStandardize, "use raw contrastive features");
    cmd.add_flag("--freeze-partition", cfg.freezePartition, "partition once at the end of warmup");
}

void
printConfig(const char *command, const OptimConfig &cfg, std::uint64_t seed) {
    std::printf("gsck %s: lambda1=%g lambda2=%g beta=%g gamma=%g lr=%g adam=(%g,%g,%g) "
                "warmup=%d iters=%d tau_high=%g tau_low=%g threshold=%g views_per_iter=%d "
                "sh_feature=%s standardize=%d freeze_partition=%d seed=%llu threads=%d\n",
                command, cfg.lambda1, cfg.lambda2, cfg.beta, cfg.gamma, cfg.learningRate,
                cfg.adamBeta1, cfg.adamBeta2, cfg.adamEpsilon, cfg.warmupIters, cfg.totalIters,
                cfg.tauHigh, cfg.tauLow, cfg.threshold, cfg.viewsPerIteration,
                cfg.features.sh == ShFeature::Dc ? "dc" : "full", cfg.features.standardize ? 1 : 0,
                cfg.freezePartition ? 1 : 0, static_cast<unsigned long long>(seed), workerCount());
}

void
printHistogram(const char *name, const std::vector<std::uint32_t> &counts, std::size_t views) {
    std::vector<std::size_t> hist(views + 1, 0);
    for (auto c : counts) {
        ++hist[std::min<std::size_t>(c, views)];
    }
    std::printf("  %-9s", name);
    for (std::size_t k = 0; k <= views; ++k) {
        std::printf(" %zu:%zu", k, hist[k]);
    }
    std::printf("\n");
}

std::size_t
countAbove(const GaussianScene &scene, double threshold) {
    return countAtOrAbove(scene.tamper, threshold);
}

GaussianScene
runInit(const Paths &p, const OptimConfig &cfg) {
    requirePath(p.model, "model");
    requirePath(p.cameras, "cameras");
    requirePath(p.masks, "masks directory");
    const GaussianScene scene = loadPly(p.model);
    const auto cameras        = loadCameras(p.cameras);
    const auto masks          = loadMasks(p.masks, cameras);
    const VoteTally tally     = castVotes(scene, cameras, masks);
    GaussianScene out         = consensusInit(tally, scene);

    std::printf("voting: %zu Gaussians, %zu views, consensus %zu\n", scene.size(), cameras.size(),
                tally.consensusCount());
    std::printf("vote histograms (votes:Gaussians)\n");
    printHistogram("tampered", tally.tampered, tally.viewCount);
    printHistogram("authentic", tally.authentic, tally.viewCount);
    printHistogram("abstained", tally.abstained, tally.viewCount);
    std::printf("r >= %g: %zu\n", cfg.threshold, countAbove(out, cfg.threshold));
    return out;
}

GaussianScene
runOptimize(const Paths &p, const OptimConfig &cfg, const fs::path &tracePath) {
    requirePath(p.model, "model");
    requirePath(p.cameras, "cameras");
    requirePath(p.masks, "masks directory");
    const GaussianScene scene = loadPly(p.model);
    const auto cameras        = loadCameras(p.cameras);
    const auto masks          = loadMasks(p.masks, cameras);
    OptimResult result        = runOptimization(scene, cameras, masks, cfg);
    writeTraceCsv(result.trace, tracePath);
    std::size_t skipped = 0;
    for (const auto &row : result.trace) {
        skipped += row.anchorsMissing ? 1 : 0;
    }
    if (!result.trace.empty()) {
        const auto &last = result.trace.back();
        std::printf("optimize: %zu iterations, final l2d=%.6g l3d=%.6g mean_r=%.6g\n",
                    result.trace.size(), last.l2d, last.l3d, last.meanR);
    }
    if (skipped > 0) {
        std::printf("optimize: 3D term skipped in %zu iterations (empty anchor set)\n", skipped);
    }
    std::printf("r >= %g: %zu of %zu\n", cfg.threshold, countAbove(result.scene, cfg.threshold),
                result.scene.size());
    return result.scene;
}

void
renderView(const GaussianScene &scene, const Camera &camera, const fs::path &outDir) {
    const ScalarImage img = renderAttribute(computeBlendWeights(scene, camera), scene.tamperAsDouble());
    const std::string stem = "mask_" + std::to_string(camera.id);
    writePng(toGray(img), outDir / (stem + ".png"));
    writeRawGrid(img, outDir / (stem + ".gsck"));
}

void
runRender(const Paths &p, std::optional<int> viewId) {
    requirePath(p.model, "model");
    requirePath(p.cameras, "cameras");
    const GaussianScene scene = loadPly(p.model);
    const auto cameras        = loadCameras(p.cameras);
    fs::create_directories(p.out);
    if (viewId) {
        const auto idx = findCamera(cameras, *viewId);
        if (!idx) {
            throw ConfigError("unknown view id " + std::to_string(*viewId) + " in " + p.cameras.string());
        }
        renderView(scene, cameras[*idx], p.out);
        std::printf("render: wrote view %d to %s\n", *viewId, p.out.string().c_str());
        return;
    }
    for (const auto &cam : cameras) {
        renderView(scene, cam, p.out);
    }
    std::printf("render: wrote %zu views to %s\n", cameras.size(), p.out.string().c_str());
}

ScoreReport
runEvaluate(const Paths &p, const EvalFlags &ev) {
    requirePath(p.model, "model");
    requirePath(p.cameras, "cameras");
    requirePath(p.gt, "ground-truth masks directory");
    const GaussianScene scene = loadPly(p.model);
    const auto cameras        = loadCameras(p.cameras);
    const auto gt             = loadMasks(p.gt, cameras);
    ScoreReport report;
    if (ev.sweep) {
        std::vector<BlendWeights> views;
        for (const auto &cam : cameras) {
            views.push_back(computeBlendWeights(scene, cam));
        }
        const double thresholds[] = {0.1, 0.3, 0.5};
        report = bestOverThresholds(views, scene.tamperAsDouble(), gt, thresholds);
    } else {
        report = evaluateViews(scene, cameras, gt, ev.maskThreshold);
    }
    fs::create_directories(p.out);
    writeReport(report, p.out / "report.json", p.out / "report.txt");
    std::fputs(reportToTable(report).c_str(), stdout);
    return report;
}

} // namespace

int
main(int argc, char **argv) {
    CLI::App app{"gsck: localize tampered Gaussians in a splat scene from per-view tamper masks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gsck 0.1.0");

    Paths paths;
    OptimConfig cfg;
    std::string shFeature = "dc";
    bool noStandardize    = false;
    std::uint64_t seed    = 0;
    EvalFlags ev;
    std::optional<int> viewId;
    fs::path casePath;

    auto addIo = [&](CLI::App &cmd, bool masks) {
        cmd.add_option("--model", paths.model, "input PLY");
        cmd.add_option("--cameras", paths.cameras, "cameras.json");
        if (masks) {
            cmd.add_option("--masks", paths.masks, "directory of mask_<id>.png");
        }
        cmd.add_option("--out", paths.out, "output directory");
    };

    auto *init = app.add_subcommand("init", "vote masks into an initial r; writes <out>/model_init.ply");
    addIo(*init, true);
    init->add_option("--threshold", cfg.threshold, "3D decision threshold on r");
    init->add_option("--seed", seed, "recorded in the config line; the pipeline draws no random numbers");

    auto *optimize = app.add_subcommand("optimize", "refine r; writes <out>/model_refined.ply and trace.csv");
    addIo(*optimize, true);
    addOptimFlags(*optimize, cfg, shFeature, noStandardize);
    optimize->add_option("--seed", seed, "recorded in the config line; the pipeline draws no random numbers");

    auto *render = app.add_subcommand("render", "render r as mask_<id>.png and mask_<id>.gsck");
    addIo(*render, false);
    render->add_option("--view", viewId, "single view id (default: all)");

    auto *evaluate = app.add_subcommand("evaluate", "score rendered r against ground truth masks");
    addIo(*evaluate, false);
    evaluate->add_option("--gt", paths.gt, "directory of ground-truth mask_<id>.png");
    evaluate->add_option("--mask-threshold", ev.maskThreshold, "binarization threshold for renders");
    evaluate->add_flag("--sweep", ev.sweep, "report the best of thresholds 0.1, 0.3, 0.5");

    SynthSpec spec;
    CaseOptions caseOpts;
    std::string tamperKind = "modify";
    std::string sceneDistortion;
    auto *synth = app.add_subcommand("synth", "write a synthetic case directory");
    synth->add_option("--out", paths.out, "case directory");
    synth->add_option("--seed", seed, "generator seed");
    synth->add_option("--n", spec.gaussianCount, "Gaussian count");
    synth->add_option("--clusters", spec.clusterCount, "object count");
    synth->add_option("--kind", tamperKind, "tamper kind")
        ->check(CLI::IsMember({"incorporate", "modify", "remove-and-fill"}));
    synth->add_option("--fraction", spec.tamperFraction, "tampered fraction");
    synth->add_option("--views", spec.viewCount, "ring cameras");
    synth->add_option("--width", spec.imageWidth, "image width");
    synth->add_option("--height", spec.imageHeight, "image height");
    synth->add_flag("--authentic", caseOpts.authentic, "skip tampering (all labels 0)");
    synth->add_option("--scene-distortion", sceneDistortion, "scale-noise or opacity-noise")
        ->check(CLI::IsMember({"scale-noise", "opacity-noise"}));
    synth->add_option("--scene-magnitude", caseOpts.sceneMagnitude, "scene distortion sigma");
    synth->add_option("--mask-noise", caseOpts.maskNoise, "mask-gauss-noise sigma on input masks");
    synth->add_option("--mask-blur", caseOpts.maskBlur, "mask-gauss-blur radius on input masks");
    synth->add_option("--false-positives", caseOpts.falsePositiveRate, "random tampered pixel fraction");
    synth->add_option("--drop-views", caseOpts.dropViews, "views whose input mask is all-authentic")
        ->delimiter(',');

    std::string distortKind;
    std::optional<double> magnitude;
    auto *distort = app.add_subcommand("distort", "corrupt masks or a model");
    distort->add_option("--kind", distortKind, "distortion kind")
        ->required()
        ->check(CLI::IsMember({"mask-gauss-noise", "mask-gauss-blur", "scale-noise", "opacity-noise"}));
    distort->add_option("--magnitude", magnitude, "sigma or blur radius (default per kind)");
    distort->add_option("--seed", seed, "noise seed");
    addIo(*distort, true);

    auto *runAll = app.add_subcommand("run-all", "init, optimize, render and (with ground truth) evaluate");
    runAll->add_option("--case", casePath, "synth case directory (fills unset paths)");
    addIo(*runAll, true);
    runAll->add_option("--gt", paths.gt, "ground-truth masks directory");
    runAll->add_flag("--sweep", ev.sweep, "report the best of thresholds 0.1, 0.3, 0.5");
    runAll->add_option("--mask-threshold", ev.maskThreshold, "binarization threshold for renders");
    addOptimFlags(*runAll, cfg, shFeature, noStandardize);
    runAll->add_option("--seed", seed, "recorded in the config line; the pipeline draws no random numbers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cfg.features.sh          = shFeature == "full" ? ShFeature::Full : ShFeature::Dc;
        cfg.features.standardize = !noStandardize;

        if (init->parsed()) {
            printConfig("init", cfg, seed);
            const GaussianScene out = runInit(paths, cfg);
            fs::create_directories(paths.out);
            savePly(out, paths.out / "model_init.ply");
        } else if (optimize->parsed()) {
            cfg.validate();
            printConfig("optimize", cfg, seed);
            fs::create_directories(paths.out);
            const GaussianScene out = runOptimize(paths, cfg, paths.out / "trace.csv");
            savePly(out, paths.out / "model_refined.ply");
        } else if (render->parsed()) {
            runRender(paths, viewId);
        } else if (evaluate->parsed()) {
            runEvaluate(paths, ev);
        } else if (synth->parsed()) {
            spec.seed = seed;
            spec.kind = parseTamperKind(tamperKind);
            if (!sceneDistortion.empty()) {
                caseOpts.sceneDistortion = parseDistortionKind(sceneDistortion);
            }
            const SynthCase c = buildCase(spec, caseOpts);
            writeSynthCase(paths.out, spec, c.scene, c.labels, c.cameras, c.inputMasks, c.gtMasks);
            std::printf("synth: %zu Gaussians (%zu tampered), %zu views -> %s\n", c.scene.size(),
                        static_cast<std::size_t>(std::count(c.labels.begin(), c.labels.end(), 1)),
                        c.cameras.size(), paths.out.string().c_str());
        } else if (distort->parsed()) {
            const DistortionKind kind = parseDistortionKind(distortKind);
            static const std::map<DistortionKind, double> defaults = {
                {DistortionKind::MaskGaussNoise, 25.0 / 255.0},
                {DistortionKind::MaskGaussBlur, 2.0},
                {DistortionKind::ScaleNoise, 0.05},
                {DistortionKind::OpacityNoise, 0.05},
            };
            const double mag = magnitude.value_or(defaults.at(kind));
            std::printf("gsck distort: kind=%s magnitude=%g seed=%llu\n", std::string(toString(kind)).c_str(),
                        mag, static_cast<unsigned long long>(seed));
            if (isMaskDistortion(kind)) {
                requirePath(paths.cameras, "cameras");
                requirePath(paths.masks, "masks directory");
                const auto cameras = loadCameras(paths.cameras);
                const auto masks   = loadMasks(paths.masks, cameras);
                saveMasks(distortMasks(masks, kind, mag, seed), paths.out);
            } else {
                requirePath(paths.model, "model");
                fs::create_directories(paths.out);
                savePly(distortScene(loadPly(paths.model), kind, mag, seed), paths.out / "model.ply");
            }
        } else if (runAll->parsed()) {
            if (!casePath.empty()) {
                requirePath(casePath, "case directory");
                if (paths.model.empty()) paths.model = casePath / "model.ply";
                if (paths.cameras.empty()) paths.cameras = casePath / "cameras.json";
                if (paths.masks.empty()) paths.masks = casePath / "masks";
                if (paths.gt.empty() && fs::exists(casePath / "gt_masks")) paths.gt = casePath / "gt_masks";
            }
            requirePath(paths.model, "model");
            requirePath(paths.cameras, "cameras");
            requirePath(paths.masks, "masks directory");
            if (!paths.gt.empty()) {
                requirePath(paths.gt, "ground-truth masks directory");
            }
            cfg.validate();
            printConfig("run-all", cfg, seed);
            fs::create_directories(paths.out);

            const GaussianScene initScene = runInit(paths, cfg);
            savePly(initScene, paths.out / "model_init.ply");
            Paths stage = paths;
            stage.model = paths.out / "model_init.ply";
            const GaussianScene refined = runOptimize(stage, cfg, paths.out / "trace.csv");
            savePly(refined, paths.out / "model_refined.ply");
            stage.model = paths.out / "model_refined.ply";
            stage.out   = paths.out / "renders";
            runRender(stage, std::nullopt);
            if (!paths.gt.empty()) {
                stage.out = paths.out;
                runEvaluate(stage, ev);
            }
        }
    } catch (const NumericError &e) {
        std::fprintf(stderr, "gsck: numeric error: %s\n", e.what());
        return 1;
    } catch (const Error &e) {
        std::fprintf(stderr, "gsck: error: %s\n", e.what());
        return 2;
    } catch (const fs::filesystem_error &e) {
        std::fprintf(stderr, "gsck: error: %s\n", e.what());
        return 2;
    }
    return 0;
}

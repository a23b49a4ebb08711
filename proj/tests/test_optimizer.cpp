// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include "fixtures.hpp"
#include "oracle_losses.hpp"

#include <gsck/errors.hpp>
#include <gsck/evaluation.hpp>
#include <gsck/optimizer.hpp>
#include <gsck/synth.hpp>
#include <gsck/voting.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

namespace gsck {
namespace {

using testing::TempDir;

ScalarImage
randomImage(int w, int h, std::uint64_t seed) {
    ScalarImage img(w, h);
    img.values = testing::randomValues(img.values.size(), seed);
    return img;
}

SynthCase
smallCase(std::uint64_t seed = 41) {
    SynthSpec spec;
    spec.seed          = seed;
    spec.gaussianCount = 600;
    spec.clusterCount  = 5;
    spec.imageWidth    = 64;
    spec.imageHeight   = 64;
    return buildCase(spec);
}

TEST(Loss2d, AllTamperedUnitImage) {
    const ScalarImage img(2, 2, 1.0);
    const auto l = loss2d(img, TamperMask(2, 2, 0, true), 1.0, 10.0);
    EXPECT_DOUBLE_EQ(l.value, -4.0);
    EXPECT_EQ(l.gradImage.values, std::vector<double>(4, -1.0));
}

TEST(Loss2d, ZeroImageIsZeroForAnyMask) {
    const ScalarImage img(5, 4, 0.0);
    EXPECT_EQ(loss2d(img, testing::randomMask(5, 4, 0.4, 1), 1.0, 10.0).value, 0.0);
}

TEST(Loss2d, MatchesDoubleLoop) {
    for (std::uint64_t seed = 31; seed < 41; ++seed) {
        const auto img  = randomImage(17, 13, seed);
        const auto mask = testing::randomMask(17, 13, 0.3, seed + 100);
        const auto l    = loss2d(img, mask, 1.0, 10.0);
        EXPECT_NEAR(l.value, testing::oracleLoss2d(img.values, mask.labels, 1.0, 10.0), 1e-9);
    }
}

TEST(Loss2d, GradientMatchesFiniteDifferences) {
    const auto img  = randomImage(6, 5, 3);
    const auto mask = testing::randomMask(6, 5, 0.5, 4);
    const auto l    = loss2d(img, mask, 1.3, 7.0);
    const double h  = 1e-5;
    for (std::size_t p = 0; p < img.values.size(); ++p) {
        auto up = img, dn = img;
        up.values[p] += h;
        dn.values[p] -= h;
        const double fd = (loss2d(up, mask, 1.3, 7.0).value - loss2d(dn, mask, 1.3, 7.0).value) / (2 * h);
        EXPECT_NEAR(l.gradImage.values[p], fd, 1e-6);
    }
}

TEST(Loss2d, ShapeMismatch) {
    EXPECT_THROW(loss2d(ScalarImage(4, 4), TamperMask(4, 5), 1, 1), ShapeError);
}

TEST(LossCyclic, ExampleAndBilinearity) {
    EXPECT_DOUBLE_EQ(lossCyclic(-4.0, 0.1, 1.0, 10.0), -3.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int k = 0; k < 50; ++k) {
        const double a = u(rng), b = u(rng), beta = u(rng), gamma = u(rng), s = u(rng);
        EXPECT_NEAR(lossCyclic(s * a, b, beta, gamma) - lossCyclic(0, b, beta, gamma), s * beta * a, 1e-12);
        EXPECT_NEAR(lossCyclic(a, s * b, beta, gamma) - lossCyclic(a, 0, beta, gamma), s * gamma * b, 1e-12);
    }
}

TEST(Adam, ZeroGradientLeavesValues) {
    std::vector<double> r = {0.1, 0.5, 0.9};
    AdamState st(3);
    const std::vector<double> g(3, 0.0);
    adamStep(st, r, g, {});
    EXPECT_EQ(r, (std::vector<double>{0.1, 0.5, 0.9}));
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
    std::vector<double> r = {0.5, 0.5};
    AdamState st(2);
    const std::vector<double> g = {3.0, -0.002};
    const auto d = adamStep(st, r, g, {0.01, 0.9, 0.999, 1e-8});
    EXPECT_NEAR(d[0], -0.01, 1e-8);
    EXPECT_NEAR(d[1], 0.01, 1e-5);
}

TEST(Adam, ClampsToUnitInterval) {
    std::vector<double> r = {0.2, 0.8};
    AdamState st(2);
    const std::vector<double> g = {1.0, -1.0};
    adamStep(st, r, g, {});
    EXPECT_EQ(r, (std::vector<double>{0.0, 1.0}));
}

TEST(Adam, MatchesHandComputedUpdates) {
    const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    std::vector<double> r = {0.5};
    AdamState st(1);
    const double grads[3] = {0.4, -0.1, 0.25};
    double m = 0, v = 0, x = 0.5;
    for (int t = 1; t <= 3; ++t) {
        const double g = grads[t - 1];
        m              = b1 * m + (1 - b1) * g;
        v              = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        x -= lr * mh / (std::sqrt(vh) + eps);
        const std::vector<double> gv = {g};
        adamStep(st, r, gv, {lr, b1, b2, eps});
        EXPECT_NEAR(r[0], x, 1e-15);
    }
    EXPECT_EQ(st.step, 3);
}

TEST(Adam, ShapeMismatch) {
    std::vector<double> r(3, 0.5);
    AdamState st(2);
    const std::vector<double> g(3, 0.0);
    EXPECT_THROW(adamStep(st, r, g, {}), ShapeError);
}

TEST(OptimConfig, Validation) {
    EXPECT_NO_THROW(OptimConfig{}.validate());
    OptimConfig c;
    c.warmupIters = 300;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.tauLow = 0.8;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.learningRate = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.lambda2 = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    c       = {};
    c.gamma = 0;
    EXPECT_NO_THROW(c.validate());
}

TEST(RunOptimization, AllAuthenticMasksDriveAttributeToZero) {
    auto c = smallCase();
    for (auto &m : c.inputMasks) {
        std::fill(m.labels.begin(), m.labels.end(), std::uint8_t{0});
    }
    auto scene = c.scene;
    scene.tamper.assign(scene.size(), 0.6f);
    OptimConfig cfg;
    cfg.totalIters  = 100;
    cfg.warmupIters = 100;
    const auto out  = runOptimization(scene, c.cameras, c.inputMasks, cfg);
    // Gaussians that never reach a pixel get no gradient and keep their value.
    std::vector<std::uint8_t> seen(scene.size(), 0);
    for (const auto &cam : c.cameras) {
        const auto bw = computeBlendWeights(scene, cam);
        for (auto i : bw.indices) {
            seen[i] = 1;
        }
    }
    for (std::size_t i = 0; i < scene.size(); ++i) {
        EXPECT_EQ(out.scene.tamper[i], seen[i] ? 0.0f : 0.6f) << i;
    }
}

TEST(RunOptimization, OnlyAttributeChangesAndStaysInRange) {
    const auto c    = smallCase(7);
    const auto init = consensusInit(castVotes(c.scene, c.cameras, c.inputMasks), c.scene);
    OptimConfig cfg;
    cfg.totalIters  = 30;
    cfg.warmupIters = 10;
    const auto out  = runOptimization(init, c.cameras, c.inputMasks, cfg);
    auto stripped   = out.scene;
    stripped.tamper = init.tamper;
    EXPECT_TRUE(stripped == init);
    for (float v : out.scene.tamper) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
    ASSERT_EQ(out.trace.size(), 30u);
    EXPECT_EQ(out.trace[0].viewId, c.cameras[0].id);
    EXPECT_EQ(out.trace[9].l3d, 0.0);
}

TEST(RunOptimization, SelfConsistentMasksImproveTheFit) {
    const auto c = smallCase(3);
    // Start from a uniform guess and fit masks the scene itself produces.
    auto scene = c.scene;
    scene.tamper.assign(scene.size(), 0.5f);
    OptimConfig cfg;
    cfg.totalIters  = 50;
    cfg.warmupIters = 50;
    cfg.learningRate = 0.05;
    std::vector<BlendWeights> views;
    for (const auto &cam : c.cameras) {
        views.push_back(computeBlendWeights(scene, cam));
    }
    auto totalLoss = [&](const std::vector<double> &r) {
        double s = 0;
        for (std::size_t j = 0; j < views.size(); ++j) {
            s += loss2d(renderAttribute(views[j], r), c.gtMasks[j], cfg.lambda1, cfg.lambda2).value;
        }
        return s;
    };
    const auto before = scene.tamperAsDouble();
    const auto out    = runOptimization(scene, views, c.gtMasks, cfg);
    const auto after  = out.scene.tamperAsDouble();
    EXPECT_LT(totalLoss(after), totalLoss(before));
    const auto f0 = evaluateViews(views, before, c.gtMasks, 0.5).meanF1;
    const auto f1 = evaluateViews(views, after, c.gtMasks, 0.5).meanF1;
    EXPECT_GE(f1, f0);
}

TEST(RunOptimization, GammaZeroEqualsPureWarmup) {
    const auto c    = smallCase(11);
    const auto init = consensusInit(castVotes(c.scene, c.cameras, c.inputMasks), c.scene);
    OptimConfig a;
    a.totalIters  = 20;
    a.warmupIters = 5;
    a.gamma       = 0.0;
    OptimConfig b = a;
    b.warmupIters = 20;
    EXPECT_TRUE(runOptimization(init, c.cameras, c.inputMasks, a).scene ==
                runOptimization(init, c.cameras, c.inputMasks, b).scene);
}

TEST(RunOptimization, ZeroIterationsReturnInput) {
    const auto c = smallCase(12);
    OptimConfig cfg;
    cfg.totalIters  = 0;
    cfg.warmupIters = 0;
    const auto out  = runOptimization(c.scene, c.cameras, c.inputMasks, cfg);
    EXPECT_TRUE(out.scene == c.scene);
    EXPECT_TRUE(out.trace.empty());
}

TEST(RunOptimization, Deterministic) {
    const auto c    = smallCase(13);
    const auto init = consensusInit(castVotes(c.scene, c.cameras, c.inputMasks), c.scene);
    OptimConfig cfg;
    cfg.totalIters  = 25;
    cfg.warmupIters = 5;
    const auto a    = runOptimization(init, c.cameras, c.inputMasks, cfg);
    const auto b    = runOptimization(init, c.cameras, c.inputMasks, cfg);
    EXPECT_TRUE(a.scene == b.scene);
}

TEST(RunOptimization, MissingAnchorsAreReportedNotFatal) {
    const auto c = smallCase(14);
    auto scene   = c.scene;
    scene.tamper.assign(scene.size(), 0.4f); // every Gaussian starts in the middle set
    OptimConfig cfg;
    cfg.totalIters  = 2;
    cfg.warmupIters = 0;
    cfg.learningRate = 1e-3;
    const auto out  = runOptimization(scene, c.cameras, c.inputMasks, cfg);
    EXPECT_TRUE(out.trace[0].anchorsMissing);
}

TEST(RunOptimization, ConfigErrors) {
    const auto c = smallCase(15);
    EXPECT_THROW(runOptimization(c.scene, std::span<const Camera>{}, std::span<const TamperMask>{}, {}),
                 ConfigError);
    const std::vector<Camera> two(c.cameras.begin(), c.cameras.begin() + 2);
    EXPECT_THROW(runOptimization(c.scene, two, c.inputMasks, {}), ConfigError);
    OptimConfig bad;
    bad.warmupIters = -1;
    EXPECT_THROW(runOptimization(c.scene, c.cameras, c.inputMasks, bad), ConfigError);
}

TEST(Trace, CsvHeaderAndRows) {
    TempDir dir("trace");
    std::vector<TraceRow> rows(3);
    rows[2].iteration = 3;
    writeTraceCsv(rows, dir / "trace.csv");
    std::ifstream in(dir / "trace.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "iteration,view_id,l2d,l3d,l_total,mean_r,n_high,n_middle,n_low");
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
    }
    EXPECT_EQ(n, 3);
}

TEST(Trace, CountAtOrAbove) {
    const std::vector<float> r = {0.0f, 0.1f, 0.05f, 0.5f};
    EXPECT_EQ(countAtOrAbove(r, 0.1), 2u);
}

} // namespace
} // namespace gsck

// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include "fixtures.hpp"
#include "oracle_losses.hpp"

#include <gsck/contrastive.hpp>
#include <gsck/errors.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <random>

namespace gsck {
namespace {

TEST(Partition, RuleExample) {
    const std::vector<double> r = {0.9, 0.5, 0.02};
    const auto p                = partition(r, 0.7, 0.05);
    EXPECT_EQ(p.high, (std::vector<std::uint32_t>{0}));
    EXPECT_EQ(p.middle, (std::vector<std::uint32_t>{1}));
    EXPECT_EQ(p.low, (std::vector<std::uint32_t>{2}));
}

TEST(Partition, BoundariesAreInclusive) {
    const std::vector<double> r = {0.7, 0.05, 0.0500001, 0.6999999};
    const auto p                = partition(r, 0.7, 0.05);
    EXPECT_EQ(p.high, (std::vector<std::uint32_t>{0}));
    EXPECT_EQ(p.low, (std::vector<std::uint32_t>{1}));
    EXPECT_EQ(p.middle, (std::vector<std::uint32_t>{2, 3}));
}

TEST(Partition, AllZeroIsAllLow) {
    const std::vector<double> r(6, 0.0);
    const auto p = partition(r, 0.7, 0.05);
    EXPECT_EQ(p.low.size(), 6u);
    EXPECT_TRUE(p.high.empty());
    EXPECT_TRUE(p.middle.empty());
}

TEST(Partition, MatchesScalarComparisons) {
    const auto r = testing::randomValues(500, 19);
    const auto p = partition(r, 0.7, 0.05);
    std::vector<int> seen(r.size(), 0);
    for (auto i : p.high) {
        EXPECT_GE(r[i], 0.7);
        ++seen[i];
    }
    for (auto i : p.low) {
        EXPECT_LE(r[i], 0.05);
        ++seen[i];
    }
    for (auto i : p.middle) {
        EXPECT_TRUE(r[i] > 0.05 && r[i] < 0.7);
        ++seen[i];
    }
    for (int s : seen) {
        EXPECT_EQ(s, 1) << "disjoint and covering";
    }
}

TEST(Partition, PermutationCommutes) {
    const auto r = testing::randomValues(100, 20);
    std::vector<std::uint32_t> perm(r.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(2));
    std::vector<double> permuted(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        permuted[k] = r[perm[k]];
    }
    const auto a = partition(r, 0.7, 0.05);
    const auto b = partition(permuted, 0.7, 0.05);
    auto mapped  = [&](const std::vector<std::uint32_t> &s) {
        std::vector<std::uint32_t> out;
        for (auto k : s) {
            out.push_back(perm[k]);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    EXPECT_EQ(mapped(b.high), a.high);
    EXPECT_EQ(mapped(b.middle), a.middle);
    EXPECT_EQ(mapped(b.low), a.low);
}

TEST(Partition, InvalidThresholds) {
    const std::vector<double> r = {0.5};
    EXPECT_THROW(partition(r, 0.05, 0.05), ConfigError);
    EXPECT_THROW(partition(r, 0.3, 0.5), ConfigError);
    EXPECT_THROW(partition(r, 1.2, 0.1), ConfigError);
}

TEST(Features, IdenticalGaussiansGiveZeros) {
    GaussianScene scene;
    const float sh[3] = {0.3f, 0.1f, 0.2f};
    for (int k = 0; k < 5; ++k) {
        scene.push_back({0.1f, 0.2f, 3.0f}, {1, 0, 0, 0}, {-2, -2, -1}, 0.4f, sh);
    }
    const auto f = featureVectors(scene);
    EXPECT_EQ(f.cols(), 14);
    EXPECT_EQ(f.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Features, TwoPointColumn) {
    GaussianScene scene;
    const float sh[3] = {0, 0, 0};
    scene.push_back({0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0}, 0.0f, sh);
    scene.push_back({2, 0, 0}, {1, 0, 0, 0}, {0, 0, 0}, 0.0f, sh);
    const auto f = featureVectors(scene);
    EXPECT_DOUBLE_EQ(f(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(f(1, 0), 1.0);
    EXPECT_EQ(f.rightCols(13).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Features, ZeroMeanUnitVarianceAndActivations) {
    const auto scene = testing::randomScene(31, 300, 1);
    const auto f     = featureVectors(scene);
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
        const double mean = f.col(c).mean();
        const double var  = (f.col(c).array() - mean).square().mean();
        EXPECT_NEAR(mean, 0.0, 1e-9);
        EXPECT_NEAR(var, 1.0, 1e-9);
    }
    const auto raw = rawFeatures(scene);
    EXPECT_NEAR(raw(4, 3), scene.opacity(4), 1e-15) << "activated opacity";
    EXPECT_NEAR(raw(4, 5), std::exp(double(scene.logScales[4][1])), 1e-15) << "activated scale";
    const auto oracle = testing::oracleFeatures(scene);
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        for (Eigen::Index c = 0; c < 14; ++c) {
            EXPECT_NEAR(f(i, c), oracle[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)], 1e-9);
        }
    }
}

TEST(Features, FullShAndUnstandardizedOptions) {
    const auto scene = testing::randomScene(32, 20, 2);
    EXPECT_EQ(featureVectors(scene, {ShFeature::Full, true}).cols(), 11 + 27);
    const auto raw = featureVectors(scene, {ShFeature::Dc, false});
    EXPECT_EQ(raw(3, 0), double(scene.positions[3][0]));
}

TEST(Similarity, Examples) {
    Eigen::VectorXd f(3), h(3), l(3);
    f << 1, 2, 3;
    h = f;
    l << 0, 0, 0;
    EXPECT_EQ(similarities(f, h, l).high, 0.0);
    Eigen::VectorXd a(2), b(2), m(2);
    a << -1, 0;
    b << 1, 0;
    m << 0, 5;
    const auto s = similarities(m, a, b);
    EXPECT_EQ(s.high, s.low);
}

TEST(Similarity, ComponentwiseOracle) {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd f(14), h(14), l(14);
        for (int c = 0; c < 14; ++c) {
            f[c] = g(rng);
            h[c] = g(rng);
            l[c] = g(rng);
        }
        double sh = 0, sl = 0;
        for (int c = 0; c < 14; ++c) {
            sh += (f[c] - h[c]) * (f[c] - h[c]);
            sl += (f[c] - l[c]) * (f[c] - l[c]);
        }
        const auto s = similarities(f, h, l);
        EXPECT_NEAR(s.high, sh, 1e-12);
        EXPECT_NEAR(s.low, sl, 1e-12);
        // Swapping the anchors flips the direction.
        const auto t = similarities(f, l, h);
        EXPECT_EQ(updateDirection(t.high, t.low), -updateDirection(s.high, s.low));
    }
}

TEST(Direction, SignRule) {
    EXPECT_EQ(updateDirection(0.2, 0.9), 1);
    EXPECT_EQ(updateDirection(0.9, 0.2), -1);
    EXPECT_EQ(updateDirection(0.5, 0.5), 0);
}

TEST(Directions, EmptyAnchorRaises) {
    const auto scene = testing::randomScene(1, 10);
    const auto f     = featureVectors(scene);
    Partition p;
    p.middle = {0, 1};
    p.low    = {2};
    EXPECT_THROW(updateDirections(f, p), AnchorError);
    p.high = {3};
    p.low.clear();
    EXPECT_THROW(updateDirections(f, p), AnchorError);
}

TEST(Loss3d, DirectEvaluation) {
    const std::vector<int> u          = {1};
    const std::vector<double> r       = {0.5};
    const std::vector<std::uint32_t> m = {0};
    const auto l = loss3d(u, r, m);
    EXPECT_DOUBLE_EQ(l.value, -0.5);
    EXPECT_DOUBLE_EQ(l.grad[0], -1.0);
}

TEST(Loss3d, ZeroDirectionsAndEmptyMiddle) {
    const std::vector<double> r = {0.2, 0.4, 0.6};
    const std::vector<int> zeros(2, 0);
    const std::vector<std::uint32_t> m = {0, 2};
    const auto l = loss3d(zeros, r, m);
    EXPECT_EQ(l.value, 0.0);
    EXPECT_EQ(l.grad, std::vector<double>(3, 0.0));
    const auto e = loss3d({}, r, {});
    EXPECT_EQ(e.value, 0.0);
    EXPECT_EQ(e.grad, std::vector<double>(3, 0.0));
    EXPECT_THROW(loss3d(zeros, r, std::vector<std::uint32_t>{0}), ShapeError);
}

TEST(Loss3d, FiniteDifferenceGradient) {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> dir(-1, 1);
    const auto r = testing::randomValues(60, 30);
    std::vector<std::uint32_t> middle;
    std::vector<int> u;
    for (std::uint32_t i = 0; i < r.size(); i += 2) {
        middle.push_back(i);
        u.push_back(dir(rng));
    }
    const auto l = loss3d(u, r, middle);
    const double h = 1e-6;
    for (std::size_t i = 0; i < r.size(); ++i) {
        auto up = r, dn = r;
        up[i] += h;
        dn[i] -= h;
        const double fd = (loss3d(u, up, middle).value - loss3d(u, dn, middle).value) / (2 * h);
        EXPECT_NEAR(l.grad[i], fd, 1e-8);
    }
}

TEST(Loss3d, DescentMovesTowardCloserAnchor) {
    const std::vector<int> u          = {1, -1, 0};
    const std::vector<double> r       = {0.4, 0.4, 0.4};
    const std::vector<std::uint32_t> m = {0, 1, 2};
    const auto l = loss3d(u, r, m);
    const double step = 0.01;
    EXPECT_GT(r[0] - step * l.grad[0], r[0]);
    EXPECT_LT(r[1] - step * l.grad[1], r[1]);
    EXPECT_EQ(r[2] - step * l.grad[2], r[2]);
}

TEST(Loss3d, MatchesPlainLoopOracleOnScenes) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto scene = testing::randomScene(seed + 40, 200);
        const auto r     = scene.tamperAsDouble();
        const auto part  = partition(r, 0.7, 0.05);
        const auto dirs  = updateDirections(featureVectors(scene), part);
        const auto l     = loss3d(dirs, r, part.middle);
        const auto ref   = testing::oracleLoss3d(testing::oracleFeatures(scene), r, 0.7, 0.05);
        EXPECT_NEAR(l.value, ref.value, 1e-9);
        for (std::size_t i = 0; i < r.size(); ++i) {
            EXPECT_NEAR(l.grad[i], ref.grad[i], 1e-12);
        }
    }
}

} // namespace
} // namespace gsck

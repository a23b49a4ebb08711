// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include "fixtures.hpp"

#include <gsck/errors.hpp>
#include <gsck/ply.hpp>

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace gsck {
namespace {

using testing::TempDir;

std::string
readBytes(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes a binary little-endian PLY with the given float properties, one row per vertex.
void
writeHandPly(const std::filesystem::path &p,
             const std::vector<std::string> &props,
             const std::vector<std::vector<float>> &rows,
             const std::string &type = "float",
             const std::string &format = "binary_little_endian") {
    std::ofstream out(p, std::ios::binary);
    out << "ply\nformat " << format << " 1.0\ncomment hand made\nelement vertex " << rows.size() << "\n";
    for (const auto &name : props) {
        out << "property " << type << " " << name << "\n";
    }
    out << "end_header\n";
    for (const auto &row : rows) {
        for (float v : row) {
            if (type == "double") {
                const double d = v;
                out.write(reinterpret_cast<const char *>(&d), sizeof d);
            } else {
                out.write(reinterpret_cast<const char *>(&v), sizeof v);
            }
        }
    }
}

const std::vector<std::string> kMinimal = {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                                           "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"};

TEST(Ply, RoundTripIsBitExactForEveryShDegree) {
    TempDir dir("ply");
    for (int degree = 0; degree <= 3; ++degree) {
        const auto scene = testing::randomScene(7, 100, degree);
        const auto path  = dir / ("s" + std::to_string(degree) + ".ply");
        savePly(scene, path);
        const auto back = loadPly(path);
        EXPECT_EQ(back.shDegree, degree);
        ASSERT_EQ(back.size(), scene.size());
        EXPECT_EQ(std::memcmp(back.positions.data(), scene.positions.data(), scene.size() * 12), 0);
        EXPECT_EQ(std::memcmp(back.sh.data(), scene.sh.data(), scene.sh.size() * 4), 0);
        EXPECT_TRUE(back == scene);

        // Saving the loaded scene reproduces the file byte for byte.
        const auto again = dir / ("t" + std::to_string(degree) + ".ply");
        savePly(back, again);
        EXPECT_EQ(readBytes(path), readBytes(again));
    }
}

TEST(Ply, EmptySceneRoundTrips) {
    TempDir dir("ply");
    GaussianScene empty;
    savePly(empty, dir / "e.ply");
    const auto back = loadPly(dir / "e.ply");
    EXPECT_EQ(back.size(), 0u);
    EXPECT_TRUE(back.sh.empty());
    EXPECT_TRUE(back.tamper.empty());
}

TEST(Ply, TamperColumnHoldsTheAttribute) {
    TempDir dir("ply");
    GaussianScene scene;
    const float sh[3] = {0, 0, 0};
    scene.push_back({0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0}, 0.0f, sh, 0.5f);
    savePly(scene, dir / "one.ply");
    const std::string bytes = readBytes(dir / "one.ply");
    EXPECT_NE(bytes.find("property float tamper_attr\nend_header\n"), std::string::npos);
    // tamper_attr is the last float of the only vertex.
    float last = 0.0f;
    std::memcpy(&last, bytes.data() + bytes.size() - 4, 4);
    EXPECT_EQ(last, 0.5f);
}

TEST(Ply, ThirdPartyLayoutWithoutTamperOrRest) {
    TempDir dir("ply");
    // Properties in a shuffled order plus an unknown extra column.
    std::vector<std::string> props = {"rot_0", "rot_1", "rot_2", "rot_3", "x", "y", "z", "extra",
                                      "opacity", "scale_0", "scale_1", "scale_2", "f_dc_0", "f_dc_1", "f_dc_2"};
    writeHandPly(dir / "t.ply", props, {{2, 0, 0, 0, 1, 2, 3, 9, 0.25f, -1, -2, -3, 0.1f, 0.2f, 0.3f}});
    const auto scene = loadPly(dir / "t.ply");
    ASSERT_EQ(scene.size(), 1u);
    EXPECT_EQ(scene.shDegree, 0);
    EXPECT_EQ(scene.positions[0], (std::array<float, 3>{1, 2, 3}));
    EXPECT_EQ(scene.logScales[0], (std::array<float, 3>{-1, -2, -3}));
    EXPECT_EQ(scene.opacityLogits[0], 0.25f);
    EXPECT_EQ(scene.tamper[0], 0.0f);
    EXPECT_EQ(scene.rotations[0], (std::array<float, 4>{1, 0, 0, 0})) << "renormalized on load";
    EXPECT_EQ(scene.sh, (std::vector<float>{0.1f, 0.2f, 0.3f}));
}

TEST(Ply, RestCoefficientsAreChannelMajorInFile) {
    TempDir dir("ply");
    auto props = kMinimal;
    for (int k = 0; k < 9; ++k) {
        props.push_back("f_rest_" + std::to_string(k));
    }
    std::vector<float> row = {0, 0, 0, 10, 20, 30, 0, 0, 0, 0, 1, 0, 0, 0};
    // f_rest: channel R coefs 1..3, then G, then B.
    for (float v : {11.f, 12.f, 13.f, 21.f, 22.f, 23.f, 31.f, 32.f, 33.f}) {
        row.push_back(v);
    }
    writeHandPly(dir / "r.ply", props, {row});
    const auto scene = loadPly(dir / "r.ply");
    EXPECT_EQ(scene.shDegree, 1);
    // In memory: [coef][channel].
    EXPECT_EQ(scene.sh, (std::vector<float>{10, 20, 30, 11, 21, 31, 12, 22, 32, 13, 23, 33}));
}

TEST(Ply, MissingPropertyIsNamed) {
    TempDir dir("ply");
    auto props = kMinimal;
    props.erase(std::find(props.begin(), props.end(), "rot_2"));
    writeHandPly(dir / "m.ply", props, {std::vector<float>(props.size(), 0.0f)});
    try {
        loadPly(dir / "m.ply");
        FAIL() << "expected SchemaError";
    } catch (const SchemaError &e) {
        EXPECT_NE(std::string(e.what()).find("rot_2"), std::string::npos);
    }
}

TEST(Ply, NonFloatPropertyIsSchemaError) {
    TempDir dir("ply");
    writeHandPly(dir / "d.ply", kMinimal, {std::vector<float>(kMinimal.size(), 0.0f)}, "double");
    EXPECT_THROW(loadPly(dir / "d.ply"), SchemaError);
}

TEST(Ply, BadRestCountIsSchemaError) {
    TempDir dir("ply");
    auto props = kMinimal;
    for (int k = 0; k < 5; ++k) {
        props.push_back("f_rest_" + std::to_string(k));
    }
    writeHandPly(dir / "b.ply", props, {std::vector<float>(props.size(), 0.0f)});
    EXPECT_THROW(loadPly(dir / "b.ply"), SchemaError);
}

TEST(Ply, AsciiAndGarbageHeadersAreParseErrors) {
    TempDir dir("ply");
    writeHandPly(dir / "a.ply", kMinimal, {}, "float", "ascii");
    EXPECT_THROW(loadPly(dir / "a.ply"), ParseError);
    writeHandPly(dir / "be.ply", kMinimal, {}, "float", "binary_big_endian");
    EXPECT_THROW(loadPly(dir / "be.ply"), ParseError);
    std::ofstream(dir / "g.ply") << "not a ply file\n";
    EXPECT_THROW(loadPly(dir / "g.ply"), ParseError);
    std::ofstream(dir / "h.ply") << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n";
    EXPECT_THROW(loadPly(dir / "h.ply"), ParseError);
    EXPECT_THROW(loadPly(dir / "does_not_exist.ply"), ParseError);
}

TEST(Ply, TruncatedBody) {
    TempDir dir("ply");
    savePly(testing::randomScene(1, 10), dir / "full.ply");
    std::string bytes = readBytes(dir / "full.ply");
    bytes.resize(bytes.size() - 7);
    std::ofstream(dir / "cut.ply", std::ios::binary) << bytes;
    EXPECT_THROW(loadPly(dir / "cut.ply"), TruncationError);
}

TEST(Ply, UnwritableDirectory) {
    EXPECT_THROW(savePly(testing::randomScene(1, 2), "/nonexistent_dir_gsck/x.ply"), WriteError);
}

} // namespace
} // namespace gsck

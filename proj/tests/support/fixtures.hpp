// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
// Random scenes, cameras and masks shared by the tests.
//
#pragma once

#include <gsck/camera.hpp>
#include <gsck/image.hpp>
#include <gsck/scene.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace gsck::testing {

/// Gaussians scattered in front of `frontCamera`: x, y in [-1, 1], z in [2, 5].
inline GaussianScene
randomScene(std::uint64_t seed, std::size_t n, int shDegree = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    GaussianScene scene;
    scene.shDegree = shDegree;
    std::vector<float> sh(static_cast<std::size_t>(scene.shStride()));
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<float, 3> pos = {float(2 * u(rng) - 1), float(2 * u(rng) - 1), float(2 + 3 * u(rng))};
        Eigen::Vector4d q(g(rng), g(rng), g(rng), g(rng));
        q.normalize();
        const std::array<float, 4> rot = {float(q[0]), float(q[1]), float(q[2]), float(q[3])};
        std::array<float, 3> ls;
        for (auto &s : ls) {
            s = float(std::log(0.03) + u(rng) * std::log(10.0));
        }
        for (auto &c : sh) {
            c = float(0.5 * g(rng));
        }
        scene.push_back(pos, rot, ls, float(1.5 * g(rng)), sh, float(u(rng)));
    }
    return scene;
}

/// Identity pose at the origin looking down +z, focal length equal to the width.
inline Camera
frontCamera(int width, int height, int id = 0) {
    Camera cam;
    cam.id     = id;
    cam.width  = width;
    cam.height = height;
    cam.fx     = width;
    cam.fy     = width;
    cam.cx     = 0.5 * width;
    cam.cy     = 0.5 * height;
    return cam;
}

inline TamperMask
randomMask(int width, int height, double p, std::uint64_t seed, int viewId = 0) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution b(p);
    TamperMask m(width, height, viewId);
    for (auto &l : m.labels) {
        l = b(rng) ? 1 : 0;
    }
    return m;
}

inline std::vector<double>
randomValues(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto &x : v) {
        x = u(rng);
    }
    return v;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string &tag) {
        std::random_device rd;
        mPath = std::filesystem::temp_directory_path() /
                ("gsck_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(mPath);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(mPath, ec);
    }
    TempDir(const TempDir &)            = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &
    path() const {
        return mPath;
    }
    std::filesystem::path
    operator/(const std::string &name) const {
        return mPath / name;
    }

  private:
    std::filesystem::path mPath;
};

} // namespace gsck::testing

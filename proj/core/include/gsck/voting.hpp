// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/camera.hpp>
#include <gsck/image.hpp>
#include <gsck/scene.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gsck {

/// Gray value at or above which a mask pixel is read as tampered.
inline constexpr int kMaskThreshold = 128;

/// Loads a grayscale PNG/PGM mask for `camera`. The mask takes the camera's id.
/// Throws ShapeError when the size differs from the camera and ParseError when the
/// file cannot be read.
TamperMask loadMask(const std::filesystem::path &path, const Camera &camera);
TamperMask maskFromGray(const GrayImage &image, int viewId);
/// Writes 255 for tampered and 0 for authentic pixels.
void saveMask(const TamperMask &mask, const std::filesystem::path &path);

/// `<dir>/mask_<id>.png`, falling back to `mask_<id>.pgm` when only that exists.
std::filesystem::path maskPath(const std::filesystem::path &dir, int viewId);
std::vector<TamperMask> loadMasks(const std::filesystem::path &dir,
                                  const std::vector<Camera> &cameras);
void saveMasks(const std::vector<TamperMask> &masks, const std::filesystem::path &dir);

enum class Vote : int { Abstain = -1, Authentic = 0, Tampered = 1 };

/// Vote of one Gaussian center in one view: abstain when the center is out of view,
/// otherwise the mask label under the projected center.
Vote castVote(const Camera &camera, const TamperMask &mask, const Eigen::Vector3d &mu);

/// Per-Gaussian vote counters. Keeps the three counts instead of the full
/// Gaussians x views vote matrix; the tally T_i equals the tampered count because
/// authentic votes add 0 and abstentions are excluded.
struct VoteTally {
    std::size_t viewCount = 0;
    std::vector<std::uint32_t> tampered;
    std::vector<std::uint32_t> authentic;
    std::vector<std::uint32_t> abstained;

    std::size_t
    size() const {
        return tampered.size();
    }
    std::uint32_t
    total(std::size_t i) const {
        return tampered[i];
    }
    /// Tampered votes strictly exceed both authentic votes and abstentions.
    bool
    consensus(std::size_t i) const {
        return tampered[i] > authentic[i] && tampered[i] > abstained[i];
    }
    std::size_t consensusCount() const;

    bool operator==(const VoteTally &) const = default;
};

/// Throws ConfigError when cameras and masks are not paired one-to-one by view id,
/// ShapeError when a mask's size differs from its camera.
VoteTally castVotes(const GaussianScene &scene,
                    std::span<const Camera> cameras,
                    std::span<const TamperMask> masks);

/// r_i = T_i for Gaussians that reach consensus and 0 otherwise, then min-max
/// normalized over the scene. Only the attribute changes.
GaussianScene consensusInit(const VoteTally &tally, GaussianScene scene);

} // namespace gsck

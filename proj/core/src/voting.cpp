// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/errors.hpp>
#include <gsck/image_io.hpp>
#include <gsck/parallel.hpp>
#include <gsck/voting.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace gsck {

TamperMask
maskFromGray(const GrayImage &image, int viewId) {
    TamperMask mask(image.width, image.height, viewId);
    std::transform(image.pixels.begin(), image.pixels.end(), mask.labels.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v >= kMaskThreshold ? 1 : 0); });
    return mask;
}

TamperMask
loadMask(const std::filesystem::path &path, const Camera &camera) {
    const GrayImage img = readGray(path);
    if (img.width != camera.width || img.height != camera.height) {
        throw ShapeError(path.string() + ": mask is " + std::to_string(img.width) + "x" +
                         std::to_string(img.height) + ", camera " + std::to_string(camera.id) +
                         " is " + std::to_string(camera.width) + "x" +
                         std::to_string(camera.height));
    }
    return maskFromGray(img, camera.id);
}

void
saveMask(const TamperMask &mask, const std::filesystem::path &path) {
    writePng(toGray(mask), path);
}

std::filesystem::path
maskPath(const std::filesystem::path &dir, int viewId) {
    const auto stem = "mask_" + std::to_string(viewId);
    auto png        = dir / (stem + ".png");
    if (!std::filesystem::exists(png)) {
        auto pgm = dir / (stem + ".pgm");
        if (std::filesystem::exists(pgm)) {
            return pgm;
        }
    }
    return png;
}

std::vector<TamperMask>
loadMasks(const std::filesystem::path &dir, const std::vector<Camera> &cameras) {
    std::vector<TamperMask> masks;
    masks.reserve(cameras.size());
    for (const auto &cam : cameras) {
        masks.push_back(loadMask(maskPath(dir, cam.id), cam));
    }
    return masks;
}

void
saveMasks(const std::vector<TamperMask> &masks, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    for (const auto &m : masks) {
        saveMask(m, dir / ("mask_" + std::to_string(m.viewId) + ".png"));
    }
}

Vote
castVote(const Camera &camera, const TamperMask &mask, const Eigen::Vector3d &mu) {
    const auto proj = projectCenter(camera, mu);
    if (!proj) {
        return Vote::Abstain;
    }
    const int x = std::min(mask.width - 1, static_cast<int>(std::floor(proj->u)));
    const int y = std::min(mask.height - 1, static_cast<int>(std::floor(proj->v)));
    return mask.tampered(x, y) ? Vote::Tampered : Vote::Authentic;
}

std::size_t
VoteTally::consensusCount() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        n += consensus(i) ? 1 : 0;
    }
    return n;
}

VoteTally
castVotes(const GaussianScene &scene, std::span<const Camera> cameras, std::span<const TamperMask> masks) {
    if (cameras.size() != masks.size()) {
        throw ConfigError("castVotes: " + std::to_string(cameras.size()) + " cameras but " +
                          std::to_string(masks.size()) + " masks");
    }
    for (std::size_t j = 0; j < cameras.size(); ++j) {
        if (masks[j].viewId != cameras[j].id) {
            throw ConfigError("castVotes: mask #" + std::to_string(j) + " belongs to view " +
                              std::to_string(masks[j].viewId) + ", camera is " +
                              std::to_string(cameras[j].id));
        }
        if (masks[j].width != cameras[j].width || masks[j].height != cameras[j].height) {
            throw ShapeError("castVotes: mask for view " + std::to_string(cameras[j].id) +
                             " does not match the camera size");
        }
    }

    const std::size_t n = scene.size();
    VoteTally tally;
    tally.viewCount = cameras.size();
    tally.tampered.assign(n, 0);
    tally.authentic.assign(n, 0);
    tally.abstained.assign(n, 0);
    parallelFor(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Eigen::Vector3d mu = scene.position(i);
            for (std::size_t j = 0; j < cameras.size(); ++j) {
                switch (castVote(cameras[j], masks[j], mu)) {
                case Vote::Tampered: ++tally.tampered[i]; break;
                case Vote::Authentic: ++tally.authentic[i]; break;
                case Vote::Abstain: ++tally.abstained[i]; break;
                }
            }
        }
    });
    return tally;
}

GaussianScene
consensusInit(const VoteTally &tally, GaussianScene scene) {
    if (tally.size() != scene.size()) {
        throw ShapeError("consensusInit: tally covers " + std::to_string(tally.size()) +
                         " Gaussians, scene has " + std::to_string(scene.size()));
    }
    std::vector<double> r(scene.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (tally.consensus(i)) {
            r[i] = static_cast<double>(tally.tampered[i]);
        }
    }
    normalizeTamper(r);
    scene.setTamper(r);
    return scene;
}

} // namespace gsck

// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/camera.hpp>
#include <gsck/image.hpp>
#include <gsck/scene.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsck {

enum class TamperKind { Incorporate, Modify, RemoveAndFill };

TamperKind parseTamperKind(std::string_view name);
std::string_view toString(TamperKind kind);

/// Recipe for a synthetic scene made of Gaussian blobs ("objects") on a ring-viewed
/// stage, with one object tampered.
struct SynthSpec {
    std::uint64_t seed        = 0;
    std::size_t gaussianCount = 5000;
    int clusterCount          = 10;
    /// Object centers are scattered over a disk of this radius in the z = 0 plane.
    double layoutRadius = 1.6;
    /// Per-axis standard deviation of Gaussian centers around their object center.
    double clusterSpread = 0.18;
    double tamperFraction = 0.1;
    TamperKind kind       = TamperKind::Modify;
    /// Added to the tampered object's RGB base color (sign drawn per channel).
    double colorShift = 0.35;
    /// Multiplies tampered scales.
    double scaleFactor = 1.5;
    /// Standard deviation of the extra positional noise on tampered Gaussians.
    double positionJitter = 0.03;

    int viewCount            = 8;
    int imageWidth           = 128;
    int imageHeight          = 128;
    double cameraDistance    = 5.0;
    double cameraElevationDeg = 30.0;
    double fovDeg            = 50.0;

    /// Throws ConfigError on an empty scene, a tamper fraction outside (0, 1) or
    /// non-positive geometry.
    void validate() const;
    std::string toJson() const;
};

struct GroundTruth {
    std::vector<std::uint8_t> labels;
    std::vector<TamperMask> masks;
};

struct SynthScene {
    GaussianScene scene;
    std::vector<std::uint8_t> labels;
};

/// Deterministic in `spec.seed`. Exactly round(tamperFraction * gaussianCount) Gaussians
/// are labelled tampered.
SynthScene generateScene(const SynthSpec &spec);

/// The same stage with no tampering applied: every label is 0.
SynthScene generateAuthenticScene(const SynthSpec &spec);

/// `spec.viewCount` cameras on a ring around the origin at fixed elevation, looking at
/// the origin with +z up. Ids are 0..viewCount-1.
std::vector<Camera> ringCameras(const SynthSpec &spec);

/// Renders the labels as the attribute and binarizes each view at 0.5.
std::vector<TamperMask> renderGtMasks(const GaussianScene &scene,
                                      std::span<const std::uint8_t> labels,
                                      std::span<const Camera> cameras);

enum class DistortionKind { MaskGaussNoise, MaskGaussBlur, ScaleNoise, OpacityNoise };

/// Accepts mask-gauss-noise, mask-gauss-blur, scale-noise, opacity-noise; throws
/// ConfigError otherwise.
DistortionKind parseDistortionKind(std::string_view name);
std::string_view toString(DistortionKind kind);
bool isMaskDistortion(DistortionKind kind);

/// mask-gauss-noise adds N(0, magnitude) to the 0/1 labels; mask-gauss-blur applies a
/// Gaussian kernel of radius round(magnitude) (sigma = radius / 2, edge-replicated).
/// Either way the result is re-binarized at 0.5. Throws ConfigError for a scene kind.
TamperMask distortMask(const TamperMask &mask, DistortionKind kind, double magnitude, std::uint64_t seed);

/// scale-noise adds N(0, magnitude) to the log scales (multiplicative log-normal noise);
/// opacity-noise adds N(0, magnitude) to the opacity logits. Throws ConfigError for a
/// mask kind.
GaussianScene distortScene(const GaussianScene &scene, DistortionKind kind, double magnitude, std::uint64_t seed);

/// Applies `distortMask` to every mask; view `id` uses seed deriveSeed(seed, id).
std::vector<TamperMask> distortMasks(std::span<const TamperMask> masks,
                                     DistortionKind kind,
                                     double magnitude,
                                     std::uint64_t seed);

/// Sets a seeded random `fraction` of each mask's pixels to tampered.
std::vector<TamperMask> addFalsePositives(std::span<const TamperMask> masks, double fraction, std::uint64_t seed);

/// Independent stream seed from a base seed (splitmix64 of seed and stream).
std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t stream);

/// How the input masks of a case depart from its ground truth.
struct CaseOptions {
    /// Build the untouched stage (all labels 0) instead of a tampered scene.
    bool authentic = false;
    /// Applied to the model before masks are rendered.
    std::optional<DistortionKind> sceneDistortion;
    double sceneMagnitude = 0.0;
    /// mask-gauss-noise sigma on the input masks (0 disables).
    double maskNoise = 0.0;
    /// mask-gauss-blur radius on the input masks (0 disables).
    double maskBlur = 0.0;
    /// Fraction of random pixels flipped to tampered in every input mask.
    double falsePositiveRate = 0.0;
    /// View ids whose input mask is replaced by an all-authentic mask.
    std::vector<int> dropViews;
};

struct SynthCase {
    SynthSpec spec;
    GaussianScene scene;
    std::vector<std::uint8_t> labels;
    std::vector<Camera> cameras;
    std::vector<TamperMask> inputMasks;
    std::vector<TamperMask> gtMasks;
};

/// Scene, ring cameras, ground-truth masks from the (possibly distorted) scene and the
/// corrupted input masks. Deterministic in `spec.seed`.
SynthCase buildCase(const SynthSpec &spec, const CaseOptions &options = {});

/// Everything `gsck synth` writes: model.ply, cameras.json, masks/, gt_masks/,
/// labels.json and spec.json.
void writeSynthCase(const std::filesystem::path &dir,
                    const SynthSpec &spec,
                    const GaussianScene &scene,
                    std::span<const std::uint8_t> labels,
                    std::span<const Camera> cameras,
                    std::span<const TamperMask> inputMasks,
                    std::span<const TamperMask> gtMasks);

std::vector<std::uint8_t> loadLabels(const std::filesystem::path &path);

} // namespace gsck

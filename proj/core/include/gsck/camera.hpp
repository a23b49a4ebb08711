// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/scene.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <vector>

namespace gsck {

/// Points at or closer than this camera-space depth are out of view.
inline constexpr double kZNear = 0.01;
/// Added to the diagonal of every projected 2D covariance (pixels^2).
inline constexpr double kLowPassVariance = 0.3;

/// Pinhole camera with OpenCV axes (x right, y down, z forward).
struct Camera {
    int id     = 0;
    int width  = 1;
    int height = 1;
    double fx  = 1.0;
    double fy  = 1.0;
    double cx  = 0.0;
    double cy  = 0.0;
    /// World-to-camera rotation W and translation t: p_cam = W * p_world + t.
    Eigen::Matrix3d rotation    = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    /// Throws ConfigError when intrinsics are non-positive or W is not orthonormal.
    void validate() const;

    Eigen::Vector3d toCamera(const Eigen::Vector3d &world) const {
        return rotation * world + translation;
    }

    /// Camera center in world coordinates.
    Eigen::Vector3d center() const {
        return -rotation.transpose() * translation;
    }

    /// Row-major 4x4 world-to-camera matrix.
    Eigen::Matrix4d worldToCamera() const;
    static Camera fromWorldToCamera(const Eigen::Matrix4d &w2c);

    /// Camera at `eye` looking at `target`; `up` is the world direction that should
    /// appear upward in the image.
    static Camera lookAt(const Eigen::Vector3d &eye,
                         const Eigen::Vector3d &target,
                         const Eigen::Vector3d &up,
                         int width,
                         int height,
                         double fx,
                         double fy);
};

struct CenterProjection {
    double u = 0.0;
    double v = 0.0;
    double z = 0.0;
};

/// Projects a Gaussian center. Returns nullopt (out of view) when the camera-space
/// depth is <= kZNear or the pixel position falls outside [0,width) x [0,height).
std::optional<CenterProjection> projectCenter(const Camera &camera, const Eigen::Vector3d &mu);

/// 2x3 Jacobian of (u, v) with respect to the camera-space point.
Eigen::Matrix<double, 2, 3> projectionJacobian(const Camera &camera,
                                               const Eigen::Vector3d &pCam);

/// EWA screen-space covariance J W Sigma W^T J^T + 0.3 I. Throws NumericError on
/// non-finite input.
Eigen::Matrix2d projectCovariance(const Camera &camera,
                                  const Eigen::Vector3d &mu,
                                  const Covariance3 &sigma);

std::vector<Camera> loadCameras(const std::filesystem::path &path);
void saveCameras(const std::vector<Camera> &cameras, const std::filesystem::path &path);

/// Index of the camera with the given id, or nullopt.
std::optional<std::size_t> findCamera(const std::vector<Camera> &cameras, int id);

} // namespace gsck

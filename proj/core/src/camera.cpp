// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/camera.hpp>
#include <gsck/errors.hpp>

#include <json.hpp>

#include <Eigen/Geometry>

#include <cmath>
#include <fstream>
#include <set>
#include <string>

namespace gsck {

using nlohmann::json;

void
Camera::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw ConfigError("camera " + std::to_string(id) + ": focal lengths must be positive");
    }
    if (width < 1 || height < 1) {
        throw ConfigError("camera " + std::to_string(id) + ": image size must be at least 1x1");
    }
    if (!rotation.allFinite() || !translation.allFinite() || !std::isfinite(cx) ||
        !std::isfinite(cy)) {
        throw ConfigError("camera " + std::to_string(id) + ": non-finite pose or intrinsics");
    }
    const double err = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
    if (err > 1e-6) {
        throw ConfigError("camera " + std::to_string(id) + ": rotation is not orthonormal");
    }
}

Eigen::Matrix4d
Camera::worldToCamera() const {
    Eigen::Matrix4d m          = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>()    = rotation;
    m.topRightCorner<3, 1>()   = translation;
    return m;
}

Camera
Camera::fromWorldToCamera(const Eigen::Matrix4d &w2c) {
    Camera cam;
    cam.rotation    = w2c.topLeftCorner<3, 3>();
    cam.translation = w2c.topRightCorner<3, 1>();
    return cam;
}

Camera
Camera::lookAt(const Eigen::Vector3d &eye,
               const Eigen::Vector3d &target,
               const Eigen::Vector3d &up,
               int width,
               int height,
               double fx,
               double fy) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    const Eigen::Vector3d right   = forward.cross(up).normalized();
    const Eigen::Vector3d down    = forward.cross(right);
    Camera cam;
    cam.width  = width;
    cam.height = height;
    cam.fx     = fx;
    cam.fy     = fy;
    cam.cx     = 0.5 * width;
    cam.cy     = 0.5 * height;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation     = -cam.rotation * eye;
    return cam;
}

std::optional<CenterProjection>
projectCenter(const Camera &camera, const Eigen::Vector3d &mu) {
    const Eigen::Vector3d p = camera.toCamera(mu);
    if (!(p.z() > kZNear)) {
        return std::nullopt;
    }
    const double u = camera.fx * p.x() / p.z() + camera.cx;
    const double v = camera.fy * p.y() / p.z() + camera.cy;
    if (!(u >= 0.0 && u < camera.width && v >= 0.0 && v < camera.height)) {
        return std::nullopt;
    }
    return CenterProjection{u, v, p.z()};
}

Eigen::Matrix<double, 2, 3>
projectionJacobian(const Camera &camera, const Eigen::Vector3d &pCam) {
    const double invZ  = 1.0 / pCam.z();
    const double invZ2 = invZ * invZ;
    Eigen::Matrix<double, 2, 3> J;
    J << camera.fx * invZ, 0.0, -camera.fx * pCam.x() * invZ2,
         0.0, camera.fy * invZ, -camera.fy * pCam.y() * invZ2;
    return J;
}

Eigen::Matrix2d
projectCovariance(const Camera &camera, const Eigen::Vector3d &mu, const Covariance3 &sigma) {
    const Eigen::Matrix3d S = sigma.matrix();
    if (!mu.allFinite() || !S.allFinite()) {
        throw NumericError("projectCovariance: non-finite input");
    }
    const Eigen::Vector3d pCam          = camera.toCamera(mu);
    const Eigen::Matrix<double, 2, 3> T = projectionJacobian(camera, pCam) * camera.rotation;
    Eigen::Matrix2d cov2                = T * S * T.transpose();
    cov2(0, 1) = cov2(1, 0) = 0.5 * (cov2(0, 1) + cov2(1, 0));
    cov2(0, 0) += kLowPassVariance;
    cov2(1, 1) += kLowPassVariance;
    if (!cov2.allFinite()) {
        throw NumericError("projectCovariance: non-finite result");
    }
    return cov2;
}

namespace {

Camera
cameraFromJson(const json &j, std::size_t index, const std::string &where) {
    for (const char *key : {"id", "width", "height", "fx", "fy", "cx", "cy", "w2c"}) {
        if (!j.contains(key)) {
            throw SchemaError(where + ": camera #" + std::to_string(index) + " missing '" + key +
                              "'");
        }
    }
    const auto &w2c = j.at("w2c");
    if (!w2c.is_array() || w2c.size() != 16) {
        throw SchemaError(where + ": camera #" + std::to_string(index) +
                          " 'w2c' must hold 16 numbers");
    }
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            m(r, c) = w2c.at(static_cast<std::size_t>(4 * r + c)).get<double>();
        }
    }
    Camera cam = Camera::fromWorldToCamera(m);
    cam.id     = j.at("id").get<int>();
    cam.width  = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.fx     = j.at("fx").get<double>();
    cam.fy     = j.at("fy").get<double>();
    cam.cx     = j.at("cx").get<double>();
    cam.cy     = j.at("cy").get<double>();
    cam.validate();
    return cam;
}

} // namespace

std::vector<Camera>
loadCameras(const std::filesystem::path &path) {
    const std::string where = path.string();
    std::ifstream in(path);
    if (!in) {
        throw ParseError(where + ": cannot open cameras file");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception &e) {
        throw ParseError(where + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw SchemaError(where + ": expected a JSON array of cameras");
    }
    std::vector<Camera> cameras;
    std::set<int> ids;
    try {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            cameras.push_back(cameraFromJson(doc[i], i, where));
            if (!ids.insert(cameras.back().id).second) {
                throw SchemaError(where + ": duplicate camera id " +
                                  std::to_string(cameras.back().id));
            }
        }
    } catch (const json::exception &e) {
        throw SchemaError(where + ": " + e.what());
    }
    return cameras;
}

void
saveCameras(const std::vector<Camera> &cameras, const std::filesystem::path &path) {
    json doc = json::array();
    for (const auto &cam : cameras) {
        const Eigen::Matrix4d m = cam.worldToCamera();
        json w2c                = json::array();
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                w2c.push_back(m(r, c));
            }
        }
        doc.push_back({{"id", cam.id},
                       {"width", cam.width},
                       {"height", cam.height},
                       {"fx", cam.fx},
                       {"fy", cam.fy},
                       {"cx", cam.cx},
                       {"cy", cam.cy},
                       {"w2c", w2c}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw WriteError(path.string() + ": cannot open for writing");
    }
    out << doc.dump(2) << "\n";
    if (!out) {
        throw WriteError(path.string() + ": write failed");
    }
}

std::optional<std::size_t>
findCamera(const std::vector<Camera> &cameras, int id) {
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        if (cameras[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

} // namespace gsck

// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/scene.hpp>

#include <filesystem>

namespace gsck {

/// Reads a binary little-endian 3DGS PLY.
///
/// Required float properties: x, y, z, f_dc_0..2, opacity, scale_0..2, rot_0..3.
/// Optional: f_rest_* (9, 24 or 45 of them for SH degree 1, 2, 3) and `tamper_attr`
/// (defaults to 0). Normals and any other vertex properties are skipped. Other elements
/// with fixed-size properties may appear before or after the vertex element.
///
/// Throws ParseError (bad header), SchemaError (missing or mistyped property, SH degree
/// above 3) or TruncationError (short body).
GaussianScene loadPly(const std::filesystem::path &path);

/// Writes the scene as binary little-endian PLY with the property order
/// x,y,z,nx,ny,nz,f_dc_0..2,f_rest_*,opacity,scale_0..2,rot_0..3,tamper_attr.
/// Throws WriteError on I/O failure.
void savePly(const GaussianScene &scene, const std::filesystem::path &path);

} // namespace gsck

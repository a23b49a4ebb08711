// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <gsck/image.hpp>

#include <filesystem>

namespace gsck {

/// Reads an 8-bit grayscale PNG or a binary/ASCII PGM (P5/P2, maxval <= 255), chosen by
/// file magic. Color PNGs are converted to gray; 16-bit PNGs are reduced to 8 bits.
/// Throws ParseError on anything unreadable.
GrayImage readGray(const std::filesystem::path &path);

/// Writes an 8-bit grayscale PNG with pinned encoder settings (zlib level 6, no row
/// filtering) so identical pixels always produce identical bytes.
void writePng(const GrayImage &image, const std::filesystem::path &path);

/// Writes a binary PGM (P5).
void writePgm(const GrayImage &image, const std::filesystem::path &path);

/// Raw float grid: 16-byte header {"GSCK", width u32, height u32, reserved u32}, then
/// width*height little-endian float32 values, row-major.
void writeRawGrid(const ScalarImage &image, const std::filesystem::path &path);
ScalarImage readRawGrid(const std::filesystem::path &path);

} // namespace gsck

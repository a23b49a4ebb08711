// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/errors.hpp>
#include <gsck/image_io.hpp>

#include <png.h>

#include <array>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace gsck {

namespace {

struct FileCloser {
    void
    operator()(std::FILE *f) const {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

GrayImage
readPng(const std::filesystem::path &path) {
    const std::string where = path.string();
    FilePtr fp(std::fopen(where.c_str(), "rb"));
    if (!fp) {
        throw ParseError(where + ": cannot open image");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) {
        throw ParseError(where + ": libpng initialization failed");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ParseError(where + ": libpng initialization failed");
    }

    GrayImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError(where + ": corrupt PNG");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const auto colorType = png_get_color_type(png, info);
    const auto bitDepth  = png_get_bit_depth(png, info);
    if (bitDepth == 16) {
        png_set_strip_16(png);
    }
    if (colorType == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (colorType == PNG_COLOR_TYPE_GRAY && bitDepth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (colorType & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(png);
    }
    if (colorType == PNG_COLOR_TYPE_RGB || colorType == PNG_COLOR_TYPE_RGB_ALPHA ||
        colorType == PNG_COLOR_TYPE_PALETTE) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);

    img.width  = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != static_cast<png_size_t>(img.width)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError(where + ": unsupported PNG pixel layout");
    }
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        rows[static_cast<std::size_t>(y)] = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// Reads one whitespace-delimited PNM header token, skipping '#' comments.
std::string
pnmToken(std::istream &in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) {
                break;
            }
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

GrayImage
readPgm(const std::filesystem::path &path) {
    const std::string where = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(where + ": cannot open image");
    }
    const std::string magic = pnmToken(in);
    if (magic != "P5" && magic != "P2") {
        throw ParseError(where + ": not a PGM file");
    }
    int w = 0, h = 0, maxval = 0;
    try {
        w      = std::stoi(pnmToken(in));
        h      = std::stoi(pnmToken(in));
        maxval = std::stoi(pnmToken(in));
    } catch (const std::exception &) {
        throw ParseError(where + ": malformed PGM header");
    }
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255) {
        throw ParseError(where + ": unsupported PGM dimensions or maxval");
    }
    GrayImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
    if (magic == "P5") {
        in.read(reinterpret_cast<char *>(img.pixels.data()),
                static_cast<std::streamsize>(img.pixels.size()));
        if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
            throw ParseError(where + ": truncated PGM data");
        }
    } else {
        for (auto &px : img.pixels) {
            const std::string tok = pnmToken(in);
            if (tok.empty()) {
                throw ParseError(where + ": truncated PGM data");
            }
            px = static_cast<std::uint8_t>(std::stoi(tok));
        }
    }
    if (maxval != 255) {
        for (auto &px : img.pixels) {
            px = static_cast<std::uint8_t>((px * 255 + maxval / 2) / maxval);
        }
    }
    return img;
}

void
putU32(std::vector<unsigned char> &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
    }
}

std::uint32_t
getU32(const unsigned char *p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

} // namespace

GrayImage
readGray(const std::filesystem::path &path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) {
        throw ParseError(path.string() + ": cannot open image");
    }
    std::array<unsigned char, 8> sig{};
    probe.read(reinterpret_cast<char *>(sig.data()), sig.size());
    if (probe.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0) {
        return readPng(path);
    }
    if (probe.gcount() >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) {
        return readPgm(path);
    }
    throw ParseError(path.string() + ": unrecognized image format (expected PNG or PGM)");
}

void
writePng(const GrayImage &image, const std::filesystem::path &path) {
    const std::string where = path.string();
    FilePtr fp(std::fopen(where.c_str(), "wb"));
    if (!fp) {
        throw WriteError(where + ": cannot open for writing");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) {
        throw WriteError(where + ": libpng initialization failed");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw WriteError(where + ": libpng initialization failed");
    }
    std::vector<png_const_bytep> rows(static_cast<std::size_t>(image.height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw WriteError(where + ": PNG encoding failed");
    }
    png_init_io(png, fp.get());
    png_set_compression_level(png, 6);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        rows[static_cast<std::size_t>(y)] =
            image.pixels.data() + static_cast<std::size_t>(y) * image.width;
    }
    png_write_rows(png, const_cast<png_bytepp>(rows.data()), static_cast<png_uint_32>(image.height));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(fp.get()) != 0) {
        throw WriteError(where + ": write failed");
    }
}

void
writePgm(const GrayImage &image, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw WriteError(path.string() + ": cannot open for writing");
    }
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char *>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) {
        throw WriteError(path.string() + ": write failed");
    }
}

void
writeRawGrid(const ScalarImage &image, const std::filesystem::path &path) {
    std::vector<unsigned char> buf;
    buf.reserve(16 + image.values.size() * 4);
    buf.insert(buf.end(), {'G', 'S', 'C', 'K'});
    putU32(buf, static_cast<std::uint32_t>(image.width));
    putU32(buf, static_cast<std::uint32_t>(image.height));
    putU32(buf, 0);
    for (double v : image.values) {
        putU32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw WriteError(path.string() + ": cannot open for writing");
    }
    out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw WriteError(path.string() + ": write failed");
    }
}

ScalarImage
readRawGrid(const std::filesystem::path &path) {
    const std::string where = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(where + ": cannot open raw grid");
    }
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 16 || std::memcmp(buf.data(), "GSCK", 4) != 0) {
        throw ParseError(where + ": missing GSCK header");
    }
    const auto w = getU32(buf.data() + 4);
    const auto h = getU32(buf.data() + 8);
    const std::size_t n = std::size_t(w) * h;
    if (buf.size() < 16 + 4 * n) {
        throw TruncationError(where + ": raw grid truncated");
    }
    ScalarImage img(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < n; ++i) {
        img.values[i] = std::bit_cast<float>(getU32(buf.data() + 16 + 4 * i));
    }
    return img;
}

} // namespace gsck

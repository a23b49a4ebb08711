// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#include <gsck/errors.hpp>
#include <gsck/ply.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gsck {

namespace {

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<PlyType>
parseType(const std::string &name) {
    static const std::map<std::string, PlyType> kTypes = {
        {"char", PlyType::Int8},     {"int8", PlyType::Int8},       {"uchar", PlyType::UInt8},
        {"uint8", PlyType::UInt8},   {"short", PlyType::Int16},     {"int16", PlyType::Int16},
        {"ushort", PlyType::UInt16}, {"uint16", PlyType::UInt16},   {"int", PlyType::Int32},
        {"int32", PlyType::Int32},   {"uint", PlyType::UInt32},     {"uint32", PlyType::UInt32},
        {"float", PlyType::Float32}, {"float32", PlyType::Float32}, {"double", PlyType::Float64},
        {"float64", PlyType::Float64},
    };
    const auto it = kTypes.find(name);
    if (it == kTypes.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t
typeSize(PlyType t) {
    switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    PlyType type;
    std::size_t offset;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
    std::size_t stride = 0;
    bool hasList       = false;
};

struct PlyHeader {
    std::vector<PlyElement> elements;
    std::size_t bodyOffset = 0;
};

PlyHeader
parseHeader(std::istream &in, const std::string &where) {
    PlyHeader header;
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
        throw ParseError(where + ": missing 'ply' magic");
    }
    bool sawFormat = false;
    bool sawEnd    = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword.empty() || keyword == "comment" || keyword == "obj_info") {
            continue;
        }
        if (keyword == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt != "binary_little_endian") {
                throw ParseError(where + ": unsupported PLY format '" + fmt +
                                 "' (only binary_little_endian)");
            }
            sawFormat = true;
        } else if (keyword == "element") {
            PlyElement el;
            long long count = -1;
            ls >> el.name >> count;
            if (el.name.empty() || ls.fail() || count < 0) {
                throw ParseError(where + ": malformed element line '" + line + "'");
            }
            el.count = static_cast<std::size_t>(count);
            header.elements.push_back(std::move(el));
        } else if (keyword == "property") {
            if (header.elements.empty()) {
                throw ParseError(where + ": property before any element");
            }
            auto &el = header.elements.back();
            std::string typeName;
            ls >> typeName;
            if (typeName == "list") {
                el.hasList = true;
                continue;
            }
            std::string propName;
            ls >> propName;
            const auto type = parseType(typeName);
            if (!type || propName.empty()) {
                throw ParseError(where + ": malformed property line '" + line + "'");
            }
            el.properties.push_back({propName, *type, el.stride});
            el.stride += typeSize(*type);
        } else if (keyword == "end_header") {
            sawEnd = true;
            break;
        } else {
            throw ParseError(where + ": unknown header keyword '" + keyword + "'");
        }
    }
    if (!sawEnd) {
        throw ParseError(where + ": missing end_header");
    }
    if (!sawFormat) {
        throw ParseError(where + ": missing format line");
    }
    header.bodyOffset = static_cast<std::size_t>(in.tellg());
    return header;
}

template <typename T>
T
loadLE(const unsigned char *p) {
    T value;
    std::memcpy(&value, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        auto *bytes = reinterpret_cast<unsigned char *>(&value);
        std::reverse(bytes, bytes + sizeof(T));
    }
    return value;
}

template <typename T>
void
storeLE(std::vector<unsigned char> &out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes, bytes + sizeof(T));
    }
    out.insert(out.end(), bytes, bytes + sizeof(T));
}

int
shDegreeFromRestCount(std::size_t restCount, const std::string &where) {
    for (int deg = 0; deg <= kMaxShDegree; ++deg) {
        if (restCount == static_cast<std::size_t>(3 * (shCoeffsPerChannel(deg) - 1))) {
            return deg;
        }
    }
    throw SchemaError(where + ": " + std::to_string(restCount) +
                      " f_rest_* properties do not match SH degree 0..3");
}

} // namespace

GaussianScene
loadPly(const std::filesystem::path &path) {
    const std::string where = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(where + ": cannot open file");
    }
    const PlyHeader header = parseHeader(in, where);

    std::size_t skipBytes   = 0;
    const PlyElement *vertex = nullptr;
    for (const auto &el : header.elements) {
        if (el.name == "vertex") {
            vertex = &el;
            break;
        }
        if (el.hasList) {
            throw SchemaError(where + ": list properties in element '" + el.name +
                              "' preceding vertex are not supported");
        }
        skipBytes += el.count * el.stride;
    }
    if (vertex == nullptr) {
        throw SchemaError(where + ": no vertex element");
    }
    if (vertex->hasList) {
        throw SchemaError(where + ": vertex element has list properties");
    }

    std::map<std::string, const PlyProperty *> byName;
    for (const auto &p : vertex->properties) {
        byName[p.name] = &p;
    }
    auto floatProp = [&](const std::string &name, bool required) -> const PlyProperty * {
        const auto it = byName.find(name);
        if (it == byName.end()) {
            if (required) {
                throw SchemaError(where + ": missing required property '" + name + "'");
            }
            return nullptr;
        }
        if (it->second->type != PlyType::Float32) {
            throw SchemaError(where + ": property '" + name + "' must be float32");
        }
        return it->second;
    };

    const char *requiredNames[] = {"x",       "y",       "z",       "f_dc_0", "f_dc_1",
                                   "f_dc_2",  "opacity", "scale_0", "scale_1", "scale_2",
                                   "rot_0",   "rot_1",   "rot_2",   "rot_3"};
    std::map<std::string, const PlyProperty *> req;
    for (const char *name : requiredNames) {
        req[name] = floatProp(name, true);
    }

    std::size_t restCount = 0;
    while (byName.count("f_rest_" + std::to_string(restCount)) != 0) {
        ++restCount;
    }
    const int degree = shDegreeFromRestCount(restCount, where);
    std::vector<const PlyProperty *> rest;
    for (std::size_t k = 0; k < restCount; ++k) {
        rest.push_back(floatProp("f_rest_" + std::to_string(k), true));
    }
    const PlyProperty *tamperProp = floatProp("tamper_attr", false);

    const std::size_t n     = vertex->count;
    const std::size_t bytes = n * vertex->stride;
    in.seekg(static_cast<std::streamoff>(header.bodyOffset + skipBytes));
    std::vector<unsigned char> body(bytes);
    if (bytes > 0) {
        in.read(reinterpret_cast<char *>(body.data()), static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(in.gcount()) != bytes) {
            throw TruncationError(where + ": body truncated, expected " + std::to_string(bytes) +
                                  " vertex bytes, got " + std::to_string(in.gcount()));
        }
    }

    GaussianScene scene;
    scene.shDegree = degree;
    scene.resize(n);
    const int coeffs = shCoeffsPerChannel(degree);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char *row = body.data() + i * vertex->stride;
        auto get = [row](const PlyProperty *p) { return loadLE<float>(row + p->offset); };
        scene.positions[i]     = {get(req["x"]), get(req["y"]), get(req["z"])};
        scene.logScales[i]     = {get(req["scale_0"]), get(req["scale_1"]), get(req["scale_2"])};
        scene.rotations[i]     = {get(req["rot_0"]), get(req["rot_1"]), get(req["rot_2"]),
                                  get(req["rot_3"])};
        scene.opacityLogits[i] = get(req["opacity"]);
        scene.tamper[i]        = tamperProp != nullptr ? get(tamperProp) : 0.0f;
        auto shOut             = scene.shCoeffs(i);
        shOut[0]               = get(req["f_dc_0"]);
        shOut[1]               = get(req["f_dc_1"]);
        shOut[2]               = get(req["f_dc_2"]);
        // f_rest is channel-major: all of red's higher coefficients, then green, then blue.
        for (int c = 0; c < 3; ++c) {
            for (int k = 1; k < coeffs; ++k) {
                shOut[3 * k + c] = get(rest[c * (coeffs - 1) + (k - 1)]);
            }
        }
    }
    scene.normalizeRotations();
    return scene;
}

void
savePly(const GaussianScene &scene, const std::filesystem::path &path) {
    scene.validate();
    const std::size_t n  = scene.size();
    const int coeffs     = shCoeffsPerChannel(scene.shDegree);
    const int restCount  = 3 * (coeffs - 1);

    std::ostringstream hdr;
    hdr << "ply\nformat binary_little_endian 1.0\n";
    hdr << "element vertex " << n << "\n";
    for (const char *name : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"}) {
        hdr << "property float " << name << "\n";
    }
    for (int k = 0; k < restCount; ++k) {
        hdr << "property float f_rest_" << k << "\n";
    }
    for (const char *name : {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1",
                             "rot_2", "rot_3", "tamper_attr"}) {
        hdr << "property float " << name << "\n";
    }
    hdr << "end_header\n";

    const std::size_t floatsPerRow = 9 + static_cast<std::size_t>(restCount) + 9;
    std::vector<unsigned char> body;
    body.reserve(n * floatsPerRow * sizeof(float));
    for (std::size_t i = 0; i < n; ++i) {
        const auto &p = scene.positions[i];
        for (float v : p) {
            storeLE(body, v);
        }
        for (int k = 0; k < 3; ++k) {
            storeLE(body, 0.0f);
        }
        const auto shIn = scene.shCoeffs(i);
        for (int c = 0; c < 3; ++c) {
            storeLE(body, shIn[c]);
        }
        for (int c = 0; c < 3; ++c) {
            for (int k = 1; k < coeffs; ++k) {
                storeLE(body, shIn[3 * k + c]);
            }
        }
        storeLE(body, scene.opacityLogits[i]);
        for (float v : scene.logScales[i]) {
            storeLE(body, v);
        }
        for (float v : scene.rotations[i]) {
            storeLE(body, v);
        }
        storeLE(body, scene.tamper[i]);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw WriteError(path.string() + ": cannot open for writing");
    }
    const std::string h = hdr.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(reinterpret_cast<const char *>(body.data()), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out) {
        throw WriteError(path.string() + ": write failed");
    }
}

} // namespace gsck

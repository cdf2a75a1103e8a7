#pragma once

#include <cstring>

#include "m4pipe/binio.hpp"
#include "m4pipe/tensor.hpp"

// Shared 36-byte header prefix (magic, version, dims, origin, pitch) used by
// the M4RT and M4SP formats. Internal to the library.

namespace m4::detail {

inline void write_grid_header(ByteWriter& w, const char magic[4], const GridGeometry& g) {
    w.bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(magic), 4));
    w.u16le(1);  // version
    for (int a = 0; a < 3; ++a) {
        if (g.dims[a] > 0xffff) throw InvalidArgument("grid dims exceed u16 header field");
        w.u16le(static_cast<std::uint16_t>(g.dims[a]));
    }
    for (int a = 0; a < 3; ++a) w.f32le(g.origin[a]);
    for (int a = 0; a < 3; ++a) w.f32le(g.pitch[a]);
}

inline GridGeometry read_grid_header(ByteReader& r, const char magic[4], const char* what) {
    const auto m = r.bytes(4, "magic");
    if (std::memcmp(m.data(), magic, 4) != 0)
        throw CorruptData(std::string("bad magic for ") + what, 0);
    const std::uint16_t version = r.u16le("version");
    if (version != 1) throw CorruptData(std::string("unsupported version for ") + what, 4);
    GridGeometry g;
    for (int a = 0; a < 3; ++a) g.dims[a] = r.u16le("dims");
    for (int a = 0; a < 3; ++a) g.origin[a] = r.f32le("origin");
    for (int a = 0; a < 3; ++a) g.pitch[a] = r.f32le("pitch");
    g.validate();
    return g;
}

}  // namespace m4::detail

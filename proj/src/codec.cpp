#include "m4pipe/codec.hpp"

#include <zlib.h>

#include <cmath>
#include <limits>

#include "grid_header.hpp"

namespace m4 {

namespace {
constexpr char kM4spMagic[4] = {'M', '4', 'S', 'P'};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::size_t count_nonzero(const RadarTensor& t) {
    std::size_t n = 0;
    for (float v : t.values())
        if (v != 0.0f) ++n;
    return n;
}
}  // namespace

std::size_t encoded_size(const RadarTensor& t) {
    return kM4spHeaderSize + kM4spRecordSize * count_nonzero(t);
}

std::vector<std::uint8_t> encode(const RadarTensor& t) {
    const GridGeometry& g = t.geometry();
    for (int a = 0; a < 3; ++a)
        if (g.dims[a] > 0xffff)
            throw InvalidArgument("encode: dims exceed the u16 index range of M4SP");

    const std::size_t nnz = count_nonzero(t);
    if (nnz > std::numeric_limits<std::uint32_t>::max())
        throw InvalidArgument("encode: record count exceeds u32");

    ByteWriter w;
    detail::write_grid_header(w, kM4spMagic, g);
    w.u32le(static_cast<std::uint32_t>(nnz));
    const std::size_t checksum_pos = w.size();
    w.u32le(0);  // checksum patched below
    w.zeros(kM4spHeaderSize - w.size());

    // Records in ascending linear index; the value layout already iterates
    // that way, so a single pass is canonical.
    const float* v = t.values().data();
    std::size_t lin = 0;
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int k = 0; k < g.dims[2]; ++k, ++lin) {
                if (v[lin] == 0.0f) continue;
                w.u16le(static_cast<std::uint16_t>(i));
                w.u16le(static_cast<std::uint16_t>(j));
                w.u16le(static_cast<std::uint16_t>(k));
                w.f32le(v[lin]);
            }

    auto bytes = w.take();
    const std::uint32_t crc =
        crc32_of(std::span<const std::uint8_t>(bytes).subspan(kM4spHeaderSize));
    for (int i = 0; i < 4; ++i)
        bytes[checksum_pos + static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(crc >> (8 * i));
    return bytes;
}

RadarTensor decode(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const GridGeometry g = detail::read_grid_header(r, kM4spMagic, "M4SP");
    const std::uint32_t count = r.u32le("record count");
    const std::uint32_t stored_crc = r.u32le("checksum");
    r.skip(kM4spHeaderSize - r.offset(), "header padding");

    const std::size_t payload_size = static_cast<std::size_t>(count) * kM4spRecordSize;
    if (r.remaining() != payload_size)
        throw CorruptData("M4SP payload size does not match record count", r.offset());
    const std::uint32_t actual_crc = crc32_of(bytes.subspan(kM4spHeaderSize));
    if (actual_crc != stored_crc)
        throw CorruptData("M4SP payload checksum mismatch", kM4spHeaderSize);

    std::vector<float> values(g.num_voxels(), 0.0f);
    std::int64_t prev_lin = -1;
    for (std::uint32_t n = 0; n < count; ++n) {
        const std::size_t record_offset = r.offset();
        const int i = r.u16le("idx");
        const int j = r.u16le("idx");
        const int k = r.u16le("idx");
        const float intensity = r.f32le("intensity");
        if (!g.in_range(i, j, k))
            throw CorruptData("M4SP record index out of range", record_offset);
        const std::int64_t lin = static_cast<std::int64_t>(g.linear_index(i, j, k));
        if (lin <= prev_lin)
            throw CorruptData("M4SP records not strictly increasing", record_offset);
        if (!std::isfinite(intensity) || intensity <= 0.0f)
            throw CorruptData("M4SP record intensity must be finite and positive",
                              record_offset + 6);
        prev_lin = lin;
        values[static_cast<std::size_t>(lin)] = intensity;
    }
    return RadarTensor(g, std::move(values));
}

double compression_ratio(const RadarTensor& t) {
    const double dense = static_cast<double>(t.geometry().num_voxels()) * sizeof(float);
    return dense / static_cast<double>(encoded_size(t));
}

}  // namespace m4

#include "m4pipe/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "grid_header.hpp"
#include "m4pipe/binio.hpp"

namespace m4 {

void GridGeometry::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] <= 0) throw InvalidArgument("GridGeometry: dims must be positive");
        if (!(pitch[a] > 0) || !std::isfinite(pitch[a]))
            throw InvalidArgument("GridGeometry: pitch must be positive and finite");
        if (!std::isfinite(origin[a])) throw InvalidArgument("GridGeometry: origin must be finite");
    }
}

Vec3 GridGeometry::voxel_to_world(int i, int j, int k) const {
    if (!in_range(i, j, k)) throw Error("voxel_to_world: index out of range");
    return {static_cast<double>(origin[0]) + static_cast<double>(i) * pitch[0],
            static_cast<double>(origin[1]) + static_cast<double>(j) * pitch[1],
            static_cast<double>(origin[2]) + static_cast<double>(k) * pitch[2]};
}

std::array<int, 3> GridGeometry::world_to_voxel(const Vec3& p) const {
    if (!p.finite()) throw InvalidArgument("world_to_voxel: non-finite point");
    auto idx = [](double v, float o, float s) {
        return static_cast<int>(std::lround((v - static_cast<double>(o)) / static_cast<double>(s)));
    };
    return {idx(p.x, origin[0], pitch[0]), idx(p.y, origin[1], pitch[1]),
            idx(p.z, origin[2], pitch[2])};
}

GridGeometry default_grid() {
    GridGeometry g;
    g.dims = {121, 111, 31};
    g.origin = {-3.0f, 0.25f, 0.0f};
    g.pitch = {0.05f, 0.05f, 0.08f};
    return g;
}

RadarTensor::RadarTensor(GridGeometry g) : geom_(g) {
    geom_.validate();
    values_.assign(geom_.num_voxels(), 0.0f);
}

RadarTensor::RadarTensor(GridGeometry g, std::vector<float> values)
    : geom_(g), values_(std::move(values)) {
    geom_.validate();
    if (values_.size() != geom_.num_voxels())
        throw InvalidArgument("RadarTensor: value count does not match dims");
    for (float v : values_) {
        if (!std::isfinite(v) || v < 0)
            throw InvalidArgument("RadarTensor: values must be finite and non-negative");
    }
}

float RadarTensor::at(int i, int j, int k) const {
    if (!geom_.in_range(i, j, k)) throw Error("RadarTensor::at: index out of range");
    return values_[geom_.linear_index(i, j, k)];
}

void RadarTensor::set(int i, int j, int k, float v) {
    if (!geom_.in_range(i, j, k)) throw Error("RadarTensor::set: index out of range");
    if (!std::isfinite(v) || v < 0)
        throw InvalidArgument("RadarTensor::set: value must be finite and non-negative");
    values_[geom_.linear_index(i, j, k)] = v;
}

double RadarTensor::total_intensity() const {
    double s = 0;
    for (float v : values_) s += v;
    return s;
}

FrameStack::FrameStack(std::vector<RadarTensor> frames) : frames_(std::move(frames)) {
    if (frames_.empty()) throw InvalidArgument("FrameStack: needs at least one frame");
    for (const auto& f : frames_) {
        if (!(f.geometry() == frames_.front().geometry()))
            throw InvalidArgument("FrameStack: frames must share one geometry");
    }
}

BevMap bev_collapse(const FrameStack& s) {
    const GridGeometry& g = s.geometry();
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const int T = static_cast<int>(s.count());
    const std::size_t C = static_cast<std::size_t>(nz) * static_cast<std::size_t>(T);

    BevMap out;
    out.source_geometry = g;
    out.frame_count = T;
    out.channels.resize(static_cast<std::size_t>(nx) * ny * C);

    // Channel c = k + t*nz; within one (i, j) cell a frame's z-slab is
    // contiguous in both layouts, so copy slab by slab.
    for (int t = 0; t < T; ++t) {
        const float* src = s.frame(static_cast<std::size_t>(t)).values().data();
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                const std::size_t cell = (static_cast<std::size_t>(i) * ny + j);
                std::memcpy(out.channels.data() + cell * C + static_cast<std::size_t>(t) * nz,
                            src + cell * nz, sizeof(float) * static_cast<std::size_t>(nz));
            }
        }
    }
    return out;
}

FrameStack bev_expand(const BevMap& m) {
    const GridGeometry& g = m.source_geometry;
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const int T = m.frame_count;
    const std::size_t C = static_cast<std::size_t>(nz) * static_cast<std::size_t>(T);
    if (m.channels.size() != static_cast<std::size_t>(nx) * ny * C)
        throw InvalidArgument("bev_expand: channel buffer does not match geometry");

    std::vector<RadarTensor> frames;
    frames.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        std::vector<float> values(g.num_voxels());
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const std::size_t cell = (static_cast<std::size_t>(i) * ny + j);
                std::memcpy(values.data() + cell * nz,
                            m.channels.data() + cell * C + static_cast<std::size_t>(t) * nz,
                            sizeof(float) * static_cast<std::size_t>(nz));
            }
        frames.emplace_back(g, std::move(values));
    }
    return FrameStack(std::move(frames));
}

FrameStack crop_roi(const FrameStack& s, double center_x, double center_y,
                    std::array<int, 3> roi) {
    if (!std::isfinite(center_x) || !std::isfinite(center_y))
        throw InvalidArgument("crop_roi: non-finite center");
    const GridGeometry& g = s.geometry();
    for (int a = 0; a < 3; ++a)
        if (roi[a] <= 0) throw InvalidArgument("crop_roi: roi dims must be positive");
    if (roi[2] > g.dims[2]) throw InvalidArgument("crop_roi: roi z extent exceeds grid");

    const auto center = g.world_to_voxel({center_x, center_y, 0.0});
    const int i0 = center[0] - roi[0] / 2;
    const int j0 = center[1] - roi[1] / 2;
    const int k0 = (g.dims[2] - roi[2]) / 2;

    GridGeometry cg;
    cg.dims = roi;
    cg.pitch = g.pitch;
    cg.origin = {static_cast<float>(g.origin[0] + static_cast<double>(i0) * g.pitch[0]),
                 static_cast<float>(g.origin[1] + static_cast<double>(j0) * g.pitch[1]),
                 static_cast<float>(g.origin[2] + static_cast<double>(k0) * g.pitch[2])};

    std::vector<RadarTensor> cropped;
    cropped.reserve(s.count());
    for (std::size_t t = 0; t < s.count(); ++t) {
        const RadarTensor& src = s.frame(t);
        std::vector<float> values(cg.num_voxels(), 0.0f);
        for (int i = 0; i < roi[0]; ++i) {
            const int si = i0 + i;
            if (si < 0 || si >= g.dims[0]) continue;
            for (int j = 0; j < roi[1]; ++j) {
                const int sj = j0 + j;
                if (sj < 0 || sj >= g.dims[1]) continue;
                for (int k = 0; k < roi[2]; ++k) {
                    const int sk = k0 + k;
                    if (sk < 0 || sk >= g.dims[2]) continue;
                    values[cg.linear_index(i, j, k)] = src.at(si, sj, sk);
                }
            }
        }
        cropped.emplace_back(cg, std::move(values));
    }
    return FrameStack(std::move(cropped));
}

FrameStack stack_window(std::span<const RadarTensor> frames, std::size_t t, std::size_t T) {
    if (frames.empty()) throw InvalidArgument("stack_window: empty frame sequence");
    if (T == 0) throw InvalidArgument("stack_window: window must be positive");
    if (t >= frames.size()) throw Error("stack_window: frame index out of range");

    std::vector<RadarTensor> out;
    out.reserve(T);
    for (std::size_t s = 0; s < T; ++s) {
        const std::int64_t idx = static_cast<std::int64_t>(t) - static_cast<std::int64_t>(T) + 1 +
                                 static_cast<std::int64_t>(s);
        out.push_back(frames[static_cast<std::size_t>(std::max<std::int64_t>(idx, 0))]);
    }
    return FrameStack(std::move(out));
}

namespace {
constexpr std::size_t kM4rtHeaderSize = 64;
constexpr char kM4rtMagic[4] = {'M', '4', 'R', 'T'};
}  // namespace

std::vector<std::uint8_t> write_m4rt(const RadarTensor& t) {
    ByteWriter w;
    detail::write_grid_header(w, kM4rtMagic, t.geometry());
    w.zeros(kM4rtHeaderSize - w.size());
    for (float v : t.values()) w.f32le(v);
    return w.take();
}

RadarTensor read_m4rt(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const GridGeometry g = detail::read_grid_header(r, kM4rtMagic, "M4RT");
    r.skip(kM4rtHeaderSize - r.offset(), "header padding");
    const std::size_t n = g.num_voxels();
    if (r.remaining() != n * 4)
        throw CorruptData("M4RT payload size does not match dims", r.offset());
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = r.f32le("value");
    return RadarTensor(g, std::move(values));
}

void write_m4rt_file(const RadarTensor& t, const std::filesystem::path& path) {
    const auto bytes = write_m4rt(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

RadarTensor read_m4rt_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return read_m4rt(bytes);
}

}  // namespace m4

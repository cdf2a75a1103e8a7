#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "m4pipe/geometry.hpp"

namespace m4 {

/// Calibrated voxel grid. Origin is the world-space center of voxel (0,0,0).
/// Origin and pitch are kept at f32 precision on purpose: that is the file
/// precision, so in-memory grids round-trip bit-exactly through M4RT/M4SP.
struct GridGeometry {
    std::array<int, 3> dims{};            // (nx, ny, nz)
    std::array<float, 3> origin{};        // meters
    std::array<float, 3> pitch{};         // meters per voxel

    void validate() const;

    std::size_t num_voxels() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }

    // Fixed layout: x outermost, z innermost. Keeping this pinned makes the
    // codec and store bytes reproducible across implementations.
    std::size_t linear_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * static_cast<std::size_t>(dims[1]) +
                static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(dims[2]) +
               static_cast<std::size_t>(k);
    }

    bool in_range(int i, int j, int k) const {
        return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
    }

    Vec3 voxel_to_world(int i, int j, int k) const;

    /// Nearest voxel index to a world point (may be out of range).
    std::array<int, 3> world_to_voxel(const Vec3& p) const;

    bool operator==(const GridGeometry&) const = default;
};

/// The default capture grid: x in [-3, 3] m and y in [0.25, 5.75] m at 5 cm
/// pitch, z in [0, 2.4] m at 8 cm pitch, giving dims (121, 111, 31).
GridGeometry default_grid();

/// Dense 3D intensity volume (linear power, >= 0) over a GridGeometry.
class RadarTensor {
public:
    explicit RadarTensor(GridGeometry g);                          // zero-filled
    RadarTensor(GridGeometry g, std::vector<float> values);       // validates

    const GridGeometry& geometry() const { return geom_; }
    std::span<const float> values() const { return values_; }

    float at(int i, int j, int k) const;
    void set(int i, int j, int k, float v);

    double total_intensity() const;

    bool operator==(const RadarTensor& o) const {
        return geom_ == o.geom_ && values_ == o.values_;
    }

private:
    GridGeometry geom_;
    std::vector<float> values_;
};

struct RadarPoint {
    Vec3 position;      // meters, world frame
    float intensity = 0;
};

struct RadarPointCloud {
    std::vector<RadarPoint> points;

    std::size_t size() const { return points.size(); }
};

/// T consecutive radar tensors sharing one geometry (temporal context window).
class FrameStack {
public:
    explicit FrameStack(std::vector<RadarTensor> frames);

    std::size_t count() const { return frames_.size(); }
    const RadarTensor& frame(std::size_t t) const { return frames_[t]; }
    const GridGeometry& geometry() const { return frames_.front().geometry(); }

private:
    std::vector<RadarTensor> frames_;
};

/// Bird's-eye-view tensor: (nx, ny) cells with nz*T channels, channel
/// c = k + t*nz holding frame t's z-slab k. Pure rearrangement, lossless.
struct BevMap {
    GridGeometry source_geometry;  // geometry of the stacked frames
    int frame_count = 0;
    std::vector<float> channels;   // layout [(i*ny + j)*C + c], C = nz*T

    int channel_count() const { return source_geometry.dims[2] * frame_count; }
    float at(int i, int j, int c) const {
        return channels[(static_cast<std::size_t>(i) * source_geometry.dims[1] + j) *
                            static_cast<std::size_t>(channel_count()) +
                        static_cast<std::size_t>(c)];
    }
};

BevMap bev_collapse(const FrameStack& s);

/// Inverse of bev_collapse; exists so the bijection is testable end to end.
FrameStack bev_expand(const BevMap& m);

/// Crop a fixed-size window from every frame, centered on the voxel nearest
/// to center_xy (z centered when roi_z < nz, full extent when equal).
/// Out-of-grid voxels are zero; the crop geometry keeps world coordinates
/// consistent with the source.
FrameStack crop_roi(const FrameStack& s, double center_x, double center_y,
                    std::array<int, 3> roi = {24, 24, 31});

/// Frames [t-T+1 .. t], repeating frame 0 for indices before the start.
FrameStack stack_window(std::span<const RadarTensor> frames, std::size_t t, std::size_t T = 4);

// Dense-tensor debug dump (M4RT, docs/formats.md). Used by the CLI `unpack`.
std::vector<std::uint8_t> write_m4rt(const RadarTensor& t);
RadarTensor read_m4rt(std::span<const std::uint8_t> bytes);
void write_m4rt_file(const RadarTensor& t, const std::filesystem::path& path);
RadarTensor read_m4rt_file(const std::filesystem::path& path);

}  // namespace m4

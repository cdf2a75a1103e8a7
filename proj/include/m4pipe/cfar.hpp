#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "m4pipe/tensor.hpp"

namespace m4 {

/// 3D cell-averaging CFAR. The training ring is the train window minus the
/// guard window (guard always contains the cell under test); cells outside
/// the grid are excluded from the mean.
struct CfarConfig {
    std::array<int, 3> guard{2, 2, 1};    // half-extent per axis, voxels
    std::array<int, 3> train{5, 5, 2};    // half-extent per axis, voxels
    double threshold_factor = 3.0;
    double min_intensity = 0.0;
    std::size_t max_points = 1000;

    void validate() const;
};

/// Detections sorted by intensity descending (ties broken by ascending
/// linear voxel index), truncated to max_points. Point positions are voxel
/// centers in world coordinates.
///
/// Detection rule for cell value v with training mean m:
///   m > 0:  v >= threshold_factor * m  and  v >= min_intensity
///   m == 0: v > 0                      and  v >= min_intensity
/// The zero-mean rule keeps isolated peaks in empty space deterministic.
RadarPointCloud cfar_detect(const RadarTensor& t, const CfarConfig& c);

/// Single-threaded reference producing bit-identical output; kept for tests
/// and the kernel benchmark.
RadarPointCloud cfar_detect_serial(const RadarTensor& t, const CfarConfig& c);

/// Fixed-size layout used for batching: the n highest-intensity points
/// followed by all-zero entries. `count` is the number of real points.
struct PaddedPoints {
    std::vector<RadarPoint> points;
    std::size_t count = 0;
};

PaddedPoints pad_points(const RadarPointCloud& p, std::size_t n = 1000);

/// Fraction of points within `radius` of the nearest body joint; 0 for an
/// empty cloud.
double effective_rpc_ratio(const RadarPointCloud& p, std::span<const Vec3> body_joints,
                           double radius = 0.5);

}  // namespace m4

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "m4pipe/geometry.hpp"

namespace m4 {

struct MarkerSample {
    double time_s = 0;
    Vec3 position;      // meters
    bool valid = true;  // false while the marker is occluded
};

/// Head-top marker trajectory from the MoCap system (default 100 Hz).
struct MarkerTrack {
    double rate_hz = 100.0;
    std::vector<MarkerSample> samples;

    void validate() const;
};

/// First sample whose displacement from the reference pose (the first valid
/// sample) strictly exceeds `threshold_m`. Invalid samples are skipped.
/// Default threshold 0.10 m; exactly 0.10 m does NOT trigger.
std::size_t detect_trigger(const MarkerTrack& track, double threshold_m = 0.10);

/// sensor frame j -> nearest MoCap frame. Half-way ties round up.
struct FrameAlignment {
    std::vector<std::int64_t> mocap_index;
    std::vector<bool> valid;  // false when the index runs past mocap_length
};

/// Maps n_sensor_frames sensor frames (at sensor_rate, starting at MoCap
/// frame mocap_start) to MoCap indices round(mocap_start + j * ratio).
/// mocap_length == 0 disables the range check (all entries valid).
FrameAlignment align_frames(double mocap_rate_hz, double sensor_rate_hz,
                            std::int64_t mocap_start, std::size_t n_sensor_frames,
                            std::size_t mocap_length = 0);

// CSV persistence: header "time_s,x,y,z,valid", one sample per line.
MarkerTrack read_track_csv(const std::filesystem::path& path, double rate_hz = 100.0);
void write_track_csv(const MarkerTrack& track, const std::filesystem::path& path);

}  // namespace m4

#include "m4pipe/sync.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace m4 {

void MarkerTrack::validate() const {
    if (!(rate_hz > 0)) throw InvalidArgument("MarkerTrack: rate must be > 0");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].time_s > samples[i - 1].time_s))
            throw InvalidArgument("MarkerTrack: timestamps must be strictly increasing");
    }
    for (const auto& s : samples)
        if (!s.position.finite() && s.valid)
            throw InvalidArgument("MarkerTrack: valid samples must be finite");
}

std::size_t detect_trigger(const MarkerTrack& track, double threshold_m) {
    track.validate();
    if (!(threshold_m > 0)) throw InvalidArgument("detect_trigger: threshold must be > 0");

    std::size_t ref = track.samples.size();
    std::size_t valid_count = 0;
    for (std::size_t i = 0; i < track.samples.size(); ++i) {
        if (!track.samples[i].valid) continue;
        ++valid_count;
        if (ref == track.samples.size()) ref = i;
    }
    if (valid_count < 2)
        throw InsufficientData("detect_trigger: needs at least 2 valid samples");

    const Vec3 reference = track.samples[ref].position;
    for (std::size_t i = ref + 1; i < track.samples.size(); ++i) {
        if (!track.samples[i].valid) continue;
        if ((track.samples[i].position - reference).norm() > threshold_m) return i;
    }
    throw NoTrigger("detect_trigger: no displacement exceeds the threshold");
}

FrameAlignment align_frames(double mocap_rate_hz, double sensor_rate_hz,
                            std::int64_t mocap_start, std::size_t n_sensor_frames,
                            std::size_t mocap_length) {
    if (!(mocap_rate_hz > 0) || !(sensor_rate_hz > 0))
        throw InvalidArgument("align_frames: rates must be > 0");
    if (mocap_start < 0) throw InvalidArgument("align_frames: mocap_start must be >= 0");

    const double ratio = mocap_rate_hz / sensor_rate_hz;
    FrameAlignment out;
    out.mocap_index.reserve(n_sensor_frames);
    out.valid.reserve(n_sensor_frames);
    for (std::size_t j = 0; j < n_sensor_frames; ++j) {
        // Round half-up: ties at .5 go to the later MoCap frame.
        const std::int64_t idx = static_cast<std::int64_t>(
            std::floor(static_cast<double>(mocap_start) + static_cast<double>(j) * ratio + 0.5));
        out.mocap_index.push_back(idx);
        out.valid.push_back(mocap_length == 0 ||
                            idx < static_cast<std::int64_t>(mocap_length));
    }
    return out;
}

MarkerTrack read_track_csv(const std::filesystem::path& path, double rate_hz) {
    std::ifstream in(path);
    if (!in) throw IoError("read_track_csv: cannot open " + path.string());
    MarkerTrack track;
    track.rate_hz = rate_hz;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("time_s", 0) == 0) continue;  // header
        std::istringstream ss(line);
        MarkerSample s;
        char comma;
        int valid = 1;
        if (!(ss >> s.time_s >> comma >> s.position.x >> comma >> s.position.y >> comma >>
              s.position.z >> comma >> valid))
            throw CorruptData("read_track_csv: malformed line " + std::to_string(lineno) +
                              " in " + path.string());
        s.valid = valid != 0;
        track.samples.push_back(s);
    }
    track.validate();
    return track;
}

void write_track_csv(const MarkerTrack& track, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("write_track_csv: cannot open " + path.string());
    out << "time_s,x,y,z,valid\n";
    out.precision(12);
    for (const auto& s : track.samples)
        out << s.time_s << ',' << s.position.x << ',' << s.position.y << ',' << s.position.z
            << ',' << (s.valid ? 1 : 0) << '\n';
    if (!out) throw IoError("write_track_csv: write failed: " + path.string());
}

}  // namespace m4

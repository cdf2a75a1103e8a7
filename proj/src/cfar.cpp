#include "m4pipe/cfar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "m4pipe/threads.hpp"

namespace m4 {

void CfarConfig::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (guard[a] < 0) throw InvalidArgument("CfarConfig: guard must be non-negative");
        if (train[a] <= guard[a])
            throw InvalidArgument("CfarConfig: train window must exceed guard window per axis");
    }
    if (!(threshold_factor > 0)) throw InvalidArgument("CfarConfig: threshold_factor must be > 0");
    if (min_intensity < 0) throw InvalidArgument("CfarConfig: min_intensity must be >= 0");
    if (max_points < 1) throw InvalidArgument("CfarConfig: max_points must be >= 1");
}

namespace {

// Training mean around (i, j, k): train box minus guard box, in-grid cells
// only. Returns false when the clipped ring is empty.
bool training_mean(const RadarTensor& t, const CfarConfig& c, int i, int j, int k, double* mean) {
    const GridGeometry& g = t.geometry();
    const float* v = t.values().data();
    double sum = 0;
    std::size_t count = 0;
    for (int di = -c.train[0]; di <= c.train[0]; ++di) {
        const int si = i + di;
        if (si < 0 || si >= g.dims[0]) continue;
        for (int dj = -c.train[1]; dj <= c.train[1]; ++dj) {
            const int sj = j + dj;
            if (sj < 0 || sj >= g.dims[1]) continue;
            const bool ij_guarded = std::abs(di) <= c.guard[0] && std::abs(dj) <= c.guard[1];
            const std::size_t row = g.linear_index(si, sj, 0);
            for (int dk = -c.train[2]; dk <= c.train[2]; ++dk) {
                const int sk = k + dk;
                if (sk < 0 || sk >= g.dims[2]) continue;
                if (ij_guarded && std::abs(dk) <= c.guard[2])
                    continue;  // guard region (includes the cell under test)
                sum += v[row + static_cast<std::size_t>(sk)];
                ++count;
            }
        }
    }
    if (count == 0) return false;
    *mean = sum / static_cast<double>(count);
    return true;
}

bool is_detection(double value, double mean, const CfarConfig& c) {
    if (value < c.min_intensity) return false;
    if (mean > 0) return value >= c.threshold_factor * mean;
    return value > 0;
}

RadarPointCloud collect(const RadarTensor& t, const CfarConfig& c,
                        const std::vector<std::uint8_t>& detected) {
    const GridGeometry& g = t.geometry();
    RadarPointCloud out;
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int k = 0; k < g.dims[2]; ++k) {
                const std::size_t lin = g.linear_index(i, j, k);
                if (!detected[lin]) continue;
                out.points.push_back({g.voxel_to_world(i, j, k), t.values()[lin]});
            }
    // Intensity descending; the collect order above is ascending linear
    // index, so a stable sort yields the documented tie break.
    std::stable_sort(out.points.begin(), out.points.end(),
                     [](const RadarPoint& a, const RadarPoint& b) {
                         return a.intensity > b.intensity;
                     });
    if (out.points.size() > c.max_points) out.points.resize(c.max_points);
    return out;
}

// The corner cell has the smallest clipped ring; if even that is empty the
// window configuration cannot work on this grid.
void check_windows_fit(const RadarTensor& t, const CfarConfig& c) {
    double unused;
    if (!training_mean(t, c, 0, 0, 0, &unused))
        throw InvalidArgument("cfar_detect: training ring empty for configured windows");
}

}  // namespace

RadarPointCloud cfar_detect(const RadarTensor& t, const CfarConfig& c) {
    c.validate();
    check_windows_fit(t, c);
    const GridGeometry& g = t.geometry();
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];

    std::vector<std::uint8_t> detected(g.num_voxels(), 0);

#pragma omp parallel for num_threads(thread_count()) schedule(static) collapse(2)
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            for (int k = 0; k < nz; ++k) {
                const double value = t.values()[g.linear_index(i, j, k)];
                double mean = 0;
                if (!training_mean(t, c, i, j, k, &mean)) continue;
                if (is_detection(value, mean, c)) detected[g.linear_index(i, j, k)] = 1;
            }
        }
    }
    return collect(t, c, detected);
}

RadarPointCloud cfar_detect_serial(const RadarTensor& t, const CfarConfig& c) {
    c.validate();
    check_windows_fit(t, c);
    const GridGeometry& g = t.geometry();

    std::vector<std::uint8_t> detected(g.num_voxels(), 0);
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int k = 0; k < g.dims[2]; ++k) {
                const double value = t.values()[g.linear_index(i, j, k)];
                double mean = 0;
                if (!training_mean(t, c, i, j, k, &mean)) continue;
                if (is_detection(value, mean, c)) detected[g.linear_index(i, j, k)] = 1;
            }
    return collect(t, c, detected);
}

PaddedPoints pad_points(const RadarPointCloud& p, std::size_t n) {
    if (n < 1) throw InvalidArgument("pad_points: n must be >= 1");
    PaddedPoints out;
    std::vector<RadarPoint> sorted = p.points;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const RadarPoint& a, const RadarPoint& b) {
                         return a.intensity > b.intensity;
                     });
    out.count = std::min(sorted.size(), n);
    sorted.resize(out.count);
    sorted.resize(n);  // zero-fill the remainder
    out.points = std::move(sorted);
    return out;
}

double effective_rpc_ratio(const RadarPointCloud& p, std::span<const Vec3> body_joints,
                           double radius) {
    if (!(radius > 0)) throw InvalidArgument("effective_rpc_ratio: radius must be > 0");
    if (p.points.empty()) return 0.0;
    const double r2 = radius * radius;
    std::size_t near = 0;
    for (const auto& pt : p.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& j : body_joints) best = std::min(best, (pt.position - j).squared_norm());
        if (best <= r2) ++near;
    }
    return static_cast<double>(near) / static_cast<double>(p.points.size());
}

}  // namespace m4

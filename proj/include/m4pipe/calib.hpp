#pragma once

#include <span>
#include <vector>

#include "m4pipe/geometry.hpp"

namespace m4 {

struct CameraIntrinsics {
    double fx = 0, fy = 0;   // focal lengths, pixels
    double cx = 0, cy = 0;   // principal point, pixels
    int width = 0, height = 0;

    void validate() const;
};

struct Pixel {
    double u = 0, v = 0;
};

/// A 3D world point (Vicon frame) with its hand-annotated image location.
struct Correspondence {
    Vec3 world;
    Pixel pixel;
};

struct CalibrationResult {
    RigidTransform extrinsics;            // camera-from-world
    double mean_reprojection_error = 0;   // pixels
    std::vector<double> per_point_residuals;
};

/// Pinhole projection of a world point through extrinsics + intrinsics.
/// Throws InvalidArgument when the camera-frame depth is not positive.
Pixel project(const CameraIntrinsics& k, const RigidTransform& ext, const Vec3& p_world);

/// Perspective-n-Point from >= 6 non-coplanar correspondences: normalized
/// DLT initialization, projection onto SO(3), then Levenberg-Marquardt
/// refinement of the mean squared reprojection error (max 100 iterations,
/// gradient-norm stop 1e-10). Deterministic.
CalibrationResult solve_pnp(const CameraIntrinsics& k, std::span<const Correspondence> corr);

/// Vicon -> camera -> radar: inverse(cam_from_radar) applied after
/// cam_from_vicon.
Vec3 chain_vicon_to_radar(const RigidTransform& cam_from_vicon,
                          const RigidTransform& cam_from_radar, const Vec3& p_vicon);

/// Normalized detection-box triplet predicted by an image HMR model.
struct WeakPerspective {
    double s_hat = 0;                 // normalized scale (monotone in 1/depth)
    double u_hat = 0, v_hat = 0;      // crop coordinates in [-1, 1]
    double box_size = 0;              // pixels
    double box_cx = 0, box_cy = 0;    // pixels
};

/// Back-project a weak-perspective triplet to a camera-frame 3D position
/// using depth z = 2 f / (box_size * s_hat), with f = fx (fy used for the
/// y row when the intrinsics are anisotropic).
Vec3 weak_perspective_backproject(const CameraIntrinsics& k, const WeakPerspective& wp);

struct DepthImage {
    int width = 0, height = 0;
    std::vector<float> meters;  // row-major, 0 = invalid

    float at(int u, int v) const { return meters[static_cast<std::size_t>(v) * width + u]; }
};

/// Per-pixel pinhole back-projection; zero-depth pixels are skipped.
std::vector<Vec3> depth_backproject(const CameraIntrinsics& k, const DepthImage& depth);

/// Absolute orientation (rotation + translation, no scale) between matched
/// 3D point sets, for radar-frame targets given as 3D points. Needs >= 3
/// non-collinear pairs. Returns the transform mapping src into dst.
RigidTransform align_point_sets(std::span<const Vec3> src, std::span<const Vec3> dst);

}  // namespace m4

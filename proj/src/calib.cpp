#include "m4pipe/calib.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace m4 {

namespace {

Eigen::Matrix3d to_eigen(const Rot3& r) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = r(i, j);
    return m;
}

Rot3 from_eigen(const Eigen::Matrix3d& m) {
    Rot3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = m(i, j);
    return r;
}

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

// Nearest rotation matrix in the Frobenius sense.
Rot3 project_to_so3(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
        Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
        d(2, 2) = -1;
        r = svd.matrixU() * d * svd.matrixV().transpose();
    }
    return from_eigen(r);
}

void check_non_coplanar(std::span<const Correspondence> corr) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& c : corr) centroid += to_eigen(c.world);
    centroid /= static_cast<double>(corr.size());
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(corr.size()), 3);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        pts.row(i) = (to_eigen(corr[static_cast<std::size_t>(i)].world) - centroid).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(pts);
    const auto& s = svd.singularValues();
    if (s(2) <= 1e-6 * s(0))
        throw DegenerateGeometry("solve_pnp: world points are coplanar within tolerance");
}

// Normalized DLT estimate of camera-from-world. Pixels have already been
// mapped through K^-1 to normalized image coordinates.
RigidTransform dlt_pose(const std::vector<Eigen::Vector2d>& img,
                        const std::vector<Eigen::Vector3d>& world) {
    const std::size_t n = img.size();

    // Hartley normalization of both sides conditions the linear system.
    Eigen::Vector2d ic = Eigen::Vector2d::Zero();
    for (const auto& p : img) ic += p;
    ic /= static_cast<double>(n);
    double irms = 0;
    for (const auto& p : img) irms += (p - ic).squaredNorm();
    irms = std::sqrt(irms / static_cast<double>(n));
    const double iscale = irms > 1e-12 ? std::sqrt(2.0) / irms : 1.0;

    Eigen::Vector3d wc = Eigen::Vector3d::Zero();
    for (const auto& p : world) wc += p;
    wc /= static_cast<double>(n);
    double wrms = 0;
    for (const auto& p : world) wrms += (p - wc).squaredNorm();
    wrms = std::sqrt(wrms / static_cast<double>(n));
    const double wscale = wrms > 1e-12 ? std::sqrt(3.0) / wrms : 1.0;

    Eigen::MatrixXd a(2 * static_cast<Eigen::Index>(n), 12);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d p = (img[i] - ic) * iscale;
        const Eigen::Vector3d w = (world[i] - wc) * wscale;
        Eigen::RowVector4d wh;
        wh << w.transpose(), 1.0;
        const auto r = static_cast<Eigen::Index>(2 * i);
        a.row(r).setZero();
        a.block<1, 4>(r, 4) = -wh;
        a.block<1, 4>(r, 8) = p.y() * wh;
        a.row(r + 1).setZero();
        a.block<1, 4>(r + 1, 0) = wh;
        a.block<1, 4>(r + 1, 8) = -p.x() * wh;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const Eigen::VectorXd p = svd.matrixV().col(11);
    Eigen::Matrix<double, 3, 4> pt;
    pt << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8), p(9), p(10), p(11);

    // Undo the normalizations: x_norm = T x, X_norm = U X with
    // T = iscale * [I, -ic; 0, 1], U = wscale * [I, -wc; 0, 1/wscale].
    Eigen::Matrix3d t_inv = Eigen::Matrix3d::Identity() / iscale;
    t_inv(0, 2) = ic.x();
    t_inv(1, 2) = ic.y();
    t_inv(2, 2) = 1.0;
    Eigen::Matrix4d u = Eigen::Matrix4d::Identity() * wscale;
    u(0, 3) = -wscale * wc.x();
    u(1, 3) = -wscale * wc.y();
    u(2, 3) = -wscale * wc.z();
    u(3, 3) = 1.0;
    Eigen::Matrix<double, 3, 4> pose = t_inv * pt * u;

    // Fix the projective sign so depths come out positive for the majority.
    double depth_sign = 0;
    for (const auto& w : world) depth_sign += pose.block<1, 3>(2, 0).dot(w) + pose(2, 3);
    if (depth_sign < 0) pose = -pose;

    Eigen::Matrix3d m = pose.block<3, 3>(0, 0);
    Eigen::JacobiSVD<Eigen::Matrix3d> msvd(m);
    const double scale = 3.0 / msvd.singularValues().sum();
    const Rot3 r = project_to_so3(m);
    const Eigen::Vector3d t = pose.col(3) * scale;
    return {r, {t.x(), t.y(), t.z()}};
}

}  // namespace

void CameraIntrinsics::validate() const {
    if (!(fx > 0) || !(fy > 0)) throw InvalidArgument("CameraIntrinsics: focal lengths must be > 0");
    if (width <= 0 || height <= 0) throw InvalidArgument("CameraIntrinsics: image size must be > 0");
    if (!(cx > 0) || cx >= width || !(cy > 0) || cy >= height)
        throw InvalidArgument("CameraIntrinsics: principal point outside image");
}

Pixel project(const CameraIntrinsics& k, const RigidTransform& ext, const Vec3& p_world) {
    const Vec3 pc = transform_point(ext, p_world);
    if (!(pc.z > 0)) throw InvalidArgument("project: point behind camera (z <= 0)");
    return {k.fx * pc.x / pc.z + k.cx, k.fy * pc.y / pc.z + k.cy};
}

CalibrationResult solve_pnp(const CameraIntrinsics& k, std::span<const Correspondence> corr) {
    k.validate();
    if (corr.size() < 6)
        throw InsufficientData("solve_pnp: needs at least 6 correspondences, got " +
                               std::to_string(corr.size()));
    check_non_coplanar(corr);

    std::vector<Eigen::Vector2d> img;
    std::vector<Eigen::Vector3d> world;
    img.reserve(corr.size());
    world.reserve(corr.size());
    for (const auto& c : corr) {
        img.emplace_back((c.pixel.u - k.cx) / k.fx, (c.pixel.v - k.cy) / k.fy);
        world.push_back(to_eigen(c.world));
    }

    RigidTransform pose = dlt_pose(img, world);

    // Levenberg-Marquardt on (rotation delta, translation), pixel residuals.
    Eigen::Matrix3d r = to_eigen(pose.rotation);
    Eigen::Vector3d t = to_eigen(pose.translation);
    const int max_iters = 100;
    const double grad_tol = 1e-10;
    double lambda = 1e-4;

    auto cost_of = [&](const Eigen::Matrix3d& rr, const Eigen::Vector3d& tt) {
        double c = 0;
        for (std::size_t i = 0; i < corr.size(); ++i) {
            const Eigen::Vector3d pc = rr * world[i] + tt;
            const double iu = k.fx * pc.x() / pc.z() + k.cx;
            const double iv = k.fy * pc.y() / pc.z() + k.cy;
            const double du = iu - corr[i].pixel.u;
            const double dv = iv - corr[i].pixel.v;
            c += du * du + dv * dv;
        }
        return c;
    };

    double cost = cost_of(r, t);
    bool converged = false;
    for (int iter = 0; iter < max_iters; ++iter) {
        Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
        for (std::size_t i = 0; i < corr.size(); ++i) {
            const Eigen::Vector3d pc = r * world[i] + t;
            const double z = pc.z();
            const double iu = k.fx * pc.x() / z + k.cx;
            const double iv = k.fy * pc.y() / z + k.cy;
            Eigen::Vector2d res(iu - corr[i].pixel.u, iv - corr[i].pixel.v);

            Eigen::Matrix<double, 2, 3> d_pix;  // d(pixel)/d(camera point)
            d_pix << k.fx / z, 0, -k.fx * pc.x() / (z * z), 0, k.fy / z, -k.fy * pc.y() / (z * z);
            Eigen::Matrix<double, 3, 6> d_pc;  // left perturbation: d(pc)/d(delta, dt)
            Eigen::Matrix3d rx;
            const Eigen::Vector3d rw = r * world[i];
            rx << 0, -rw.z(), rw.y(), rw.z(), 0, -rw.x(), -rw.y(), rw.x(), 0;
            d_pc.block<3, 3>(0, 0) = -rx;
            d_pc.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
            const Eigen::Matrix<double, 2, 6> jac = d_pix * d_pc;
            h += jac.transpose() * jac;
            g += jac.transpose() * res;
        }

        if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
            converged = true;
            break;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::Matrix<double, 6, 6> damped = h;
            for (int d = 0; d < 6; ++d) damped(d, d) += lambda * std::max(h(d, d), 1e-12);
            const Eigen::Matrix<double, 6, 1> step = damped.ldlt().solve(-g);
            const Eigen::Vector3d delta = step.head<3>();
            const Eigen::Matrix3d r_try =
                to_eigen(axis_angle_to_rot(AxisAngle{delta.x(), delta.y(), delta.z()})) * r;
            const Eigen::Vector3d t_try = t + step.tail<3>();
            const double cost_try = cost_of(r_try, t_try);
            if (cost_try < cost) {
                r = r_try;
                t = t_try;
                cost = cost_try;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!stepped) {
            // Damping exhausted without improvement: already at a minimum.
            converged = g.lpNorm<Eigen::Infinity>() < 1e-3 * (1.0 + cost);
            break;
        }
    }

    CalibrationResult result;
    result.extrinsics = {project_to_so3(r), {t.x(), t.y(), t.z()}};
    double sum = 0;
    result.per_point_residuals.reserve(corr.size());
    for (std::size_t i = 0; i < corr.size(); ++i) {
        const Eigen::Vector3d pc = r * world[i] + t;
        const double iu = k.fx * pc.x() / pc.z() + k.cx;
        const double iv = k.fy * pc.y() / pc.z() + k.cy;
        const double e = std::hypot(iu - corr[i].pixel.u, iv - corr[i].pixel.v);
        result.per_point_residuals.push_back(e);
        sum += e;
    }
    result.mean_reprojection_error = sum / static_cast<double>(corr.size());

    if (!converged)
        throw NonConvergence("solve_pnp: LM did not converge", result.mean_reprojection_error);
    return result;
}

Vec3 chain_vicon_to_radar(const RigidTransform& cam_from_vicon,
                          const RigidTransform& cam_from_radar, const Vec3& p_vicon) {
    return transform_point(inverse_transform(cam_from_radar),
                           transform_point(cam_from_vicon, p_vicon));
}

Vec3 weak_perspective_backproject(const CameraIntrinsics& k, const WeakPerspective& wp) {
    const double bs = wp.box_size * wp.s_hat;
    if (!(bs > 0)) throw InvalidArgument("weak_perspective_backproject: non-positive scaled box");
    const double x_pix = wp.box_cx + 0.5 * bs * wp.u_hat;
    const double y_pix = wp.box_cy + 0.5 * bs * wp.v_hat;
    const double z = 2.0 * k.fx / bs;
    const double x = (x_pix - 0.5 * k.width) * z / k.fx;
    const double y = (y_pix - 0.5 * k.height) * z / k.fy;
    return {x, y, z};
}

std::vector<Vec3> depth_backproject(const CameraIntrinsics& k, const DepthImage& depth) {
    if (depth.width <= 0 || depth.height <= 0 ||
        depth.meters.size() !=
            static_cast<std::size_t>(depth.width) * static_cast<std::size_t>(depth.height))
        throw InvalidArgument("depth_backproject: image buffer does not match dims");
    std::vector<Vec3> out;
    for (int v = 0; v < depth.height; ++v)
        for (int u = 0; u < depth.width; ++u) {
            const double d = depth.at(u, v);
            if (!(d > 0)) continue;
            out.push_back({(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d});
        }
    return out;
}

RigidTransform align_point_sets(std::span<const Vec3> src, std::span<const Vec3> dst) {
    if (src.size() != dst.size())
        throw InvalidArgument("align_point_sets: size mismatch");
    if (src.size() < 3) throw InsufficientData("align_point_sets: needs at least 3 pairs");

    Eigen::Vector3d sc = Eigen::Vector3d::Zero(), dc = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        sc += to_eigen(src[i]);
        dc += to_eigen(dst[i]);
    }
    sc /= static_cast<double>(src.size());
    dc /= static_cast<double>(src.size());

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Eigen::Vector3d a = to_eigen(src[i]) - sc;
        const Eigen::Vector3d b = to_eigen(dst[i]) - dc;
        h += b * a.transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(1) <= 1e-9 * sv(0))
        throw DegenerateGeometry("align_point_sets: points are collinear");
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
    const Eigen::Matrix3d r = svd.matrixU() * d * svd.matrixV().transpose();
    const Eigen::Vector3d t = dc - r * sc;
    return {from_eigen(r), {t.x(), t.y(), t.z()}};
}

}  // namespace m4

#include "m4pipe/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace m4 {

namespace {
constexpr double kPi = 3.14159265358979323846;
// Below this angle^2 the Rodrigues coefficients switch to Taylor series.
constexpr double kNearZeroSq = 1e-12;
}  // namespace

bool Rot3::is_valid(double tol) const {
    const Rot3 rtr = transposed() * (*this);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double want = (i == j) ? 1.0 : 0.0;
            if (!std::isfinite(rtr(i, j)) || std::abs(rtr(i, j) - want) > tol) return false;
        }
    return std::abs(det() - 1.0) <= tol;
}

void Rot3::require_valid(const char* who) const {
    if (!is_valid()) throw InvalidArgument(std::string(who) + ": matrix is not a rotation");
}

AxisAngle AxisAngle::canonicalized() const {
    double theta = angle();
    if (theta == 0.0) return {0, 0, 0};
    Vec3 axis = vec() * (1.0 / theta);
    // Wrap into [0, 2*pi), then fold (pi, 2*pi) onto [0, pi) about the origin.
    theta = std::fmod(theta, 2.0 * kPi);
    if (theta < 0) theta += 2.0 * kPi;
    if (theta > kPi) {
        theta = 2.0 * kPi - theta;
        axis = -axis;
    }
    if (theta == 0.0) return {0, 0, 0};
    if (std::abs(theta - kPi) < 1e-12) {
        // Angle pi: a and -a describe the same rotation; fix the sign.
        const double c[3] = {axis.x, axis.y, axis.z};
        for (double v : c) {
            if (v > 0) break;
            if (v < 0) {
                axis = -axis;
                break;
            }
        }
        theta = kPi;
    }
    return from(axis * theta);
}

Rot3 axis_angle_to_rot(const AxisAngle& a) {
    if (!a.finite()) throw InvalidArgument("axis_angle_to_rot: non-finite input");
    const double theta2 = a.vec().squared_norm();
    const double theta = std::sqrt(theta2);
    double A, B;  // sin(t)/t and (1-cos(t))/t^2
    if (theta2 < kNearZeroSq) {
        A = 1.0 - theta2 / 6.0;
        B = 0.5 - theta2 / 24.0;
    } else {
        A = std::sin(theta) / theta;
        const double s2 = std::sin(theta / 2.0);
        B = 2.0 * s2 * s2 / theta2;
    }
    const Rot3 w = skew(a.vec());
    const Rot3 ww = w * w;
    Rot3 r = Rot3::identity();
    for (std::size_t i = 0; i < 9; ++i) r.m[i] += A * w.m[i] + B * ww.m[i];
    return r;
}

AxisAngle rot_to_axis_angle(const Rot3& r) {
    r.require_valid("rot_to_axis_angle");
    const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double theta = std::acos(c);
    if (theta < 1e-12) return {0, 0, 0};

    const Vec3 w{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};

    if (theta < kPi - 1e-6) {
        const double s = 2.0 * std::sin(theta);
        return AxisAngle::from(w * (theta / s));
    }

    // Near pi: sin(theta) ~ 0, so recover the axis from the symmetric part
    // R + R^T = 2 cos(theta) I + 2 (1 - cos(theta)) a a^T via the column of
    // largest diagonal (that column cannot vanish).
    Vec3 axis;
    const double d0 = r(0, 0), d1 = r(1, 1), d2 = r(2, 2);
    const double omc = 1.0 - c;
    if (d0 >= d1 && d0 >= d2) {
        axis.x = std::sqrt(std::max(0.0, (d0 - c) / omc));
        axis.y = (r(0, 1) + r(1, 0)) / (2.0 * omc * (axis.x == 0 ? 1 : axis.x));
        axis.z = (r(0, 2) + r(2, 0)) / (2.0 * omc * (axis.x == 0 ? 1 : axis.x));
    } else if (d1 >= d0 && d1 >= d2) {
        axis.y = std::sqrt(std::max(0.0, (d1 - c) / omc));
        axis.x = (r(0, 1) + r(1, 0)) / (2.0 * omc * (axis.y == 0 ? 1 : axis.y));
        axis.z = (r(1, 2) + r(2, 1)) / (2.0 * omc * (axis.y == 0 ? 1 : axis.y));
    } else {
        axis.z = std::sqrt(std::max(0.0, (d2 - c) / omc));
        axis.x = (r(0, 2) + r(2, 0)) / (2.0 * omc * (axis.z == 0 ? 1 : axis.z));
        axis.y = (r(1, 2) + r(2, 1)) / (2.0 * omc * (axis.z == 0 ? 1 : axis.z));
    }
    const double n = axis.norm();
    axis = axis * (1.0 / n);
    // Align the sign with the antisymmetric part when it is informative.
    if (w.norm() > 1e-12) {
        if (axis.dot(w) < 0) axis = -axis;
    }
    return AxisAngle::from(axis * theta).canonicalized();
}

double geodesic_angle(const Rot3& r1, const Rot3& r2) {
    r1.require_valid("geodesic_angle");
    r2.require_valid("geodesic_angle");
    const double t = (r1.transposed() * r2).trace();
    return std::acos(std::clamp((t - 1.0) / 2.0, -1.0, 1.0));
}

Vec3 transform_point(const RigidTransform& t, const Vec3& p) {
    return t.rotation * p + t.translation;
}

RigidTransform inverse_transform(const RigidTransform& t) {
    const Rot3 rt = t.rotation.transposed();
    return {rt, -(rt * t.translation)};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Rot3 skew(const Vec3& v) {
    Rot3 s;
    s.m = {0, -v.z, v.y, v.z, 0, -v.x, -v.y, v.x, 0};
    return s;
}

std::array<double, 9> so3_right_jacobian(const AxisAngle& a) {
    const double theta2 = a.vec().squared_norm();
    const double theta = std::sqrt(theta2);
    double B, C;  // (1-cos)/t^2 and (t - sin)/t^3
    if (theta2 < kNearZeroSq) {
        B = 0.5 - theta2 / 24.0;
        C = 1.0 / 6.0 - theta2 / 120.0;
    } else {
        B = (1.0 - std::cos(theta)) / theta2;
        C = (theta - std::sin(theta)) / (theta2 * theta);
    }
    const Rot3 w = skew(a.vec());
    const Rot3 ww = w * w;
    std::array<double, 9> j{1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (std::size_t i = 0; i < 9; ++i) j[i] += -B * w.m[i] + C * ww.m[i];
    return j;
}

}  // namespace m4

#pragma once

#include <array>
#include <cmath>

#include "m4pipe/error.hpp"

namespace m4 {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// 3x3 rotation matrix, row-major. Must stay orthonormal with det +1; ops
/// that require a valid rotation check against `kOrthoTol`.
struct Rot3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static constexpr double kOrthoTol = 1e-6;

    static Rot3 identity() { return {}; }

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Rot3 operator*(const Rot3& o) const {
        Rot3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }

    Rot3 transposed() const {
        Rot3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double trace() const { return m[0] + m[4] + m[8]; }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    bool is_valid(double tol = kOrthoTol) const;
    void require_valid(const char* who) const;
};

/// Axis-angle rotation vector: direction = axis, magnitude = angle (radians).
/// Canonical form has magnitude in [0, pi]; at exactly pi the sign is fixed
/// by making the first nonzero component positive.
struct AxisAngle {
    double x = 0, y = 0, z = 0;

    Vec3 vec() const { return {x, y, z}; }
    static AxisAngle from(const Vec3& v) { return {v.x, v.y, v.z}; }

    double angle() const { return vec().norm(); }
    bool finite() const { return vec().finite(); }

    AxisAngle canonicalized() const;
};

struct RigidTransform {
    Rot3 rotation;
    Vec3 translation;

    static RigidTransform identity() { return {}; }
};

Rot3 axis_angle_to_rot(const AxisAngle& a);
AxisAngle rot_to_axis_angle(const Rot3& r);

/// Geodesic distance on SO(3): arccos(clamp((trace(r1^T r2) - 1) / 2)).
/// Symmetric, bi-invariant, in [0, pi].
double geodesic_angle(const Rot3& r1, const Rot3& r2);

Vec3 transform_point(const RigidTransform& t, const Vec3& p);
RigidTransform inverse_transform(const RigidTransform& t);
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Skew-symmetric matrix [v]x such that [v]x w = v x w.
Rot3 skew(const Vec3& v);

/// Right Jacobian of the SO(3) exponential at a: R(a + da) ~ R(a) exp([Jr da]x).
/// Needed for analytic gradients of geodesic rotation losses.
std::array<double, 9> so3_right_jacobian(const AxisAngle& a);

}  // namespace m4

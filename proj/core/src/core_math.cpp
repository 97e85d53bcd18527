#include "oltae/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oltae/errors.hpp"

namespace oltae {

bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

Mat3 Mat3::identity() { return diag(1.0, 1.0, 1.0); }

Mat3 Mat3::zero() { return Mat3{}; }

Mat3 Mat3::diag(double a, double b, double c) {
    Mat3 d;
    d(0, 0) = a;
    d(1, 1) = b;
    d(2, 2) = c;
    return d;
}

Mat3 operator+(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] + b.m[i];
    return r;
}

Mat3 operator-(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] - b.m[i];
    return r;
}

Mat3 operator*(double s, const Mat3& a) {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = s * a.m[i];
    return r;
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
    return r;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

Mat3 transpose(const Mat3& a) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

double det3(const Mat3& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

double trace(const Mat3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

double max_abs_entry(const Mat3& a) {
    double m = 0.0;
    for (double v : a.m) m = std::max(m, std::abs(v));
    return m;
}

bool is_finite(const Mat3& a) {
    for (double v : a.m)
        if (!std::isfinite(v)) return false;
    return true;
}

Mat3 skew(const Vec3& v) {
    Mat3 s;
    s(0, 1) = -v.z;
    s(0, 2) = v.y;
    s(1, 0) = v.z;
    s(1, 2) = -v.x;
    s(2, 0) = -v.y;
    s(2, 1) = v.x;
    return s;
}

Mat3 cayley(const Crp& crp) {
    const Mat3 q = skew(crp.q);
    const Mat3 i = Mat3::identity();
    // (I + Q) is never singular: det = 1 + |q|^2.
    return mat3_inverse(i + q) * (i - q);
}

Crp inverse_cayley(const Mat3& r) {
    const Mat3 i = Mat3::identity();
    const Mat3 rtr = transpose(r) * r;
    if (max_abs_entry(rtr - i) > 1e-9 || std::abs(det3(r) - 1.0) > 1e-9)
        throw NotARotation("matrix is not proper orthogonal within 1e-9");
    const double d = det3(i + r);
    if (d < 1e-9) throw SingularRotation("180-degree rotation: I + R is singular");
    const Mat3 q = (i - r) * mat3_inverse(i + r);
    // Q is skew-symmetric up to round-off; read the defining components.
    return Crp{{q(2, 1), q(0, 2), q(1, 0)}};
}

Mat3 mat3_inverse(const Mat3& a, double tol_rel) {
    const double d = det3(a);
    const double scale = max_abs_entry(a);
    if (std::abs(d) <= tol_rel * scale * scale * scale)
        throw SingularMatrix("3x3 matrix is singular to working tolerance", d);

    Mat3 inv;
    inv(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
    inv(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
    inv(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
    inv(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
    inv(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
    inv(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
    inv(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
    inv(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
    inv(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
    return inv;
}

std::array<double, 3> symmetric_eigenvalues(const Mat3& a) {
    // Trigonometric solution of the characteristic cubic (Smith's method).
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (p1 == 0.0) {
        std::array<double, 3> e{a(0, 0), a(1, 1), a(2, 2)};
        std::sort(e.begin(), e.end());
        return e;
    }
    const double q = trace(a) / 3.0;
    const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                      (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 b = (1.0 / p) * (a - Mat3::diag(q, q, q));
    const double r = std::clamp(det3(b) / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;

    const double e0 = q + 2.0 * p * std::cos(phi);
    const double e2 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e1 = 3.0 * q - e0 - e2;
    std::array<double, 3> e{e2, e1, e0};
    std::sort(e.begin(), e.end());
    return e;
}

double symmetric_condition_number(const Mat3& a) {
    const auto e = symmetric_eigenvalues(a);
    if (e[0] <= 0.0) return std::numeric_limits<double>::infinity();
    return e[2] / e[0];
}

Vec3 apply(const Pose& p, const Vec3& v) { return cayley(p.q) * v + p.t; }

Pose compose(const Pose& second, const Pose& first) {
    const Mat3 r2 = cayley(second.q);
    const Mat3 r1 = cayley(first.q);
    return Pose{inverse_cayley(r2 * r1), r2 * first.t + second.t};
}

}  // namespace oltae

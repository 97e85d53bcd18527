#pragma once

#include <array>
#include <cmath>

namespace oltae {

/// 3-vector of doubles. Carries points (meters), translations, Gibbs vectors.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
constexpr Vec3 operator*(const Vec3& a, double s) { return s * a; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const Vec3& a) {
    return std::max(std::abs(a.x), std::max(std::abs(a.y), std::abs(a.z)));
}
bool is_finite(const Vec3& v);

/// 3x3 matrix, row-major storage. Every operation is written entry-wise so
/// the fixed-point mirror of the same formulas stays bit-reproducible.
struct Mat3 {
    std::array<double, 9> m{};  // m[3*row + col]

    double operator()(int r, int c) const { return m[3 * r + c]; }
    double& operator()(int r, int c) { return m[3 * r + c]; }

    static Mat3 identity();
    static Mat3 zero();
    static Mat3 diag(double a, double b, double c);
};

Mat3 operator+(const Mat3& a, const Mat3& b);
Mat3 operator-(const Mat3& a, const Mat3& b);
Mat3 operator*(double s, const Mat3& a);
Mat3 operator*(const Mat3& a, const Mat3& b);
Vec3 operator*(const Mat3& a, const Vec3& v);

Mat3 transpose(const Mat3& a);
Mat3 outer(const Vec3& a, const Vec3& b);
double det3(const Mat3& a);
double trace(const Mat3& a);
double max_abs_entry(const Mat3& a);
bool is_finite(const Mat3& a);

/// Classical Rodrigues Parameters (Gibbs vector): q = tan(theta/2) * axis.
/// Unbounded as the rotation approaches 180 degrees; callers that invert
/// rotations near that singularity get SingularRotation.
struct Crp {
    Vec3 q;
};

/// Rigid transform b = R(q) * a + t.
struct Pose {
    Crp q;
    Vec3 t;
};

/// Skew-symmetric cross-product matrix [v x], so that skew(v) * w == cross(v, w).
Mat3 skew(const Vec3& v);

/// Rotation matrix from a Gibbs vector via the Cayley transform
/// R = (I + Q)^-1 (I - Q) with Q = [q x]. Always well defined:
/// det(I + Q) = 1 + |q|^2 >= 1. The result is proper orthogonal.
Mat3 cayley(const Crp& q);

/// Gibbs vector from a proper orthogonal matrix, Q = (I - R)(I + R)^-1.
/// Throws NotARotation if R fails the orthogonality/determinant check
/// (tolerance 1e-9), SingularRotation for 180-degree rotations.
Crp inverse_cayley(const Mat3& r);

/// Inverse by cofactor (adjugate) expansion, the double-precision mirror of
/// the Cramer's-rule fixed-point path. Throws SingularMatrix when
/// |det| <= tol_rel * max_abs_entry^3 (default tol_rel 1e-12).
Mat3 mat3_inverse(const Mat3& a, double tol_rel = 1e-12);

/// Eigenvalues of a symmetric matrix, ascending. Analytic (trigonometric) method.
std::array<double, 3> symmetric_eigenvalues(const Mat3& a);

/// Spectral condition number of a symmetric positive semi-definite matrix;
/// returns +inf when the smallest eigenvalue is not strictly positive.
double symmetric_condition_number(const Mat3& a);

Vec3 apply(const Pose& p, const Vec3& v);
/// Composition: apply(compose(second, first), v) == apply(second, apply(first, v)).
Pose compose(const Pose& second, const Pose& first);

}  // namespace oltae

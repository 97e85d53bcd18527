#include "oltae/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "oltae/errors.hpp"
#include "oltae/fixedpoint.hpp"

namespace oltae {

namespace {

constexpr double kConditionGate = 1e12;

/// Gaussian elimination with partial pivoting on the 6x6 joint normal matrix.
void solve6(double a[6][6], double b[6], double x[6]) {
    double scale = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) scale = std::max(scale, std::abs(a[i][j]));
    const double tol = 1e-12 * scale;

    int perm[6] = {0, 1, 2, 3, 4, 5};
    for (int col = 0; col < 6; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 6; ++r)
            if (std::abs(a[perm[r]][col]) > std::abs(a[perm[pivot]][col])) pivot = r;
        std::swap(perm[col], perm[pivot]);
        const double p = a[perm[col]][col];
        if (std::abs(p) <= tol)
            throw DegenerateGeometry("joint 6x6 normal matrix is singular to working tolerance");
        for (int r = col + 1; r < 6; ++r) {
            const double f = a[perm[r]][col] / p;
            if (f == 0.0) continue;
            for (int c = col; c < 6; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
            b[perm[r]] -= f * b[perm[col]];
        }
    }
    for (int row = 5; row >= 0; --row) {
        double acc = b[perm[row]];
        for (int c = row + 1; c < 6; ++c) acc -= a[perm[row]][c] * x[c];
        x[row] = acc / a[perm[row]][row];
    }
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::closed_form_3x3: return "closed_form_3x3";
        case Method::joint_6x6: return "joint_6x6";
        case Method::fixed_point: return "fixed_point";
    }
    return "unknown";
}

DeltaSet build_deltas(const std::vector<Correspondence>& correspondences) {
    const std::size_t n = correspondences.size();
    if (n < 3) throw TooFewCorrespondences(n);

    Vec3 a_bar{}, b_bar{};
    for (const auto& c : correspondences) {
        a_bar = a_bar + c.a;
        b_bar = b_bar + c.b;
    }
    a_bar = a_bar / static_cast<double>(n);
    b_bar = b_bar / static_cast<double>(n);

    DeltaSet d;
    d.n = n;
    d.a_bar = a_bar;
    d.b_bar = b_bar;
    d.s.reserve(n);
    d.y.reserve(n);
    d.weight.reserve(n);
    for (const auto& c : correspondences) {
        const Vec3 da = c.a - a_bar;
        const Vec3 db = c.b - b_bar;
        d.s.push_back(db + da);
        d.y.push_back(db - da);
        d.weight.push_back(1.0 / (c.sigma * c.sigma));
    }
    return d;
}

AttitudeSolution solve_attitude(const DeltaSet& deltas) {
    if (deltas.n < 3) throw TooFewCorrespondences(deltas.n);

    // Ascending-index accumulation is part of the contract: the Q15.16
    // datapath mirrors this exact loop.
    Mat3 normal = Mat3::zero();
    Vec3 rhs{};
    for (std::size_t j = 0; j < deltas.n; ++j) {
        const Vec3& s = deltas.s[j];
        const Vec3& y = deltas.y[j];
        const double w = deltas.weight[j];
        normal = normal + w * (Mat3::diag(dot(s, s), dot(s, s), dot(s, s)) - outer(s, s));
        rhs = rhs + w * cross(s, y);
    }

    const double cond = symmetric_condition_number(normal);
    if (!std::isfinite(cond) || cond > kConditionGate)
        throw DegenerateGeometry("normal matrix condition number exceeds 1e12 (collinear or "
                                 "coincident geometry)");

    const Vec3 q = mat3_inverse(normal) * (-1.0 * rhs);
    return AttitudeSolution{Crp{q}, normal, cond};
}

Vec3 recover_translation(const Crp& q_hat, const DeltaSet& deltas) {
    return deltas.b_bar - cayley(q_hat) * deltas.a_bar;
}

JointSolution solve_joint_6x6(const std::vector<Correspondence>& correspondences) {
    const std::size_t n = correspondences.size();
    if (n < 3) throw TooFewCorrespondences(n);

    // Rows per pair: eps_i = [nu_i x] q + t*, weighted by 1/sigma_i^2.
    double a[6][6] = {};
    double b[6] = {};
    for (const auto& c : correspondences) {
        const Vec3 nu = c.b + c.a;
        const Vec3 eps = c.b - c.a;
        const double w = 1.0 / (c.sigma * c.sigma);
        const Mat3 h = skew(nu);

        // [H | I]^T W [H | I] blocks: qq = H^T H, qt = H^T, tt = I.
        const Mat3 hth = transpose(h) * h;
        const Mat3 ht = transpose(h);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                a[i][j] += w * hth(i, j);
                a[i][3 + j] += w * ht(i, j);
                a[3 + i][j] += w * h(i, j);
            }
            a[3 + i][3 + i] += w;
        }
        const Vec3 hteps = transpose(h) * eps;
        for (int i = 0; i < 3; ++i) {
            b[i] += w * hteps[i];
            b[3 + i] += w * eps[i];
        }
    }

    double x[6] = {};
    solve6(a, b, x);

    const Crp q_hat{{x[0], x[1], x[2]}};
    const Vec3 t_star{x[3], x[4], x[5]};
    // det(I + Q) = 1 + |q|^2, so the adjugate inverse is exact here.
    const Vec3 t_hat = mat3_inverse(Mat3::identity() + skew(q_hat.q)) * t_star;
    return JointSolution{q_hat, t_hat};
}

EstimateResult estimate_pose(const std::vector<Correspondence>& correspondences, Method method) {
    EstimateResult result{};
    result.method_tag = method;

    const DeltaSet deltas = build_deltas(correspondences);

    switch (method) {
        case Method::closed_form_3x3: {
            const AttitudeSolution att = solve_attitude(deltas);
            result.q_hat = att.q_hat;
            result.info_matrix = att.info_matrix;
            result.condition_number = att.condition_number;
            result.t_hat = recover_translation(att.q_hat, deltas);
            break;
        }
        case Method::joint_6x6: {
            const JointSolution joint = solve_joint_6x6(correspondences);
            result.q_hat = joint.q_hat;
            result.t_hat = joint.t_hat;
            // Report the centered-system information matrix; with uniform
            // weights it is exactly the Schur complement of the joint solve.
            const AttitudeSolution att = solve_attitude(deltas);
            result.info_matrix = att.info_matrix;
            result.condition_number = att.condition_number;
            break;
        }
        case Method::fixed_point: {
            const ScaleConfig scales = auto_scale(deltas);
            const FxEstimate fx = fx_estimate_attitude(deltas, scales);
            result.q_hat = fx.q_hat;
            result.t_hat = recover_translation(fx.q_hat, deltas);
            result.saturation_count = fx.status.saturation_count;
            const AttitudeSolution att = solve_attitude(deltas);
            result.info_matrix = att.info_matrix;
            result.condition_number = att.condition_number;
            break;
        }
    }
    result.r_hat = cayley(result.q_hat);
    return result;
}

Mat3 attitude_covariance(const Mat3& info_matrix) {
    return mat3_inverse(info_matrix);
}

Mat3 translation_covariance(const Mat3& p_q, const Crp& q_hat, const Vec3& a_bar, std::size_t n,
                            double sigma_bar) {
    // Jacobian of t(q) = b_bar - R(q) a_bar by central differences.
    const double h = 1e-6;
    Mat3 jac;
    for (int k = 0; k < 3; ++k) {
        Crp plus = q_hat, minus = q_hat;
        plus.q[k] += h;
        minus.q[k] -= h;
        const Vec3 col = (1.0 / (2.0 * h)) * (cayley(minus) * a_bar - cayley(plus) * a_bar);
        for (int i = 0; i < 3; ++i) jac(i, k) = col[i];
    }
    const double centroid_var = 2.0 * sigma_bar * sigma_bar / static_cast<double>(n);
    return jac * p_q * transpose(jac) + Mat3::diag(centroid_var, centroid_var, centroid_var);
}

}  // namespace oltae

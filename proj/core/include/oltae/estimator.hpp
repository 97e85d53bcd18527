#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "oltae/core_math.hpp"

namespace oltae {

/// One matched point pair between two successive frames, with the standard
/// deviation (meters) of its measurement noise.
struct Correspondence {
    Vec3 a;        ///< point in frame 1
    Vec3 b;        ///< point in frame 2
    double sigma;  ///< noise standard deviation, > 0
};

/// Centroid-aligned sums and differences feeding the 3x3 attitude solve:
///   s_i = (b_i - b_bar) + (a_i - a_bar)
///   y_i = (b_i - b_bar) - (a_i - a_bar)
/// together with the per-pair weights 1/sigma^2. Both the unweighted mean
/// of s and of y are zero by construction.
struct DeltaSet {
    std::vector<Vec3> s;
    std::vector<Vec3> y;
    std::vector<double> weight;  ///< 1 / sigma_j^2
    Vec3 a_bar;
    Vec3 b_bar;
    std::size_t n = 0;
};

enum class Method { closed_form_3x3, joint_6x6, fixed_point };

std::string to_string(Method m);

struct EstimateResult {
    Crp q_hat;
    Vec3 t_hat;
    Mat3 r_hat;
    Mat3 info_matrix;         ///< H^T Sigma^-1 H of the centered attitude system
    double condition_number;  ///< spectral condition of info_matrix
    Method method_tag;
    int saturation_count = 0;  ///< nonzero only for the fixed-point path
};

/// Centroid restructuring. Throws TooFewCorrespondences for n < 3.
DeltaSet build_deltas(const std::vector<Correspondence>& correspondences);

/// Weighted 3x3 normal-equation solve for the Gibbs vector:
///   N = sum_j w_j (s_j.s_j I - s_j s_j^T),  q_hat = -N^-1 sum_j w_j (s_j x y_j)
/// Accumulation is strictly index-ascending so the fixed-point mirror of the
/// same loop is bit-deterministic. Throws DegenerateGeometry when N is
/// singular or its condition number exceeds 1e12.
struct AttitudeSolution {
    Crp q_hat;
    Mat3 info_matrix;
    double condition_number;
};
AttitudeSolution solve_attitude(const DeltaSet& deltas);

/// t_hat = b_bar - R(q_hat) * a_bar.
Vec3 recover_translation(const Crp& q_hat, const DeltaSet& deltas);

/// Direct weighted least squares over [q; t*] from the uncentered linear
/// system (b_i - a_i) = [(b_i + a_i) x] q + t*, then t = (I + [q x])^-1 t*.
/// Serves as the equivalence oracle for the closed-form path.
struct JointSolution {
    Crp q_hat;
    Vec3 t_hat;
};
JointSolution solve_joint_6x6(const std::vector<Correspondence>& correspondences);

/// Full pipeline: build_deltas -> attitude solve -> translation recovery.
/// Method::fixed_point runs the Q15.16 emulation with auto power-of-two
/// scaling (see fixedpoint.hpp for manual scaling control).
EstimateResult estimate_pose(const std::vector<Correspondence>& correspondences, Method method);

/// Attitude covariance P_q = N^-1; per-axis 3-sigma bound is
/// 3 * sqrt(diag(P_q)). Throws SingularMatrix.
Mat3 attitude_covariance(const Mat3& info_matrix);

/// First-order translation covariance
///   P_t = J P_q J^T + (2 sigma_bar^2 / n) I
/// with J = d(b_bar - R(q) a_bar)/dq evaluated at q_hat by central finite
/// differences (step 1e-6). The centroid term uses R R^T = I.
Mat3 translation_covariance(const Mat3& p_q, const Crp& q_hat, const Vec3& a_bar, std::size_t n,
                            double sigma_bar);

}  // namespace oltae

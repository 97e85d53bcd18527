#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "oltae/core_math.hpp"
#include "oltae/estimator.hpp"

namespace oltae {

/// Signed Q15.16 scalar: 1 sign bit, 15 integer bits, 16 fractional bits.
/// value = raw / 2^16, representable range [-32768, 32768 - 2^-16],
/// quantization step exactly 2^-16.
struct Fixed32 {
    std::int32_t raw = 0;

    friend bool operator==(Fixed32 a, Fixed32 b) { return a.raw == b.raw; }
};

constexpr double kFxScale = 65536.0;  // 2^16

/// Exact double value of a Fixed32.
inline double from_fixed(Fixed32 f) { return static_cast<double>(f.raw) / kFxScale; }

/// Per-run arithmetic diagnostics. A result is trusted only when
/// saturation_count == 0.
struct FxStatus {
    int saturation_count = 0;
    double max_abs_intermediate = 0.0;
    bool divide_error = false;
    bool ill_conditioned = false;

    void track(double magnitude) {
        if (magnitude > max_abs_intermediate) max_abs_intermediate = magnitude;
    }
};

enum class ScaleMode { manual, auto_pow2 };

/// Input scaling for the finite-precision evaluation: s' = alpha * s,
/// y' = beta * y. The estimate comes back as q_hat = (alpha/beta) * q_hat'.
/// In auto_pow2 mode both factors are exact powers of two.
struct ScaleConfig {
    double alpha = 1.0;
    double beta = 1.0;
    ScaleMode mode = ScaleMode::manual;
};

/// Round-to-nearest (ties away from zero) quantization of x * 2^16,
/// saturating at the range limits. Saturation is flagged, never thrown.
Fixed32 to_fixed(double x, FxStatus& status);

/// 64-bit exact product of raws, one rounding shift by 16 (ties away from
/// zero), then saturation. Exactly one rounding per multiply.
Fixed32 fx_mul(Fixed32 a, Fixed32 b, FxStatus& status);

/// (num_raw * 2^16) / den_raw evaluated in 64 bits and truncated toward
/// zero, matching an integer-divider pipeline. Throws DivideByZero when
/// den.raw == 0.
Fixed32 fx_div(Fixed32 num, Fixed32 den, FxStatus& status);

/// Round-to-nearest, ties away from zero, of v / 2^shift. shift in [1, 62].
std::int64_t round_shift_ties_away(std::int64_t v, int shift);

/// MAC-chain accumulate: acc += term in 64 bits, saturating on overflow with
/// the event flagged. Part of the shared scalar contract, like fx_mul.
void fx_acc_add(std::int64_t& acc, std::int64_t term, FxStatus& status);

/// Saturating conversion of a raw 64-bit value to Fixed32 (flagged).
Fixed32 fx_saturate(std::int64_t raw, FxStatus& status);

/// Largest power-of-two factors with alpha * max_j ||s_j||_inf <= 2^10 and
/// beta * max_j ||y_j||_inf <= 2^10. When every y_j is exactly zero
/// (identity transform) beta falls back to 1; all-zero s is DegenerateInput.
ScaleConfig auto_scale(const DeltaSet& deltas);

/// One quantized term of the streamed input: scaled measurement triples and
/// the per-term weight factor (sigma_min / sigma_j)^2 in (0, 1].
struct FxTerm {
    std::array<Fixed32, 3> s;
    std::array<Fixed32, 3> y;
    Fixed32 w;
};

struct FxInputs {
    std::vector<FxTerm> terms;
    ScaleConfig scales;
};

/// Quantizes a DeltaSet under the given scales. This is processor-side input
/// preparation shared by the fixed-point estimator and by the register-file
/// packer of the core emulator; the compute paths behind it stay independent.
FxInputs quantize_inputs(const DeltaSet& deltas, const ScaleConfig& scales, FxStatus& status);

/// 3x3 Fixed32 matrix in row-major order, same layout convention as Mat3.
using FxMat3 = std::array<Fixed32, 9>;
using FxVec3 = std::array<Fixed32, 3>;

/// Reference fixed-point matrix product: each output entry accumulates its
/// three raw products in a 64-bit accumulator and is rounded exactly once.
FxMat3 fx_matmul3(const FxMat3& a, const FxMat3& b, FxStatus& status);

/// Reference fixed-point matrix-vector product, same chain semantics.
FxVec3 fx_matvec3(const FxMat3& a, const FxVec3& v, FxStatus& status);

struct FxEstimate {
    Crp q_hat;                     ///< rescaled estimate, (alpha/beta) * q_hat'
    std::array<Fixed32, 3> q_prime;  ///< raw pre-rescale estimate
    FxStatus status;
    int norm_shift = 0;  ///< power-of-two normalizer applied to N and rhs
};

/// Q15.16 evaluation of the closed-form attitude solve, mirroring the
/// hardware datapath word for word. The arithmetic contract (shared with the
/// core emulator, which implements it independently):
///
///   1. u_i = fx_mul(w_j, s'_i)                       one rounding each
///   2. Nacc_ik (i<=k) += i64(u_i.raw) * i64(s'_k.raw)   exact 64-bit sums,
///      racc += u x y' cross terms                       ascending j
///   3. g = smallest shift >= 0 putting the largest rounded |N| entry at or
///      below 16.0, so determinant and cofactors stay representable
///   4. N, r = round_shift(acc, 32 + g), saturating; N mirrored symmetric
///   5. adjugate cofactors: 64-bit 2x2 products, one rounding per cofactor
///   6. det: row-0 expansion against rounded cofactors, one rounding
///   7. inverse entries via fx_div(adj, det)
///   8. q' = one-rounding MAC chain of inverse rows against -r
///
/// The common normalizer g cancels algebraically between N and r; weights
/// enter as (sigma_min/sigma_j)^2 so a uniform-sigma set quantizes exactly.
/// Throws DivideByZero when the fixed-point determinant is exactly zero.
FxEstimate fx_estimate_attitude(const DeltaSet& deltas, const ScaleConfig& scales);

}  // namespace oltae

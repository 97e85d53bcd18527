#include "oltae/fixedpoint.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "oltae/errors.hpp"

namespace oltae {

namespace {

constexpr std::int64_t kRawMax = std::numeric_limits<std::int32_t>::max();
constexpr std::int64_t kRawMin = std::numeric_limits<std::int32_t>::min();

}  // namespace

Fixed32 fx_saturate(std::int64_t raw, FxStatus& status) {
    if (raw > kRawMax) {
        ++status.saturation_count;
        return Fixed32{static_cast<std::int32_t>(kRawMax)};
    }
    if (raw < kRawMin) {
        ++status.saturation_count;
        return Fixed32{static_cast<std::int32_t>(kRawMin)};
    }
    return Fixed32{static_cast<std::int32_t>(raw)};
}

// 64-bit accumulators saturate on overflow (reachable only under aggressive
// manual scaling); flagged, never undefined behavior.
void fx_acc_add(std::int64_t& acc, std::int64_t term, FxStatus& status) {
    std::int64_t out;
    if (__builtin_add_overflow(acc, term, &out)) {
        ++status.saturation_count;
        acc = acc > 0 ? std::numeric_limits<std::int64_t>::max()
                      : std::numeric_limits<std::int64_t>::min();
    } else {
        acc = out;
    }
}

std::int64_t round_shift_ties_away(std::int64_t v, int shift) {
    assert(shift >= 1 && shift <= 62);
    // Work on the magnitude in unsigned space so the rounding add cannot
    // overflow even for accumulators pinned at the int64 limits.
    const std::uint64_t mag = v >= 0 ? static_cast<std::uint64_t>(v)
                                     : ~static_cast<std::uint64_t>(v) + 1u;
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    const std::uint64_t r = (mag + half) >> shift;
    return v >= 0 ? static_cast<std::int64_t>(r) : -static_cast<std::int64_t>(r);
}

Fixed32 to_fixed(double x, FxStatus& status) {
    status.track(std::abs(x));
    const double scaled = x * kFxScale;
    if (scaled >= static_cast<double>(kRawMax) + 0.5) {
        ++status.saturation_count;
        return Fixed32{static_cast<std::int32_t>(kRawMax)};
    }
    if (scaled <= static_cast<double>(kRawMin) - 0.5) {
        ++status.saturation_count;
        return Fixed32{static_cast<std::int32_t>(kRawMin)};
    }
    // llround rounds half away from zero, the contract rounding mode.
    return Fixed32{static_cast<std::int32_t>(std::llround(scaled))};
}

Fixed32 fx_mul(Fixed32 a, Fixed32 b, FxStatus& status) {
    const std::int64_t p = static_cast<std::int64_t>(a.raw) * static_cast<std::int64_t>(b.raw);
    status.track(std::abs(static_cast<double>(p)) * 0x1p-32);
    return fx_saturate(round_shift_ties_away(p, 16), status);
}

Fixed32 fx_div(Fixed32 num, Fixed32 den, FxStatus& status) {
    if (den.raw == 0) {
        status.divide_error = true;
        throw DivideByZero("fixed-point division by zero raw value");
    }
    const std::int64_t q = (static_cast<std::int64_t>(num.raw) << 16) /
                           static_cast<std::int64_t>(den.raw);
    status.track(std::abs(static_cast<double>(q)) * 0x1p-16);
    return fx_saturate(q, status);
}

ScaleConfig auto_scale(const DeltaSet& deltas) {
    if (deltas.n == 0) throw DegenerateInput("empty delta set");

    double max_s = 0.0, max_y = 0.0;
    for (std::size_t j = 0; j < deltas.n; ++j) {
        max_s = std::max(max_s, norm_inf(deltas.s[j]));
        max_y = std::max(max_y, norm_inf(deltas.y[j]));
    }
    if (max_s == 0.0)
        throw DegenerateInput("all s vectors are zero (coincident point geometry)");

    // Largest 2^k <= 1024 / max: frexp gives max = m * 2^e with m in [0.5, 1).
    auto pow2_floor = [](double ratio) {
        int e = 0;
        std::frexp(ratio, &e);
        return std::ldexp(1.0, e - 1);
    };
    ScaleConfig cfg;
    cfg.mode = ScaleMode::auto_pow2;
    cfg.alpha = pow2_floor(1024.0 / max_s);
    cfg.beta = (max_y == 0.0) ? 1.0 : pow2_floor(1024.0 / max_y);
    return cfg;
}

FxInputs quantize_inputs(const DeltaSet& deltas, const ScaleConfig& scales, FxStatus& status) {
    if (scales.alpha <= 0.0 || scales.beta <= 0.0)
        throw InvalidConfig("scale factors must be positive");

    double w_max = 0.0;
    for (double w : deltas.weight) w_max = std::max(w_max, w);
    if (w_max <= 0.0) throw DegenerateInput("all weights are zero");

    FxInputs inputs;
    inputs.scales = scales;
    inputs.terms.reserve(deltas.n);
    for (std::size_t j = 0; j < deltas.n; ++j) {
        FxTerm t;
        for (int i = 0; i < 3; ++i) {
            t.s[i] = to_fixed(scales.alpha * deltas.s[j][i], status);
            t.y[i] = to_fixed(scales.beta * deltas.y[j][i], status);
        }
        // Relative weight (sigma_min / sigma_j)^2: the common 1/sigma_min^2
        // factor cancels between the normal matrix and the right-hand side.
        t.w = to_fixed(deltas.weight[j] / w_max, status);
        inputs.terms.push_back(t);
    }
    return inputs;
}

FxMat3 fx_matmul3(const FxMat3& a, const FxMat3& b, FxStatus& status) {
    FxMat3 out;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            std::int64_t acc = 0;
            for (int k = 0; k < 3; ++k)
                fx_acc_add(acc,
                        static_cast<std::int64_t>(a[3 * i + k].raw) *
                            static_cast<std::int64_t>(b[3 * k + j].raw),
                        status);
            status.track(std::abs(static_cast<double>(acc)) * 0x1p-32);
            out[3 * i + j] = fx_saturate(round_shift_ties_away(acc, 16), status);
        }
    }
    return out;
}

FxVec3 fx_matvec3(const FxMat3& a, const FxVec3& v, FxStatus& status) {
    FxVec3 out;
    for (int i = 0; i < 3; ++i) {
        std::int64_t acc = 0;
        for (int k = 0; k < 3; ++k)
            fx_acc_add(acc,
                    static_cast<std::int64_t>(a[3 * i + k].raw) *
                        static_cast<std::int64_t>(v[k].raw),
                    status);
        status.track(std::abs(static_cast<double>(acc)) * 0x1p-32);
        out[i] = fx_saturate(round_shift_ties_away(acc, 16), status);
    }
    return out;
}

FxEstimate fx_estimate_attitude(const DeltaSet& deltas, const ScaleConfig& scales) {
    if (deltas.n < 3) throw TooFewCorrespondences(deltas.n);

    FxEstimate est;
    FxStatus& st = est.status;
    const FxInputs inputs = quantize_inputs(deltas, scales, st);

    // Stage 1: exact 64-bit accumulation of the weighted normal matrix
    // (upper triangle, symmetric mirror) and right-hand side, ascending j.
    std::int64_t nacc[3][3] = {};
    std::int64_t racc[3] = {};
    for (const FxTerm& t : inputs.terms) {
        Fixed32 u[3];
        for (int i = 0; i < 3; ++i) u[i] = fx_mul(t.w, t.s[i], st);
        for (int i = 0; i < 3; ++i)
            for (int k = i; k < 3; ++k)
                fx_acc_add(nacc[i][k],
                        static_cast<std::int64_t>(u[i].raw) *
                            static_cast<std::int64_t>(t.s[k].raw),
                        st);
        // One product per accumulate so no intermediate difference can
        // exceed the 64-bit range even with saturated operands.
        fx_acc_add(racc[0], static_cast<std::int64_t>(u[1].raw) * t.y[2].raw, st);
        fx_acc_add(racc[0], -(static_cast<std::int64_t>(u[2].raw) * t.y[1].raw), st);
        fx_acc_add(racc[1], static_cast<std::int64_t>(u[2].raw) * t.y[0].raw, st);
        fx_acc_add(racc[1], -(static_cast<std::int64_t>(u[0].raw) * t.y[2].raw), st);
        fx_acc_add(racc[2], static_cast<std::int64_t>(u[0].raw) * t.y[1].raw, st);
        fx_acc_add(racc[2], -(static_cast<std::int64_t>(u[1].raw) * t.y[0].raw), st);
    }

    // The accumulated outer products feed N = sum w (s.s I - s s^T):
    // diagonal entries combine the two complementary squares.
    std::int64_t diag_acc[3] = {nacc[1][1], nacc[0][0], nacc[0][0]};
    fx_acc_add(diag_acc[0], nacc[2][2], st);
    fx_acc_add(diag_acc[1], nacc[2][2], st);
    fx_acc_add(diag_acc[2], nacc[1][1], st);

    // Stage 2: common power-of-two normalizer. Chosen so the largest rounded
    // |N| entry lands at or below 16.0; it cancels between N and r.
    std::int64_t max_abs = 0;
    for (int i = 0; i < 3; ++i) {
        max_abs = std::max(max_abs, std::abs(diag_acc[i]));
        for (int k = i + 1; k < 3; ++k) max_abs = std::max(max_abs, std::abs(nacc[i][k]));
    }
    int g = 0;
    constexpr std::int64_t target_raw = std::int64_t{16} << 16;
    while (32 + g < 62 && round_shift_ties_away(max_abs, 32 + g) > target_raw) ++g;
    est.norm_shift = g;

    auto drain = [&](std::int64_t acc) {
        st.track(std::abs(static_cast<double>(acc)) * 0x1p-32);
        return fx_saturate(round_shift_ties_away(acc, 32 + g), st);
    };

    FxMat3 n_fx;
    for (int i = 0; i < 3; ++i) n_fx[3 * i + i] = drain(diag_acc[i]);
    for (int i = 0; i < 3; ++i)
        for (int k = i + 1; k < 3; ++k) {
            // N_ik = -sum w s_i s_k; ties-away rounding commutes with
            // negation, and negating after the shift cannot overflow.
            st.track(std::abs(static_cast<double>(nacc[i][k])) * 0x1p-32);
            const Fixed32 off =
                fx_saturate(-round_shift_ties_away(nacc[i][k], 32 + g), st);
            n_fx[3 * i + k] = off;
            n_fx[3 * k + i] = off;
        }
    FxVec3 r_fx;
    for (int i = 0; i < 3; ++i) r_fx[i] = drain(racc[i]);

    // Stage 3: Cramer's-rule inversion. One rounding per cofactor, row-0
    // expansion against the rounded cofactors for the determinant.
    auto cof2 = [&](int a, int b, int c, int d) {
        std::int64_t v = static_cast<std::int64_t>(n_fx[a].raw) * n_fx[b].raw;
        fx_acc_add(v, -(static_cast<std::int64_t>(n_fx[c].raw) * n_fx[d].raw), st);
        st.track(std::abs(static_cast<double>(v)) * 0x1p-32);
        return fx_saturate(round_shift_ties_away(v, 16), st);
    };
    Fixed32 cof[9];
    cof[0] = cof2(4, 8, 5, 7);
    cof[1] = cof2(5, 6, 3, 8);
    cof[2] = cof2(3, 7, 4, 6);
    cof[3] = cof2(2, 7, 1, 8);
    cof[4] = cof2(0, 8, 2, 6);
    cof[5] = cof2(1, 6, 0, 7);
    cof[6] = cof2(1, 5, 2, 4);
    cof[7] = cof2(2, 3, 0, 5);
    cof[8] = cof2(0, 4, 1, 3);

    std::int64_t det_acc = 0;
    for (int k = 0; k < 3; ++k)
        fx_acc_add(det_acc, static_cast<std::int64_t>(n_fx[k].raw) * cof[k].raw, st);
    st.track(std::abs(static_cast<double>(det_acc)) * 0x1p-32);
    const Fixed32 det = fx_saturate(round_shift_ties_away(det_acc, 16), st);

    double n_max = 0.0;
    for (const Fixed32& e : n_fx) n_max = std::max(n_max, std::abs(from_fixed(e)));
    if (std::abs(from_fixed(det)) < std::ldexp(n_max * n_max * n_max, -8))
        st.ill_conditioned = true;

    if (det.raw == 0) {
        st.divide_error = true;
        throw DivideByZero("fixed-point normal matrix determinant is zero");
    }

    // Adjugate = transpose of the cofactor matrix.
    FxMat3 inv;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) inv[3 * i + k] = fx_div(cof[3 * k + i], det, st);

    // Stage 4: q' = inv * (-r), one rounding per output component.
    FxVec3 neg_r;
    for (int i = 0; i < 3; ++i)
        neg_r[i] = fx_saturate(-static_cast<std::int64_t>(r_fx[i].raw), st);
    est.q_prime = fx_matvec3(inv, neg_r, st);

    // Final rescale happens in double precision, processor-side.
    const double rescale = scales.alpha / scales.beta;
    est.q_hat = Crp{{rescale * from_fixed(est.q_prime[0]), rescale * from_fixed(est.q_prime[1]),
                     rescale * from_fixed(est.q_prime[2])}};
    return est;
}

}  // namespace oltae

#include "oltae/hwsim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "oltae/errors.hpp"

namespace oltae {

const char* to_string(CoreStateId s) {
    switch (s) {
        case CoreStateId::IDLE: return "IDLE";
        case CoreStateId::COMPUTE: return "COMPUTE";
        case CoreStateId::DONE: return "DONE";
    }
    return "?";
}

CoreState step_state(const CoreState& current, const Signals& sig) {
    CoreStateId next = current.state;
    // An edge fires only on its exact signal pattern; anything else holds.
    if (current.state == CoreStateId::IDLE && sig.start && !sig.complete && !sig.reset)
        next = CoreStateId::COMPUTE;
    else if (current.state == CoreStateId::COMPUTE && sig.complete && !sig.start && !sig.reset)
        next = CoreStateId::DONE;
    else if (current.state == CoreStateId::DONE && sig.reset && !sig.start && !sig.complete)
        next = CoreStateId::IDLE;

    CoreState out;
    out.state = next;
    out.start = sig.start;
    out.reset = sig.reset;
    out.done = (next == CoreStateId::DONE);
    return out;
}

// ---------------------------------------------------------------------------
// RegisterFile
// ---------------------------------------------------------------------------

std::int32_t RegisterFile::peek(std::uint32_t offset) const {
    if (offset >= kRegWordCount) throw ProtocolViolation("register offset out of range");
    return words_[offset];
}

void RegisterFile::poke(std::uint32_t offset, std::int32_t value) {
    if (offset >= kRegWordCount) throw ProtocolViolation("register offset out of range");
    words_[offset] = value;
}

void RegisterFile::record(RegisterTransaction::Side side, RegisterTransaction::Op op,
                          std::uint32_t offset, std::int32_t value) {
    if (tracing_) trace_.push_back({side, op, offset, value});
}

void RegisterFile::dump_trace(std::ostream& out) const {
    char line[64];
    for (std::size_t i = 0; i < trace_.size(); ++i) {
        const RegisterTransaction& t = trace_[i];
        std::snprintf(line, sizeof line, "%06zu %s %c 0x%04x 0x%08x\n", i,
                      t.side == RegisterTransaction::Side::PS ? "PS" : "PL",
                      t.op == RegisterTransaction::Op::Read ? 'R' : 'W', t.offset,
                      static_cast<std::uint32_t>(t.value));
        out << line;
    }
}

// ---------------------------------------------------------------------------
// Datapath primitives
// ---------------------------------------------------------------------------

FxMat3 systolic_matmul3(const FxMat3& a, const FxMat3& b, FxStatus& status) {
    // Output-stationary 3x3 PE grid. On wavefront t the element (i, j) sees
    // operands a(i, k) and b(k, j) with k = t - i - j; each PE owns one
    // 64-bit accumulator and rounds exactly once when drained.
    std::int64_t pe[3][3] = {};
    for (int t = 0; t <= 6; ++t) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const int k = t - i - j;
                if (k < 0 || k > 2) continue;
                fx_acc_add(pe[i][j],
                           static_cast<std::int64_t>(a[3 * i + k].raw) *
                               static_cast<std::int64_t>(b[3 * k + j].raw),
                           status);
            }
        }
    }
    FxMat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            status.track(std::abs(static_cast<double>(pe[i][j])) * 0x1p-32);
            out[3 * i + j] = fx_saturate(round_shift_ties_away(pe[i][j], 16), status);
        }
    return out;
}

FxVec3 systolic_matvec3(const FxMat3& a, const FxVec3& v, FxStatus& status) {
    // One PE per output row, vector elements marching past on the same
    // skewed schedule as the array above.
    std::int64_t pe[3] = {};
    for (int t = 0; t <= 4; ++t) {
        for (int i = 0; i < 3; ++i) {
            const int k = t - i;
            if (k < 0 || k > 2) continue;
            fx_acc_add(pe[i],
                       static_cast<std::int64_t>(a[3 * i + k].raw) *
                           static_cast<std::int64_t>(v[k].raw),
                       status);
        }
    }
    FxVec3 out;
    for (int i = 0; i < 3; ++i) {
        status.track(std::abs(static_cast<double>(pe[i])) * 0x1p-32);
        out[i] = fx_saturate(round_shift_ties_away(pe[i], 16), status);
    }
    return out;
}

namespace {

// Signed-cofactor index pairs for a row-major 3x3, C[r][c] listed flat.
struct CofactorSpec {
    int a, b, c, d;  // C = round((A[a]*A[b] - A[c]*A[d]) >> 16)
};
constexpr CofactorSpec kCofactors[9] = {
    {4, 8, 5, 7}, {5, 6, 3, 8}, {3, 7, 4, 6},
    {2, 7, 1, 8}, {0, 8, 2, 6}, {1, 6, 0, 7},
    {1, 5, 2, 4}, {2, 3, 0, 5}, {0, 4, 1, 3},
};

Fixed32 cofactor(const FxMat3& m, const CofactorSpec& s, FxStatus& status) {
    std::int64_t v = static_cast<std::int64_t>(m[s.a].raw) * m[s.b].raw;
    fx_acc_add(v, -(static_cast<std::int64_t>(m[s.c].raw) * m[s.d].raw), status);
    status.track(std::abs(static_cast<double>(v)) * 0x1p-32);
    return fx_saturate(round_shift_ties_away(v, 16), status);
}

Fixed32 determinant_from_cofactors(const FxMat3& m, const Fixed32 cof[9], FxStatus& status) {
    std::int64_t acc = 0;
    for (int k = 0; k < 3; ++k)
        fx_acc_add(acc, static_cast<std::int64_t>(m[k].raw) * cof[k].raw, status);
    status.track(std::abs(static_cast<double>(acc)) * 0x1p-32);
    return fx_saturate(round_shift_ties_away(acc, 16), status);
}

}  // namespace

FxMat3 cramer_inverse3(const FxMat3& a, FxStatus& status) {
    Fixed32 cof[9];
    for (int i = 0; i < 9; ++i) cof[i] = cofactor(a, kCofactors[i], status);
    const Fixed32 det = determinant_from_cofactors(a, cof, status);

    double n_max = 0.0;
    for (const Fixed32& e : a) n_max = std::max(n_max, std::abs(from_fixed(e)));
    if (std::abs(from_fixed(det)) < std::ldexp(n_max * n_max * n_max, -8))
        status.ill_conditioned = true;

    if (det.raw == 0) {
        status.divide_error = true;
        throw DivideByZero("fixed-point determinant is zero");
    }

    FxMat3 inv;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) inv[3 * i + k] = fx_div(cof[3 * k + i], det, status);
    return inv;
}

// ---------------------------------------------------------------------------
// OltaeCore
// ---------------------------------------------------------------------------

OltaeCore::OltaeCore(CycleModel model) : model_(model) {}

void OltaeCore::require(bool cond, const char* what) const {
    if (!cond) throw ProtocolViolation(what);
}

void OltaeCore::write_word(std::uint32_t offset, std::int32_t value) {
    require(state_.state == CoreStateId::IDLE, "register write outside IDLE");
    regs_.poke(offset, value);
    regs_.record(RegisterTransaction::Side::PS, RegisterTransaction::Op::Write, offset, value);
}

std::int32_t OltaeCore::read_word(std::uint32_t offset) {
    if (offset >= kRegOutBase)
        require(state_.state == CoreStateId::DONE, "output register read before DONE");
    const std::int32_t v = regs_.peek(offset);
    regs_.record(RegisterTransaction::Side::PS, RegisterTransaction::Op::Read, offset, v);
    return v;
}

void OltaeCore::load_inputs(const FxInputs& inputs) {
    const std::size_t n = inputs.terms.size();
    if (n > kMaxCorrespondences)
        throw ProtocolViolation("correspondence stream exceeds register file capacity");
    write_word(kRegNPoints, static_cast<std::int32_t>(n));
    std::uint32_t off = kRegStreamBase;
    for (const FxTerm& t : inputs.terms) {
        for (int i = 0; i < 3; ++i) write_word(off++, t.s[i].raw);
        for (int i = 0; i < 3; ++i) write_word(off++, t.y[i].raw);
        write_word(off++, t.w.raw);
    }
}

void OltaeCore::start() {
    require(state_.state == CoreStateId::IDLE, "start asserted outside IDLE");
    state_ = step_state(state_, Signals{.start = true});
}

void OltaeCore::reset() {
    require(state_.state != CoreStateId::COMPUTE, "reset asserted during COMPUTE");
    state_ = step_state(state_, Signals{.reset = true});
}

void OltaeCore::compute() {
    require(state_.state == CoreStateId::COMPUTE, "compute without start");

    FxStatus st;
    auto pl_read = [&](std::uint32_t offset) {
        const std::int32_t v = regs_.peek(offset);
        regs_.record(RegisterTransaction::Side::PL, RegisterTransaction::Op::Read, offset, v);
        return v;
    };
    auto pl_write = [&](std::uint32_t offset, std::int32_t v) {
        regs_.poke(offset, v);
        regs_.record(RegisterTransaction::Side::PL, RegisterTransaction::Op::Write, offset, v);
    };

    const std::int32_t n_raw = pl_read(kRegNPoints);
    if (n_raw < 3 || static_cast<std::uint32_t>(n_raw) > kMaxCorrespondences)
        throw ProtocolViolation("register file holds fewer than 3 correspondences");
    const std::uint32_t n = static_cast<std::uint32_t>(n_raw);

    // Fixed schedule: the pipeline length depends only on n, so the cycle
    // model is formula-based even when the divider flags an error.
    report_ = CycleReport{};
    report_.mac_ops = 15 * static_cast<std::int64_t>(n) + 30;
    report_.divides = 9;
    report_.modeled_cycles = model_.c_overhead + report_.mac_ops * model_.c_mac +
                             report_.divides * model_.c_div;

    // Stream accumulation of the weighted normal matrix and right-hand side.
    std::int64_t nacc[3][3] = {};
    std::int64_t racc[3] = {};
    std::uint32_t off = kRegStreamBase;
    for (std::uint32_t j = 0; j < n; ++j) {
        Fixed32 s[3], y[3], w;
        for (int i = 0; i < 3; ++i) s[i] = Fixed32{pl_read(off++)};
        for (int i = 0; i < 3; ++i) y[i] = Fixed32{pl_read(off++)};
        w = Fixed32{pl_read(off++)};

        Fixed32 u[3];
        for (int i = 0; i < 3; ++i) u[i] = fx_mul(w, s[i], st);
        for (int i = 0; i < 3; ++i)
            for (int k = i; k < 3; ++k)
                fx_acc_add(nacc[i][k],
                           static_cast<std::int64_t>(u[i].raw) *
                               static_cast<std::int64_t>(s[k].raw),
                           st);
        fx_acc_add(racc[0], static_cast<std::int64_t>(u[1].raw) * y[2].raw, st);
        fx_acc_add(racc[0], -(static_cast<std::int64_t>(u[2].raw) * y[1].raw), st);
        fx_acc_add(racc[1], static_cast<std::int64_t>(u[2].raw) * y[0].raw, st);
        fx_acc_add(racc[1], -(static_cast<std::int64_t>(u[0].raw) * y[2].raw), st);
        fx_acc_add(racc[2], static_cast<std::int64_t>(u[0].raw) * y[1].raw, st);
        fx_acc_add(racc[2], -(static_cast<std::int64_t>(u[1].raw) * y[0].raw), st);
    }

    std::int64_t diag_acc[3] = {nacc[1][1], nacc[0][0], nacc[0][0]};
    fx_acc_add(diag_acc[0], nacc[2][2], st);
    fx_acc_add(diag_acc[1], nacc[2][2], st);
    fx_acc_add(diag_acc[2], nacc[1][1], st);

    // Common power-of-two normalizer (see docs/fixed_point_datapath.md).
    std::int64_t max_abs = 0;
    for (int i = 0; i < 3; ++i) {
        max_abs = std::max(max_abs, std::abs(diag_acc[i]));
        for (int k = i + 1; k < 3; ++k) max_abs = std::max(max_abs, std::abs(nacc[i][k]));
    }
    int g = 0;
    constexpr std::int64_t target_raw = std::int64_t{16} << 16;
    while (32 + g < 62 && round_shift_ties_away(max_abs, 32 + g) > target_raw) ++g;

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
            const Fixed32 e =
                fx_saturate(-round_shift_ties_away(nacc[i][k], 32 + g), st);
            n_fx[3 * i + k] = e;
            n_fx[3 * k + i] = e;
        }
    FxVec3 r_fx;
    for (int i = 0; i < 3; ++i) r_fx[i] = drain(racc[i]);

    FxVec3 q_prime{};
    bool divide_error = false;
    try {
        const FxMat3 inv = cramer_inverse3(n_fx, st);
        FxVec3 neg_r;
        for (int i = 0; i < 3; ++i)
            neg_r[i] = fx_saturate(-static_cast<std::int64_t>(r_fx[i].raw), st);
        q_prime = systolic_matvec3(inv, neg_r, st);
    } catch (const DivideByZero&) {
        divide_error = true;  // surfaced through the status word
    }

    std::uint32_t status_word = kStatusDone;
    if (divide_error) status_word |= kStatusDivideError;
    if (st.saturation_count > 0) status_word |= kStatusSaturation;
    if (st.ill_conditioned) status_word |= kStatusIllConditioned;

    for (int i = 0; i < 3; ++i) pl_write(kRegQPrime0 + i, q_prime[i].raw);
    pl_write(kRegStatus, static_cast<std::int32_t>(status_word));

    state_ = step_state(state_, Signals{.complete = true});
}

CoreRunResult core_run(OltaeCore& core) {
    core.start();
    core.compute();
    CoreRunResult result;
    for (int i = 0; i < 3; ++i) result.q_prime[i] = Fixed32{core.read_word(kRegQPrime0 + i)};
    result.status_word = static_cast<std::uint32_t>(core.read_word(kRegStatus));
    result.report = core.last_report();
    return result;
}

}  // namespace oltae

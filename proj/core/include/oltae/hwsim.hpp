#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "oltae/fixedpoint.hpp"

namespace oltae {

// ---------------------------------------------------------------------------
// State machine
// ---------------------------------------------------------------------------

enum class CoreStateId { IDLE, COMPUTE, DONE };

const char* to_string(CoreStateId s);

/// Snapshot of the control interface: current state plus the latched
/// start/reset lines and the done output (done == 1 iff state == DONE).
struct CoreState {
    CoreStateId state = CoreStateId::IDLE;
    bool start = false;
    bool done = false;
    bool reset = false;
};

/// Input lines for one transition step. `complete` is the internal
/// end-of-computation strobe.
struct Signals {
    bool start = false;
    bool complete = false;
    bool reset = false;
};

/// Pure transition function for the three-state diagram:
///   IDLE -> COMPUTE on start, COMPUTE -> DONE on complete, DONE -> IDLE on
///   reset. Any other signal combination holds the current state.
CoreState step_state(const CoreState& current, const Signals& signals);

// ---------------------------------------------------------------------------
// Register file
// ---------------------------------------------------------------------------

// Word layout (documented in docs/register_map.md):
//   0                 n, number of correspondences (raw integer, not Q15.16)
//   1 + 7j + 0..2     s' triple of correspondence j
//   1 + 7j + 3..5     y' triple of correspondence j
//   1 + 7j + 6        weight word of correspondence j
//   8192..8194        q' output triple
//   8195              status word
constexpr std::uint32_t kRegNPoints = 0;
constexpr std::uint32_t kRegStreamBase = 1;
constexpr std::uint32_t kRegWordsPerTerm = 7;
constexpr std::uint32_t kRegOutBase = 8192;
constexpr std::uint32_t kRegQPrime0 = 8192;
constexpr std::uint32_t kRegQPrime1 = 8193;
constexpr std::uint32_t kRegQPrime2 = 8194;
constexpr std::uint32_t kRegStatus = 8195;
constexpr std::uint32_t kRegWordCount = 8196;
constexpr std::uint32_t kMaxCorrespondences = (kRegOutBase - kRegStreamBase) / kRegWordsPerTerm;

// Status word bits.
constexpr std::uint32_t kStatusDone = 1u << 0;
constexpr std::uint32_t kStatusDivideError = 1u << 1;
constexpr std::uint32_t kStatusSaturation = 1u << 2;
constexpr std::uint32_t kStatusIllConditioned = 1u << 3;

struct RegisterTransaction {
    enum class Side { PS, PL };
    enum class Op { Read, Write };
    Side side;
    Op op;
    std::uint32_t offset;
    std::int32_t value;
};

/// Software-accessible register words plus an optional transaction trace.
class RegisterFile {
public:
    std::int32_t peek(std::uint32_t offset) const;
    void poke(std::uint32_t offset, std::int32_t value);

    void record(RegisterTransaction::Side side, RegisterTransaction::Op op, std::uint32_t offset,
                std::int32_t value);
    void set_tracing(bool on) { tracing_ = on; }
    const std::vector<RegisterTransaction>& trace() const { return trace_; }
    /// One line per transaction: `<seq> <PS|PL> <R|W> <offset hex> <value hex>`.
    void dump_trace(std::ostream& out) const;

private:
    std::vector<std::int32_t> words_ = std::vector<std::int32_t>(kRegWordCount, 0);
    std::vector<RegisterTransaction> trace_;
    bool tracing_ = false;
};

// ---------------------------------------------------------------------------
// Datapath primitives
// ---------------------------------------------------------------------------

/// 3x3 systolic-array matrix multiply: a 2D grid of MAC processing elements
/// with A streaming in row-wise and B column-wise on a skewed schedule. Each
/// element keeps one 64-bit accumulator and rounds once on drain; the result
/// is bit-identical to the reference fx_matmul3.
FxMat3 systolic_matmul3(const FxMat3& a, const FxMat3& b, FxStatus& status);

/// Matrix-vector product on the same MAC principle (one PE per output row).
FxVec3 systolic_matvec3(const FxMat3& a, const FxVec3& v, FxStatus& status);

/// Cramer's-rule inverse: cofactors from 64-bit 2x2 products with one
/// rounding each, determinant by row-0 expansion against the rounded
/// cofactors (one rounding), every adjugate entry divided by the determinant
/// through the truncating divider. Throws DivideByZero when the fixed-point
/// determinant is exactly zero; flags ill_conditioned when
/// |det| < 2^-8 * max|entry|^3.
FxMat3 cramer_inverse3(const FxMat3& a, FxStatus& status);

// ---------------------------------------------------------------------------
// Core emulator
// ---------------------------------------------------------------------------

/// Cycle-accounting constants. Relative throughput model only; this makes no
/// absolute-latency claim.
struct CycleModel {
    std::int64_t c_mac = 1;
    std::int64_t c_div = 20;
    std::int64_t c_overhead = 64;
};

struct CycleReport {
    std::int64_t mac_ops = 0;
    std::int64_t divides = 0;
    std::int64_t modeled_cycles = 0;
};

struct CoreRunResult {
    FxVec3 q_prime;
    CycleReport report;
    std::uint32_t status_word = 0;
};

/// Transaction-level model of the attitude-estimation core. One owner drives
/// the state machine at a time; independent instances may run concurrently.
class OltaeCore {
public:
    explicit OltaeCore(CycleModel model = CycleModel{});

    /// Processor-side register write; legal only in IDLE.
    void write_word(std::uint32_t offset, std::int32_t value);
    /// Processor-side register read; output registers require DONE.
    std::int32_t read_word(std::uint32_t offset);

    /// Loads n plus the per-correspondence stream (IDLE only).
    void load_inputs(const FxInputs& inputs);

    void start();    ///< IDLE -> COMPUTE; ProtocolViolation outside IDLE.
    void compute();  ///< Runs the datapath, COMPUTE -> DONE.
    void reset();    ///< DONE -> IDLE (no-op in IDLE).

    const CoreState& state() const { return state_; }
    RegisterFile& registers() { return regs_; }
    const CycleReport& last_report() const { return report_; }

private:
    void require(bool cond, const char* what) const;

    CoreState state_;
    RegisterFile regs_;
    CycleModel model_;
    CycleReport report_;
};

/// Drives one full IDLE -> COMPUTE -> DONE pass over a loaded register file
/// and reads back the results.
CoreRunResult core_run(OltaeCore& core);

}  // namespace oltae

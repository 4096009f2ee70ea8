#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "liquidcast/numerics.hpp"

namespace liquidcast::cells {

using numerics::Matrix;
using numerics::Vector;

enum class ArchKind { Lstm, StrictCfc, Ltc, HybridCfc, CtLtc };

[[nodiscard]] const char* arch_name(ArchKind a) noexcept;
/// @throws Error{BadConfig} for an unknown name.
[[nodiscard]] ArchKind arch_from_name(const std::string& name);

/// Number of fixed-point iterations used to integrate the LTC ODE within one
/// external step (semi-implicit fused solver).
inline constexpr int kOdeUnfolds = 6;

/// Floor applied to the hybrid cell's learned time constants and to the decay
/// exponent inside its gate.
inline constexpr double kTimescaleFloor = 1e-3;

/// Cap on the hybrid gate's decay exponent. Without it, a floored time
/// constant drives the exponent to ~1000 and exp(-1000) underflows to 0,
/// breaking the guarantee that the gate stays strictly positive. exp(-700)
/// is still normal, so the gate lives in [exp(-700), exp(-kTimescaleFloor)].
inline constexpr double kGateExponentCap = 700.0;

/// Backbone width for the strict closed-form cell: max(2n, 32).
[[nodiscard]] constexpr int backbone_width(int hidden) noexcept {
  return hidden * 2 > 32 ? hidden * 2 : 32;
}

// ---------------------------------------------------------------------------
// Parameter containers. Matrices act on column vectors; concatenated inputs
// are ordered [x; h] (features first, hidden state second).
// ---------------------------------------------------------------------------

struct LstmParams {
  Matrix w_f, u_f;
  Vector b_f;
  Matrix w_i, u_i;
  Vector b_i;
  Matrix w_o, u_o;
  Vector b_o;
  Matrix w_c, u_c;
  Vector b_c;
};

struct StrictCfcParams {
  Matrix w_bb;  ///< backbone, (m x (d+n))
  Vector b_bb;
  Matrix w_g;  ///< state head, (n x m)
  Vector b_g;
  Matrix w_f;  ///< target head, (n x m)
  Vector b_f;
  Matrix w_a;  ///< gate slope head, (n x m)
  Vector b_a;
  Matrix w_b;  ///< gate offset head, (n x m)
  Vector b_b;
};

/// Shared by the fixed-step and the continuous-time (gap-driven) variants.
struct LtcParams {
  Matrix w_in;   ///< (n x d)
  Matrix w_rec;  ///< (n x n)
  Vector b;
  Vector log_tau;    ///< time constants stored as logs; tau = exp(log_tau)
  Vector attractor;  ///< per-unit attractor level A
};

struct HybridCfcParams {
  Matrix w_f;  ///< drive head, (n x (d+n))
  Vector b_f;
  Matrix w_tau;  ///< timescale head, (n x (d+n))
  Vector b_tau;
  Vector log_tau;
};

using CellParams =
    std::variant<LstmParams, StrictCfcParams, LtcParams, HybridCfcParams>;

/// One model: a recurrent cell plus the linear readout applied to the final
/// hidden state of a window.
struct ModelParams {
  ArchKind arch{ArchKind::Lstm};
  int hidden{0};  ///< n
  int input{0};   ///< d
  std::uint64_t seed{0};
  CellParams cell;
  Vector readout_w;
  double readout_b{0.0};
};

/// Named view of one trainable array (matrix or vector) inside a ModelParams.
/// The ordering returned by param_arrays is fixed and identical for two
/// containers built for the same architecture and sizes, which lets the
/// optimizer, the serializer and gradient containers walk them in lockstep.
struct ArrayRef {
  const char* name;
  double* data;
  std::size_t size;
};
struct ConstArrayRef {
  const char* name;
  const double* data;
  std::size_t size;
};

[[nodiscard]] std::vector<ArrayRef> param_arrays(ModelParams& p);
[[nodiscard]] std::vector<ConstArrayRef> param_arrays(const ModelParams& p);

/// Same architecture, sizes and seed, with every trainable array set to zero.
[[nodiscard]] ModelParams zeros_like(const ModelParams& p);

/// Fresh parameters for the given architecture: weight matrices drawn
/// Xavier-uniform (bound sqrt(6/(fan_in+fan_out))), biases and log time
/// constants zero, attractor levels uniform in [-1, 1]. Deterministic in
/// `seed`.
/// @throws Error{BadConfig} when hidden or input is not positive.
[[nodiscard]] ModelParams init_params(ArchKind arch, int hidden, int input,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Single-step updates. Traced variants keep every intermediate needed by the
// reverse pass; plain variants are thin wrappers.
// ---------------------------------------------------------------------------

struct LstmState {
  Vector h, c;
};

struct LstmTrace {
  Vector x, h_prev, c_prev;
  Vector f, i, o, g;  ///< gate activations; g is the tanh candidate
  Vector c, tanh_c, h;
};

struct StrictCfcTrace {
  Vector u;  ///< [x; h_prev]
  Vector s;  ///< backbone activation
  Vector g, f, sig;
  Vector h;
};

struct LtcTrace {
  Vector x;
  double delta{1.0};
  std::vector<Vector> h_sub;  ///< h before each unfold and after the last (kOdeUnfolds+1)
  std::vector<Vector> fgate;  ///< sigmoid gate per unfold
  std::vector<Vector> den;    ///< implicit-update denominator per unfold
};

struct HybridCfcTrace {
  Vector u;
  Vector f;    ///< tanh drive
  Vector sig;  ///< sigmoid of the timescale head
  Vector tau;  ///< floored time constants
  Vector a;    ///< unfloored decay rate 1/tau + |f|
  Vector g;    ///< exp(-max(a, floor))
  Vector h;
};

[[nodiscard]] LstmState lstm_step(const LstmParams& p, const Vector& x,
                                  const Vector& h_prev, const Vector& c_prev);
[[nodiscard]] LstmTrace lstm_step_traced(const LstmParams& p, const Vector& x,
                                         const Vector& h_prev,
                                         const Vector& c_prev);

[[nodiscard]] Vector strict_cfc_step(const StrictCfcParams& p, const Vector& x,
                                     const Vector& h_prev);
[[nodiscard]] StrictCfcTrace strict_cfc_step_traced(const StrictCfcParams& p,
                                                    const Vector& x,
                                                    const Vector& h_prev);

/// One external step of the liquid cell, integrating the ODE with kOdeUnfolds
/// fused semi-implicit iterations of length delta_t / kOdeUnfolds each.
/// @throws Error{NonPositiveGap} when delta_t <= 0.
[[nodiscard]] Vector ltc_step(const LtcParams& p, const Vector& x,
                              const Vector& h_prev, double delta_t);
[[nodiscard]] LtcTrace ltc_step_traced(const LtcParams& p, const Vector& x,
                                       const Vector& h_prev, double delta_t);

[[nodiscard]] Vector hybrid_cfc_step(const HybridCfcParams& p, const Vector& x,
                                     const Vector& h_prev);
[[nodiscard]] HybridCfcTrace hybrid_cfc_step_traced(const HybridCfcParams& p,
                                                    const Vector& x,
                                                    const Vector& h_prev);

// ---------------------------------------------------------------------------
// Whole-window evaluation.
// ---------------------------------------------------------------------------

/// Intermediates of one window pass, consumed by the training module's
/// reverse pass. Only the member matching the architecture is populated.
struct WindowTape {
  std::vector<LstmTrace> lstm;
  std::vector<StrictCfcTrace> cfc;
  std::vector<LtcTrace> ltc;
  std::vector<HybridCfcTrace> hybrid;
  Vector h_final;
};

/// Runs the cell across the rows of `window` (one row per time step) from a
/// zero initial state and applies the linear readout to the final hidden
/// state. `gaps` holds per-row elapsed days and is consumed only by the
/// continuous-time variant; pass an empty span for unit steps.
///
/// @throws Error{WindowLengthMismatch} when the window is empty or `gaps` is
///         nonempty with a different length.
/// @throws Error{ShapeMismatch}        when window columns != p.input.
/// @throws Error{NonPositiveGap}       when a gap is <= 0.
[[nodiscard]] double forward_window(const ModelParams& p, const Matrix& window,
                                    std::span<const double> gaps = {});
[[nodiscard]] double forward_window_traced(const ModelParams& p,
                                           const Matrix& window,
                                           std::span<const double> gaps,
                                           WindowTape& tape);

// ---------------------------------------------------------------------------
// Serialization: JSON with full round-trip fidelity for finite doubles.
// ---------------------------------------------------------------------------

[[nodiscard]] std::string save_params_string(const ModelParams& p);
/// @throws Error{BadConfig} on malformed input or shape inconsistencies.
[[nodiscard]] ModelParams load_params_string(const std::string& text);

void save_params_file(const ModelParams& p, const std::string& path);
[[nodiscard]] ModelParams load_params_file(const std::string& path);

}  // namespace liquidcast::cells

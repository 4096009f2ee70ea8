#include "liquidcast/training.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "liquidcast/rng.hpp"

namespace liquidcast::training {

namespace {

using cells::ArchKind;
using cells::WindowTape;
using numerics::Matrix;
using numerics::Vector;

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

// ---------------------------------------------------------------------------
// Reverse passes. Each consumes the tape of one window pass and accumulates
// parameter gradients for a single sample whose readout gradient is d_pred.
// ---------------------------------------------------------------------------

void backward_lstm(const cells::LstmParams& p, const WindowTape& tape,
                   Vector dh, cells::LstmParams& g) {
  const auto n = dh.size();
  Vector dc = Vector::Zero(n);
  for (auto it = tape.lstm.rbegin(); it != tape.lstm.rend(); ++it) {
    const cells::LstmTrace& t = *it;
    const Vector d_o = dh.cwiseProduct(t.tanh_c);
    dc += dh.cwiseProduct(t.o).cwiseProduct(
        Vector::Ones(n) - t.tanh_c.cwiseProduct(t.tanh_c));
    const Vector d_g = dc.cwiseProduct(t.i);
    const Vector d_i = dc.cwiseProduct(t.g);
    const Vector d_f = dc.cwiseProduct(t.c_prev);
    const Vector dc_prev = dc.cwiseProduct(t.f);

    const Vector zf = d_f.cwiseProduct(t.f).cwiseProduct(Vector::Ones(n) - t.f);
    const Vector zi = d_i.cwiseProduct(t.i).cwiseProduct(Vector::Ones(n) - t.i);
    const Vector zo = d_o.cwiseProduct(t.o).cwiseProduct(Vector::Ones(n) - t.o);
    const Vector zg =
        d_g.cwiseProduct(Vector::Ones(n) - t.g.cwiseProduct(t.g));

    g.w_f += zf * t.x.transpose();
    g.u_f += zf * t.h_prev.transpose();
    g.b_f += zf;
    g.w_i += zi * t.x.transpose();
    g.u_i += zi * t.h_prev.transpose();
    g.b_i += zi;
    g.w_o += zo * t.x.transpose();
    g.u_o += zo * t.h_prev.transpose();
    g.b_o += zo;
    g.w_c += zg * t.x.transpose();
    g.u_c += zg * t.h_prev.transpose();
    g.b_c += zg;

    dh = p.u_f.transpose() * zf + p.u_i.transpose() * zi +
         p.u_o.transpose() * zo + p.u_c.transpose() * zg;
    dc = dc_prev;
  }
}

void backward_strict_cfc(const cells::StrictCfcParams& p,
                         const WindowTape& tape, Vector dh,
                         cells::StrictCfcParams& g) {
  const auto n = dh.size();
  for (auto it = tape.cfc.rbegin(); it != tape.cfc.rend(); ++it) {
    const cells::StrictCfcTrace& t = *it;
    const Vector d_g = dh.cwiseProduct(Vector::Ones(n) - t.sig);
    const Vector d_f = dh.cwiseProduct(t.sig);
    const Vector d_sig = dh.cwiseProduct(t.f - t.g);

    const Vector zg =
        d_g.cwiseProduct(Vector::Ones(n) - t.g.cwiseProduct(t.g));
    const Vector zf =
        d_f.cwiseProduct(Vector::Ones(n) - t.f.cwiseProduct(t.f));
    // gate argument is slope + offset with a unit step, so the slope and
    // offset heads receive the same adjoint
    const Vector zs =
        d_sig.cwiseProduct(t.sig).cwiseProduct(Vector::Ones(n) - t.sig);

    g.w_g += zg * t.s.transpose();
    g.b_g += zg;
    g.w_f += zf * t.s.transpose();
    g.b_f += zf;
    g.w_a += zs * t.s.transpose();
    g.b_a += zs;
    g.w_b += zs * t.s.transpose();
    g.b_b += zs;

    const Vector ds = p.w_g.transpose() * zg + p.w_f.transpose() * zf +
                      (p.w_a.transpose() + p.w_b.transpose()) * zs;
    const Vector zbb =
        ds.cwiseProduct(Vector::Ones(t.s.size()) - t.s.cwiseProduct(t.s));
    g.w_bb += zbb * t.u.transpose();
    g.b_bb += zbb;
    const Vector du = p.w_bb.transpose() * zbb;
    dh = du.tail(n);
  }
}

void backward_ltc(const cells::LtcParams& p, const WindowTape& tape, Vector dh,
                  cells::LtcParams& g) {
  const auto n = dh.size();
  const Vector inv_tau = (-p.log_tau).array().exp();
  for (auto it = tape.ltc.rbegin(); it != tape.ltc.rend(); ++it) {
    const cells::LtcTrace& t = *it;
    const double dt = t.delta / static_cast<double>(cells::kOdeUnfolds);
    Vector dv = Vector::Zero(n);
    for (int l = cells::kOdeUnfolds - 1; l >= 0; --l) {
      const Vector& h_prev = t.h_sub[static_cast<std::size_t>(l)];
      const Vector& h_out = t.h_sub[static_cast<std::size_t>(l) + 1];
      const Vector& f = t.fgate[static_cast<std::size_t>(l)];
      const Vector& den = t.den[static_cast<std::size_t>(l)];

      const Vector dnum = dh.cwiseQuotient(den);
      const Vector dden = -dh.cwiseProduct(h_out).cwiseQuotient(den);

      Vector df = dt * (dnum.cwiseProduct(p.attractor) + dden);
      g.attractor += dt * dnum.cwiseProduct(f);
      // denominator term dt * inv_tau; d inv_tau / d log_tau = -inv_tau
      g.log_tau -= dt * dden.cwiseProduct(inv_tau);

      const Vector zf =
          df.cwiseProduct(f).cwiseProduct(Vector::Ones(n) - f);
      g.w_rec += zf * h_prev.transpose();
      dv += zf;
      dh = dnum + p.w_rec.transpose() * zf;
    }
    g.w_in += dv * t.x.transpose();
    g.b += dv;
  }
}

void backward_hybrid_cfc(const cells::HybridCfcParams& p,
                         const WindowTape& tape, Vector dh,
                         cells::HybridCfcParams& g) {
  const auto n = dh.size();
  const Vector exp_theta = p.log_tau.array().exp();
  for (auto it = tape.hybrid.rbegin(); it != tape.hybrid.rend(); ++it) {
    const cells::HybridCfcTrace& t = *it;
    const Vector h_prev = t.u.tail(n);
    const Vector f_over_a = t.f.cwiseQuotient(t.a);
    const Vector one_minus_g = Vector::Ones(n) - t.g;

    Vector df = dh.cwiseProduct(one_minus_g).cwiseQuotient(t.a);
    const Vector d_g = dh.cwiseProduct(h_prev - f_over_a);
    Vector dh_prev = dh.cwiseProduct(t.g);

    // decay rate a feeds the gate (through the floored exponent) and the
    // drive normalization f / a
    Vector da =
        -dh.cwiseProduct(one_minus_g).cwiseProduct(f_over_a).cwiseQuotient(t.a);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (t.a[i] > cells::kTimescaleFloor && t.a[i] < cells::kGateExponentCap) {
        da[i] -= d_g[i] * t.g[i];
      }
    }

    Vector d_tau = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      df[i] += da[i] * (t.f[i] > 0.0 ? 1.0 : (t.f[i] < 0.0 ? -1.0 : 0.0));
      d_tau[i] = -da[i] / (t.tau[i] * t.tau[i]);
      const double tau_raw = exp_theta[i] * t.sig[i];
      if (tau_raw <= cells::kTimescaleFloor) {
        d_tau[i] = 0.0;  // floored: no gradient into the timescale head
      }
    }
    g.log_tau += d_tau.cwiseProduct(t.tau);
    const Vector d_sig = d_tau.cwiseProduct(exp_theta);

    const Vector zf =
        df.cwiseProduct(Vector::Ones(n) - t.f.cwiseProduct(t.f));
    const Vector zs =
        d_sig.cwiseProduct(t.sig).cwiseProduct(Vector::Ones(n) - t.sig);

    g.w_f += zf * t.u.transpose();
    g.b_f += zf;
    g.w_tau += zs * t.u.transpose();
    g.b_tau += zs;

    const Vector du = p.w_f.transpose() * zf + p.w_tau.transpose() * zs;
    dh = dh_prev + du.tail(n);
  }
}

void accumulate_sample_grad(const ModelParams& p, double d_pred,
                            const WindowTape& tape, ModelParams& g) {
  g.readout_w += d_pred * tape.h_final;
  g.readout_b += d_pred;
  const Vector dh = d_pred * p.readout_w;
  switch (p.arch) {
    case ArchKind::Lstm:
      backward_lstm(std::get<cells::LstmParams>(p.cell), tape, dh,
                    std::get<cells::LstmParams>(g.cell));
      break;
    case ArchKind::StrictCfc:
      backward_strict_cfc(std::get<cells::StrictCfcParams>(p.cell), tape, dh,
                          std::get<cells::StrictCfcParams>(g.cell));
      break;
    case ArchKind::Ltc:
    case ArchKind::CtLtc:
      backward_ltc(std::get<cells::LtcParams>(p.cell), tape, dh,
                   std::get<cells::LtcParams>(g.cell));
      break;
    case ArchKind::HybridCfc:
      backward_hybrid_cfc(std::get<cells::HybridCfcParams>(p.cell), tape, dh,
                          std::get<cells::HybridCfcParams>(g.cell));
      break;
  }
}

bool sample_is_finite(const SequenceSample& s) {
  if (!std::isfinite(s.target)) return false;
  if (!s.window.allFinite()) return false;
  for (double gap : s.gaps) {
    if (!std::isfinite(gap)) return false;
  }
  return true;
}

}  // namespace

AdamState make_adam_state(const ModelParams& p) {
  return AdamState{cells::zeros_like(p), cells::zeros_like(p), 0};
}

double mse_loss(std::span<const double> predictions,
                std::span<const double> targets) {
  if (predictions.empty()) {
    throw Error(ErrorCode::EmptyBatch, "mse of an empty batch");
  }
  if (predictions.size() != targets.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "prediction and target lengths differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - targets[i];
    sum += e * e;
  }
  return sum / static_cast<double>(predictions.size());
}

GradResult grad(const ModelParams& p, std::span<const SequenceSample> samples,
                std::span<const std::size_t> batch_indices) {
  if (batch_indices.empty()) {
    throw Error(ErrorCode::EmptyBatch, "gradient of an empty batch");
  }
  const double batch_n = static_cast<double>(batch_indices.size());
  GradResult out{cells::zeros_like(p), 0.0};
  double loss_sum = 0.0;
  WindowTape tape;
  for (std::size_t idx : batch_indices) {
    const SequenceSample& s = samples[idx];
    const double pred = cells::forward_window_traced(p, s.window, s.gaps, tape);
    if (!std::isfinite(pred)) {
      throw Error(ErrorCode::NonFiniteForward,
                  "non-finite prediction in forward pass");
    }
    const double err = pred - s.target;
    loss_sum += err * err;
    accumulate_sample_grad(p, 2.0 * err / batch_n, tape, out.grads);
  }
  out.loss = loss_sum / batch_n;
  if (!std::isfinite(out.loss)) {
    throw Error(ErrorCode::NonFiniteForward, "non-finite batch loss");
  }
  return out;
}

GradResult grad(const ModelParams& p, std::span<const SequenceSample> batch) {
  std::vector<std::size_t> all(batch.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return grad(p, batch, all);
}

double global_norm(const ModelParams& g) {
  double sq = 0.0;
  for (const cells::ConstArrayRef& a : cells::param_arrays(g)) {
    for (std::size_t i = 0; i < a.size; ++i) sq += a.data[i] * a.data[i];
  }
  return std::sqrt(sq);
}

double clip_gradients(ModelParams& g, double max_norm) {
  const double norm = global_norm(g);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (const cells::ArrayRef& a : cells::param_arrays(g)) {
      for (std::size_t i = 0; i < a.size; ++i) a.data[i] *= scale;
    }
  }
  return norm;
}

void adam_step(ModelParams& p, AdamState& state, ModelParams g,
               const TrainConfig& cfg) {
  auto pa = cells::param_arrays(p);
  // coupled L2 decay enters the gradient before clipping and before moments
  {
    auto ga = cells::param_arrays(g);
    for (std::size_t k = 0; k < pa.size(); ++k) {
      for (std::size_t i = 0; i < pa[k].size; ++i) {
        ga[k].data[i] += cfg.weight_decay * pa[k].data[i];
      }
    }
  }
  clip_gradients(g, cfg.clip_norm);
  state.step += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  auto ga = cells::param_arrays(g);
  auto ma = cells::param_arrays(state.m);
  auto va = cells::param_arrays(state.v);
  for (std::size_t k = 0; k < pa.size(); ++k) {
    for (std::size_t i = 0; i < pa[k].size; ++i) {
      const double gi = ga[k].data[i];
      double& m = ma[k].data[i];
      double& v = va[k].data[i];
      m = kBeta1 * m + (1.0 - kBeta1) * gi;
      v = kBeta2 * v + (1.0 - kBeta2) * gi * gi;
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      pa[k].data[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + kEps);
    }
  }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed,
                                     int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed + static_cast<std::uint64_t>(epoch));
  rng.shuffle(order);
  return order;
}

EpochStats run_epoch(ModelParams& p, AdamState& state,
                     std::span<const SequenceSample> samples,
                     std::span<const std::size_t> order, const TrainConfig& cfg,
                     int epoch_index) {
  if (cfg.batch_size <= 0) {
    throw Error(ErrorCode::BadConfig, "batch size must be positive");
  }
  EpochStats stats;
  stats.epoch = epoch_index;
  double loss_sum = 0.0;
  int used = 0;
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  for (std::size_t begin = 0; begin < order.size(); begin += bs) {
    const std::size_t end = std::min(begin + bs, order.size());
    const std::span<const std::size_t> batch = order.subspan(begin, end - begin);
    stats.batches += 1;
    bool ok = true;
    for (std::size_t idx : batch) {
      if (!sample_is_finite(samples[idx])) {
        ok = false;
        break;
      }
    }
    if (ok) {
      try {
        GradResult r = grad(p, samples, batch);
        adam_step(p, state, std::move(r.grads), cfg);
        loss_sum += r.loss;
        used += 1;
        continue;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteForward) throw;
      }
    }
    stats.batches_skipped += 1;
  }
  stats.mean_loss = used > 0 ? loss_sum / used
                             : std::numeric_limits<double>::quiet_NaN();
  return stats;
}

TrainResult train(ModelParams p, std::span<const SequenceSample> samples,
                  const TrainConfig& cfg) {
  if (cfg.epochs > 0 && samples.empty()) {
    throw Error(ErrorCode::EmptyBatch, "training requires at least one sample");
  }
  TrainResult result;
  AdamState state = make_adam_state(p);
  int attempted = 0;
  int used = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    const std::vector<std::size_t> order =
        epoch_order(samples.size(), cfg.seed, e);
    EpochStats stats = run_epoch(p, state, samples, order, cfg, e);
    attempted += stats.batches;
    used += stats.batches - stats.batches_skipped;
    result.trace.push_back(stats);
  }
  if (attempted > 0 && used == 0) {
    throw Error(ErrorCode::AllBatchesSkipped,
                "every batch in every epoch was skipped");
  }
  result.params = std::move(p);
  return result;
}

}  // namespace liquidcast::training

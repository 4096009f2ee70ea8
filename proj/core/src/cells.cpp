#include "liquidcast/cells.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "liquidcast/rng.hpp"

namespace liquidcast::cells {

namespace {

using nlohmann::json;

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector sigmoid_v(const Vector& z) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
  return out;
}

Vector tanh_v(const Vector& z) { return z.array().tanh(); }

Vector concat_xh(const Vector& x, const Vector& h) {
  Vector u(x.size() + h.size());
  u.head(x.size()) = x;
  u.tail(h.size()) = h;
  return u;
}

void require(bool ok, ErrorCode code, const char* what) {
  if (!ok) throw Error(code, what);
}

struct ArrayShape {
  const char* name;
  Eigen::Index rows, cols;
};

/// Allocates zeroed parameter arrays with the canonical shapes for one
/// architecture. init_params, zeros_like and the deserializer all build on
/// this so shapes can never drift apart.
ModelParams allocate_params(ArchKind arch, int n, int d,
                            std::uint64_t seed) {
  require(n > 0 && d > 0, ErrorCode::BadConfig,
          "hidden and input sizes must be positive");
  ModelParams p;
  p.arch = arch;
  p.hidden = n;
  p.input = d;
  p.seed = seed;
  switch (arch) {
    case ArchKind::Lstm: {
      LstmParams c;
      for (Matrix* m : {&c.w_f, &c.w_i, &c.w_o, &c.w_c}) m->setZero(n, d);
      for (Matrix* m : {&c.u_f, &c.u_i, &c.u_o, &c.u_c}) m->setZero(n, n);
      for (Vector* v : {&c.b_f, &c.b_i, &c.b_o, &c.b_c}) v->setZero(n);
      p.cell = std::move(c);
      break;
    }
    case ArchKind::StrictCfc: {
      const int m = backbone_width(n);
      StrictCfcParams c;
      c.w_bb.setZero(m, d + n);
      c.b_bb.setZero(m);
      for (Matrix* w : {&c.w_g, &c.w_f, &c.w_a, &c.w_b}) w->setZero(n, m);
      for (Vector* v : {&c.b_g, &c.b_f, &c.b_a, &c.b_b}) v->setZero(n);
      p.cell = std::move(c);
      break;
    }
    case ArchKind::Ltc:
    case ArchKind::CtLtc: {
      LtcParams c;
      c.w_in.setZero(n, d);
      c.w_rec.setZero(n, n);
      c.b.setZero(n);
      c.log_tau.setZero(n);
      c.attractor.setZero(n);
      p.cell = std::move(c);
      break;
    }
    case ArchKind::HybridCfc: {
      HybridCfcParams c;
      c.w_f.setZero(n, d + n);
      c.b_f.setZero(n);
      c.w_tau.setZero(n, d + n);
      c.b_tau.setZero(n);
      c.log_tau.setZero(n);
      p.cell = std::move(c);
      break;
    }
  }
  p.readout_w.setZero(n);
  p.readout_b = 0.0;
  return p;
}

template <typename Ref, typename Params>
std::vector<Ref> collect_arrays(Params& p) {
  std::vector<Ref> out;
  auto add_m = [&out](const char* name, auto& m) {
    out.push_back(Ref{name, m.data(), static_cast<std::size_t>(m.size())});
  };
  std::visit(
      [&](auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LstmParams>) {
          add_m("w_f", c.w_f), add_m("u_f", c.u_f), add_m("b_f", c.b_f);
          add_m("w_i", c.w_i), add_m("u_i", c.u_i), add_m("b_i", c.b_i);
          add_m("w_o", c.w_o), add_m("u_o", c.u_o), add_m("b_o", c.b_o);
          add_m("w_c", c.w_c), add_m("u_c", c.u_c), add_m("b_c", c.b_c);
        } else if constexpr (std::is_same_v<T, StrictCfcParams>) {
          add_m("w_bb", c.w_bb), add_m("b_bb", c.b_bb);
          add_m("w_g", c.w_g), add_m("b_g", c.b_g);
          add_m("w_f", c.w_f), add_m("b_f", c.b_f);
          add_m("w_a", c.w_a), add_m("b_a", c.b_a);
          add_m("w_b", c.w_b), add_m("b_b", c.b_b);
        } else if constexpr (std::is_same_v<T, LtcParams>) {
          add_m("w_in", c.w_in), add_m("w_rec", c.w_rec), add_m("b", c.b);
          add_m("log_tau", c.log_tau), add_m("attractor", c.attractor);
        } else {
          add_m("w_f", c.w_f), add_m("b_f", c.b_f);
          add_m("w_tau", c.w_tau), add_m("b_tau", c.b_tau);
          add_m("log_tau", c.log_tau);
        }
      },
      p.cell);
  add_m("readout_w", p.readout_w);
  out.push_back(Ref{"readout_b", &p.readout_b, 1});
  return out;
}

void xavier_fill(Matrix& m, Rng& rng) {
  // fan_in = columns (input side), fan_out = rows (output side)
  const double bound =
      std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-bound, bound);
  }
}

void xavier_fill_vector(Vector& v, Eigen::Index fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + 1));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = rng.uniform(-bound, bound);
  }
}

}  // namespace

const char* arch_name(ArchKind a) noexcept {
  switch (a) {
    case ArchKind::Lstm: return "lstm";
    case ArchKind::StrictCfc: return "strict_cfc";
    case ArchKind::Ltc: return "ltc";
    case ArchKind::HybridCfc: return "hybrid_cfc";
    case ArchKind::CtLtc: return "ct_ltc";
  }
  return "unknown";
}

ArchKind arch_from_name(const std::string& name) {
  for (ArchKind a : {ArchKind::Lstm, ArchKind::StrictCfc, ArchKind::Ltc,
                     ArchKind::HybridCfc, ArchKind::CtLtc}) {
    if (name == arch_name(a)) return a;
  }
  throw Error(ErrorCode::BadConfig, "unknown architecture '" + name + "'");
}

std::vector<ArrayRef> param_arrays(ModelParams& p) {
  return collect_arrays<ArrayRef>(p);
}

std::vector<ConstArrayRef> param_arrays(const ModelParams& p) {
  return collect_arrays<ConstArrayRef>(p);
}

ModelParams zeros_like(const ModelParams& p) {
  return allocate_params(p.arch, p.hidden, p.input, p.seed);
}

ModelParams init_params(ArchKind arch, int hidden, int input,
                        std::uint64_t seed) {
  ModelParams p = allocate_params(arch, hidden, input, seed);
  Rng rng(seed);
  std::visit(
      [&](auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LstmParams>) {
          for (Matrix* m : {&c.w_f, &c.u_f, &c.w_i, &c.u_i, &c.w_o, &c.u_o,
                            &c.w_c, &c.u_c}) {
            xavier_fill(*m, rng);
          }
        } else if constexpr (std::is_same_v<T, StrictCfcParams>) {
          for (Matrix* m : {&c.w_bb, &c.w_g, &c.w_f, &c.w_a, &c.w_b}) {
            xavier_fill(*m, rng);
          }
        } else if constexpr (std::is_same_v<T, LtcParams>) {
          xavier_fill(c.w_in, rng);
          xavier_fill(c.w_rec, rng);
          for (Eigen::Index i = 0; i < c.attractor.size(); ++i) {
            c.attractor[i] = rng.uniform(-1.0, 1.0);
          }
        } else {
          xavier_fill(c.w_f, rng);
          xavier_fill(c.w_tau, rng);
        }
      },
      p.cell);
  xavier_fill_vector(p.readout_w, hidden, rng);
  return p;
}

// ---------------------------------------------------------------------------
// Steps
// ---------------------------------------------------------------------------

LstmTrace lstm_step_traced(const LstmParams& p, const Vector& x,
                           const Vector& h_prev, const Vector& c_prev) {
  require(x.size() == p.w_f.cols(), ErrorCode::ShapeMismatch,
          "lstm input size");
  require(h_prev.size() == p.u_f.cols() && c_prev.size() == h_prev.size(),
          ErrorCode::ShapeMismatch, "lstm state size");
  LstmTrace t;
  t.x = x;
  t.h_prev = h_prev;
  t.c_prev = c_prev;
  t.f = sigmoid_v(p.w_f * x + p.u_f * h_prev + p.b_f);
  t.i = sigmoid_v(p.w_i * x + p.u_i * h_prev + p.b_i);
  t.o = sigmoid_v(p.w_o * x + p.u_o * h_prev + p.b_o);
  t.g = tanh_v(p.w_c * x + p.u_c * h_prev + p.b_c);
  t.c = t.f.cwiseProduct(c_prev) + t.i.cwiseProduct(t.g);
  t.tanh_c = tanh_v(t.c);
  t.h = t.o.cwiseProduct(t.tanh_c);
  return t;
}

LstmState lstm_step(const LstmParams& p, const Vector& x, const Vector& h_prev,
                    const Vector& c_prev) {
  LstmTrace t = lstm_step_traced(p, x, h_prev, c_prev);
  return LstmState{std::move(t.h), std::move(t.c)};
}

StrictCfcTrace strict_cfc_step_traced(const StrictCfcParams& p,
                                      const Vector& x, const Vector& h_prev) {
  require(x.size() + h_prev.size() == p.w_bb.cols(), ErrorCode::ShapeMismatch,
          "strict cfc input size");
  require(h_prev.size() == p.w_g.rows(), ErrorCode::ShapeMismatch,
          "strict cfc state size");
  StrictCfcTrace t;
  t.u = concat_xh(x, h_prev);
  t.s = tanh_v(p.w_bb * t.u + p.b_bb);
  t.g = tanh_v(p.w_g * t.s + p.b_g);
  t.f = tanh_v(p.w_f * t.s + p.b_f);
  // gate argument: slope * dt + offset, with the step size fixed at one day
  const Vector ta = p.w_a * t.s + p.b_a;
  const Vector tb = p.w_b * t.s + p.b_b;
  t.sig = sigmoid_v(ta + tb);
  t.h = t.g.cwiseProduct(Vector::Ones(t.g.size()) - t.sig) +
        t.sig.cwiseProduct(t.f);
  return t;
}

Vector strict_cfc_step(const StrictCfcParams& p, const Vector& x,
                       const Vector& h_prev) {
  return strict_cfc_step_traced(p, x, h_prev).h;
}

LtcTrace ltc_step_traced(const LtcParams& p, const Vector& x,
                         const Vector& h_prev, double delta_t) {
  require(delta_t > 0.0, ErrorCode::NonPositiveGap,
          "ltc step requires a positive time gap");
  require(x.size() == p.w_in.cols(), ErrorCode::ShapeMismatch,
          "ltc input size");
  require(h_prev.size() == p.w_rec.cols(), ErrorCode::ShapeMismatch,
          "ltc state size");
  LtcTrace t;
  t.x = x;
  t.delta = delta_t;
  const double dt = delta_t / static_cast<double>(kOdeUnfolds);
  const Vector inv_tau = (-p.log_tau).array().exp();
  const Vector v = p.w_in * x + p.b;  // input projection, reused per unfold
  t.h_sub.reserve(kOdeUnfolds + 1);
  t.fgate.reserve(kOdeUnfolds);
  t.den.reserve(kOdeUnfolds);
  t.h_sub.push_back(h_prev);
  for (int l = 0; l < kOdeUnfolds; ++l) {
    const Vector& h = t.h_sub.back();
    const Vector f = sigmoid_v(p.w_rec * h + v);
    const Vector den =
        (Vector::Ones(h.size()) + dt * (inv_tau + f)).eval();
    const Vector h_next =
        (h + dt * f.cwiseProduct(p.attractor)).cwiseQuotient(den);
    t.fgate.push_back(f);
    t.den.push_back(den);
    t.h_sub.push_back(h_next);
  }
  return t;
}

Vector ltc_step(const LtcParams& p, const Vector& x, const Vector& h_prev,
                double delta_t) {
  return ltc_step_traced(p, x, h_prev, delta_t).h_sub.back();
}

HybridCfcTrace hybrid_cfc_step_traced(const HybridCfcParams& p,
                                      const Vector& x, const Vector& h_prev) {
  require(x.size() + h_prev.size() == p.w_f.cols(), ErrorCode::ShapeMismatch,
          "hybrid cfc input size");
  require(h_prev.size() == p.w_f.rows(), ErrorCode::ShapeMismatch,
          "hybrid cfc state size");
  HybridCfcTrace t;
  t.u = concat_xh(x, h_prev);
  t.f = tanh_v(p.w_f * t.u + p.b_f);
  t.sig = sigmoid_v(p.w_tau * t.u + p.b_tau);
  t.tau = (p.log_tau.array().exp() * t.sig.array())
              .max(kTimescaleFloor)
              .matrix();
  t.a = t.tau.cwiseInverse() + t.f.cwiseAbs();
  t.g = (-t.a.array().max(kTimescaleFloor).min(kGateExponentCap))
            .exp()
            .matrix();
  t.h = t.g.cwiseProduct(h_prev) +
        (Vector::Ones(t.g.size()) - t.g)
            .cwiseProduct(t.f.cwiseQuotient(t.a));
  return t;
}

Vector hybrid_cfc_step(const HybridCfcParams& p, const Vector& x,
                       const Vector& h_prev) {
  return hybrid_cfc_step_traced(p, x, h_prev).h;
}

// ---------------------------------------------------------------------------
// Window evaluation
// ---------------------------------------------------------------------------

namespace {

template <bool WithTape>
double run_window(const ModelParams& p, const Matrix& window,
                  std::span<const double> gaps, WindowTape* tape) {
  require(window.rows() >= 1, ErrorCode::WindowLengthMismatch,
          "window must contain at least one row");
  require(gaps.empty() || static_cast<Eigen::Index>(gaps.size()) == window.rows(),
          ErrorCode::WindowLengthMismatch,
          "gap vector length must match window rows");
  require(window.cols() == p.input, ErrorCode::ShapeMismatch,
          "window columns must match the model input size");
  require(p.readout_w.size() == p.hidden, ErrorCode::ShapeMismatch,
          "readout size must match hidden size");
  const Eigen::Index steps = window.rows();
  Vector h = Vector::Zero(p.hidden);
  Vector c = Vector::Zero(p.hidden);

  for (Eigen::Index row = 0; row < steps; ++row) {
    const Vector x = window.row(row).transpose();
    switch (p.arch) {
      case ArchKind::Lstm: {
        LstmTrace t = lstm_step_traced(std::get<LstmParams>(p.cell), x, h, c);
        h = t.h;
        c = t.c;
        if constexpr (WithTape) tape->lstm.push_back(std::move(t));
        break;
      }
      case ArchKind::StrictCfc: {
        StrictCfcTrace t =
            strict_cfc_step_traced(std::get<StrictCfcParams>(p.cell), x, h);
        h = t.h;
        if constexpr (WithTape) tape->cfc.push_back(std::move(t));
        break;
      }
      case ArchKind::Ltc:
      case ArchKind::CtLtc: {
        const double gap =
            (p.arch == ArchKind::CtLtc && !gaps.empty()) ? gaps[row] : 1.0;
        LtcTrace t =
            ltc_step_traced(std::get<LtcParams>(p.cell), x, h, gap);
        h = t.h_sub.back();
        if constexpr (WithTape) tape->ltc.push_back(std::move(t));
        break;
      }
      case ArchKind::HybridCfc: {
        HybridCfcTrace t =
            hybrid_cfc_step_traced(std::get<HybridCfcParams>(p.cell), x, h);
        h = t.h;
        if constexpr (WithTape) tape->hybrid.push_back(std::move(t));
        break;
      }
    }
  }
  if constexpr (WithTape) tape->h_final = h;
  return p.readout_w.dot(h) + p.readout_b;
}

}  // namespace

double forward_window(const ModelParams& p, const Matrix& window,
                      std::span<const double> gaps) {
  return run_window<false>(p, window, gaps, nullptr);
}

double forward_window_traced(const ModelParams& p, const Matrix& window,
                             std::span<const double> gaps, WindowTape& tape) {
  tape = WindowTape{};
  return run_window<true>(p, window, gaps, &tape);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string save_params_string(const ModelParams& p) {
  json doc;
  doc["format"] = "liquidcast-params";
  doc["version"] = 1;
  doc["arch"] = arch_name(p.arch);
  doc["hidden"] = p.hidden;
  doc["input"] = p.input;
  doc["seed"] = p.seed;
  json arrays = json::array();
  for (const ConstArrayRef& a : param_arrays(p)) {
    json entry;
    entry["name"] = a.name;
    entry["data"] = std::vector<double>(a.data, a.data + a.size);
    arrays.push_back(std::move(entry));
  }
  doc["arrays"] = std::move(arrays);
  return doc.dump();
}

ModelParams load_params_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig,
                std::string("cannot parse parameter JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "liquidcast-params") {
      throw Error(ErrorCode::BadConfig, "not a parameter file");
    }
    const ArchKind arch = arch_from_name(doc.at("arch").get<std::string>());
    ModelParams p =
        allocate_params(arch, doc.at("hidden").get<int>(),
                        doc.at("input").get<int>(),
                        doc.at("seed").get<std::uint64_t>());
    std::vector<ArrayRef> refs = param_arrays(p);
    const json& arrays = doc.at("arrays");
    if (arrays.size() != refs.size()) {
      throw Error(ErrorCode::BadConfig, "unexpected number of arrays");
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const json& entry = arrays.at(i);
      if (entry.at("name").get<std::string>() != refs[i].name) {
        throw Error(ErrorCode::BadConfig,
                    "array order mismatch at '" + std::string(refs[i].name) +
                        "'");
      }
      const auto values = entry.at("data").get<std::vector<double>>();
      if (values.size() != refs[i].size) {
        throw Error(ErrorCode::BadConfig,
                    "array size mismatch at '" + std::string(refs[i].name) +
                        "'");
      }
      std::memcpy(refs[i].data, values.data(), values.size() * sizeof(double));
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig,
                std::string("malformed parameter JSON: ") + e.what());
  }
}

void save_params_file(const ModelParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::BadConfig, "cannot open '" + path + "'");
  out << save_params_string(p);
  if (!out.good()) {
    throw Error(ErrorCode::BadConfig, "failed writing '" + path + "'");
  }
}

ModelParams load_params_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadConfig, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_params_string(buf.str());
}

}  // namespace liquidcast::cells

#include "sfc/pcm.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sfc/kernels/kernels.hpp"

namespace sfc::pcm {

namespace {

constexpr std::array<std::string_view, kTensorCount> kNames = {
    "fch1.w", "fch1.b", "fch2.w", "fch2.b", "fc1.w", "fc1.b",
    "gru.w_xr", "gru.w_xz", "gru.w_xn", "gru.b_xr", "gru.b_xz", "gru.b_xn",
    "gru.w_hr", "gru.w_hz", "gru.w_hn", "gru.b_hr", "gru.b_hz", "gru.b_hn",
    "fc3.w", "fc3.b", "fc4.w", "fc4.b"};

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t PcmConfig::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, hidden);
  for (const Vec5* v : {&obs_scale, &error_scale, &eps_scale, &obs_weight, &eps_weight})
    for (double d : *v) h = fnv1a(h, std::bit_cast<std::uint64_t>(d));
  return h;
}

PcmParams::PcmParams(const PcmConfig& cfg) : cfg_(cfg) {
  const std::size_t h = cfg.hidden;
  const std::array<std::pair<std::size_t, std::size_t>, kTensorCount> shapes = {{
      {h, kObsDim}, {h, 1}, {h, h}, {h, 1},      // FCh1, FCh2
      {h, kInputDim}, {h, 1},                    // FC1
      {h, h}, {h, h}, {h, h}, {h, 1}, {h, 1}, {h, 1},  // GRU input side
      {h, h}, {h, h}, {h, h}, {h, 1}, {h, 1}, {h, 1},  // GRU recurrent side
      {kObsDim, h}, {kObsDim, 1}, {kEpsDim, h}, {kEpsDim, 1},
  }};
  std::size_t offset = 0;
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    layout_[i] = {kNames[i], shapes[i].first, shapes[i].second, offset};
    offset += layout_[i].size();
  }
  data_.assign(offset, 0.0);
}

PcmParams PcmParams::random(const PcmConfig& cfg, std::uint64_t seed) {
  PcmParams p(cfg);
  Rng rng(seed);
  auto fill = [&](Tensor w, Tensor b, std::size_t fan_in) {
    const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : p.tensor(w)) x = rng.uniform(-k, k);
    for (double& x : p.tensor(b)) x = rng.uniform(-k, k);
  };
  const std::size_t h = cfg.hidden;
  fill(Tensor::Fch1W, Tensor::Fch1B, kObsDim);
  fill(Tensor::Fch2W, Tensor::Fch2B, h);
  fill(Tensor::Fc1W, Tensor::Fc1B, kInputDim);
  fill(Tensor::GruWxr, Tensor::GruBxr, h);
  fill(Tensor::GruWxz, Tensor::GruBxz, h);
  fill(Tensor::GruWxn, Tensor::GruBxn, h);
  fill(Tensor::GruWhr, Tensor::GruBhr, h);
  fill(Tensor::GruWhz, Tensor::GruBhz, h);
  fill(Tensor::GruWhn, Tensor::GruBhn, h);
  fill(Tensor::Fc3W, Tensor::Fc3B, h);
  fill(Tensor::Fc4W, Tensor::Fc4B, h);
  return p;
}

std::span<double> PcmParams::tensor(Tensor t) {
  const TensorInfo& i = info(t);
  return std::span<double>(data_).subspan(i.offset, i.size());
}

std::span<const double> PcmParams::tensor(Tensor t) const {
  const TensorInfo& i = info(t);
  return std::span<const double>(data_).subspan(i.offset, i.size());
}

std::span<const double> PcmParams::range(Tensor first, Tensor last) const {
  const TensorInfo& a = info(first);
  const TensorInfo& b = info(last);
  return std::span<const double>(data_).subspan(a.offset, b.offset + b.size() - a.offset);
}

std::span<double> PcmParams::range(Tensor first, Tensor last) {
  const TensorInfo& a = info(first);
  const TensorInfo& b = info(last);
  return std::span<double>(data_).subspan(a.offset, b.offset + b.size() - a.offset);
}

void PcmParams::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool PcmParams::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Forward pieces

namespace {

struct HiddenInitCache {
  std::array<double, kObsDim> in{};
  std::vector<double> g;   // tanh(FCh1)
  std::vector<double> h0;  // tanh(FCh2)
};

void hidden_init_forward(std::span<const double> o0, const PcmParams& p, HiddenInitCache& c) {
  const std::size_t h = p.hidden();
  const auto& cfg = p.config();
  for (std::size_t i = 0; i < kObsDim; ++i) c.in[i] = o0[i] / cfg.obs_scale[i];
  c.g.resize(h);
  c.h0.resize(h);
  kernels::gemv(p.tensor(Tensor::Fch1W), h, kObsDim, c.in, p.tensor(Tensor::Fch1B), c.g);
  for (double& v : c.g) v = std::tanh(v);
  kernels::gemv(p.tensor(Tensor::Fch2W), h, h, c.g, p.tensor(Tensor::Fch2B), c.h0);
  for (double& v : c.h0) v = std::tanh(v);
}

// Per-step activations kept for the backward pass.
struct StepCache {
  std::array<double, kInputDim> in{};
  std::span<double> x, r, z, n, hn, h_prev, h;
};

// Buffers for a whole segment, laid out [step][H].
struct SegmentCache {
  std::size_t hidden = 0;
  std::vector<double> in, x, r, z, n, hn, h_prev, h;
  std::vector<double> gx, gh;  // scratch, 3H each

  void resize(std::size_t steps, std::size_t hdim) {
    hidden = hdim;
    in.assign(steps * kInputDim, 0.0);
    for (auto* v : {&x, &r, &z, &n, &hn, &h_prev, &h}) v->assign(steps * hdim, 0.0);
    gx.assign(3 * hdim, 0.0);
    gh.assign(3 * hdim, 0.0);
  }
  std::span<double> at(std::vector<double>& v, std::size_t t) { return std::span<double>(v).subspan(t * hidden, hidden); }
};

// Computes one FC1 + GRU step. `x,r,z,n,hn,h_out` must each hold H values.
void cell_forward(std::span<const double> in, std::span<const double> h_prev, const PcmParams& p, std::span<double> x,
                  std::span<double> r, std::span<double> z, std::span<double> n, std::span<double> hn,
                  std::span<double> h_out, std::span<double> gx, std::span<double> gh) {
  const std::size_t h = p.hidden();
  kernels::gemv(p.tensor(Tensor::Fc1W), h, kInputDim, in, p.tensor(Tensor::Fc1B), x);
  for (double& v : x) v = std::tanh(v);
  kernels::gemv(p.range(Tensor::GruWxr, Tensor::GruWxn), 3 * h, h, x, p.range(Tensor::GruBxr, Tensor::GruBxn), gx);
  kernels::gemv(p.range(Tensor::GruWhr, Tensor::GruWhn), 3 * h, h, h_prev, p.range(Tensor::GruBhr, Tensor::GruBhn),
                gh);
  for (std::size_t i = 0; i < h; ++i) {
    r[i] = sigmoid(gx[i] + gh[i]);
    z[i] = sigmoid(gx[h + i] + gh[h + i]);
    hn[i] = gh[2 * h + i];
    n[i] = std::tanh(gx[2 * h + i] + r[i] * hn[i]);
    h_out[i] = (1.0 - z[i]) * n[i] + z[i] * h_prev[i];
  }
}

void heads_forward(std::span<const double> h, const PcmParams& p, Vec5& pred_obs, Vec5& eps_hat) {
  const auto& cfg = p.config();
  kernels::gemv(p.tensor(Tensor::Fc3W), kObsDim, p.hidden(), h, p.tensor(Tensor::Fc3B), pred_obs);
  kernels::gemv(p.tensor(Tensor::Fc4W), kEpsDim, p.hidden(), h, p.tensor(Tensor::Fc4B), eps_hat);
  for (std::size_t i = 0; i < kObsDim; ++i) pred_obs[i] *= cfg.obs_scale[i];
  for (std::size_t i = 0; i < kEpsDim; ++i) eps_hat[i] *= cfg.eps_scale[i];
}

void build_input(std::span<const double> error, std::span<const double> action, const PcmConfig& cfg,
                 std::span<double> in) {
  for (std::size_t i = 0; i < kObsDim; ++i) in[i] = error[i] / cfg.error_scale[i];
  for (std::size_t i = 0; i < kActionDim; ++i) in[kObsDim + i] = action[i];
}

}  // namespace

std::vector<double> init_hidden(const Vec5& o0, const PcmParams& params) {
  HiddenInitCache c;
  hidden_init_forward(o0, params, c);
  return c.h0;
}

PcmState initial_state(const Vec5& o0, const PcmParams& params) {
  PcmState s;
  s.h = init_hidden(o0, params);
  return s;
}

void gru_step(std::span<const double> x, std::span<const double> h_prev, const PcmParams& p, std::span<double> h_out) {
  const std::size_t h = p.hidden();
  std::vector<double> gx(3 * h), gh(3 * h);
  kernels::gemv(p.range(Tensor::GruWxr, Tensor::GruWxn), 3 * h, h, x, p.range(Tensor::GruBxr, Tensor::GruBxn), gx);
  kernels::gemv(p.range(Tensor::GruWhr, Tensor::GruWhn), 3 * h, h, h_prev, p.range(Tensor::GruBhr, Tensor::GruBhn),
                gh);
  for (std::size_t i = 0; i < h; ++i) {
    const double r = sigmoid(gx[i] + gh[i]);
    const double z = sigmoid(gx[h + i] + gh[h + i]);
    const double n = std::tanh(gx[2 * h + i] + r * gh[2 * h + i]);
    h_out[i] = (1.0 - z) * n + z * h_prev[i];
  }
}

StepOutput forward_step(const Vec5& error, const Action& action, PcmState& state, const PcmParams& p) {
  const std::size_t h = p.hidden();
  assert(state.h.size() == h);
  std::array<double, kInputDim> in{};
  build_input(error, action, p.config(), in);
  std::vector<double> buf(6 * h + 6 * h);
  std::span<double> s(buf);
  std::vector<double> h_new(h);
  cell_forward(in, state.h, p, s.subspan(0, h), s.subspan(h, h), s.subspan(2 * h, h), s.subspan(3 * h, h),
               s.subspan(4 * h, h), h_new, s.subspan(6 * h, 3 * h), s.subspan(9 * h, 3 * h));
  state.h = std::move(h_new);
  StepOutput out{};
  heads_forward(state.h, p, out.pred_obs, out.eps_hat);
  state.pred_obs = out.pred_obs;
  state.eps_hat = out.eps_hat;
  return out;
}

LossTerms loss(std::span<const double> pred_obs, std::span<const double> obs, std::span<const double> pred_eps,
               std::span<const double> eps) {
  constexpr Vec5 ones{1, 1, 1, 1, 1};
  return weighted_loss(pred_obs, obs, pred_eps, eps, ones, ones);
}

LossTerms weighted_loss(std::span<const double> pred_obs, std::span<const double> obs,
                        std::span<const double> pred_eps, std::span<const double> eps, const Vec5& obs_weight,
                        const Vec5& eps_weight) {
  assert(pred_obs.size() == obs.size() && pred_eps.size() == eps.size());
  assert(obs.size() <= kObsDim && eps.size() <= kEpsDim);
  LossTerms l;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double d = pred_obs[i] - obs[i];
    l.obs += obs_weight[i] * d * d;
  }
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double d = pred_eps[i] - eps[i];
    l.eps += eps_weight[i] * d * d;
  }
  l.total = l.obs + l.eps;
  return l;
}

// ---------------------------------------------------------------------------
// Segment forward / backward

namespace {

LossTerms run_segment(const SegmentView& seg, const PcmParams& p, PcmParams* grads) {
  const std::size_t hdim = p.hidden();
  const std::size_t steps = seg.steps;
  const auto& cfg = p.config();
  assert(seg.errors.size() >= steps * kObsDim && seg.actions.size() >= steps * kActionDim);
  assert(seg.next_obs.size() >= steps * kObsDim && seg.eps.size() >= steps * kEpsDim);

  HiddenInitCache init;
  std::vector<double> h0;
  const bool learned_init = !seg.first_obs.empty();
  if (learned_init) {
    hidden_init_forward(seg.first_obs, p, init);
    h0 = init.h0;
  } else {
    assert(seg.initial_hidden.size() == hdim);
    h0.assign(seg.initial_hidden.begin(), seg.initial_hidden.end());
  }

  SegmentCache c;
  c.resize(steps, hdim);
  std::vector<Vec5> pred_obs(steps), pred_eps(steps);
  LossTerms total;

  for (std::size_t t = 0; t < steps; ++t) {
    std::span<double> in = std::span<double>(c.in).subspan(t * kInputDim, kInputDim);
    build_input(seg.errors.subspan(t * kObsDim, kObsDim), seg.actions.subspan(t * kActionDim, kActionDim), cfg, in);
    std::span<double> hp = c.at(c.h_prev, t);
    if (t == 0) {
      std::copy(h0.begin(), h0.end(), hp.begin());
    } else {
      auto prev = c.at(c.h, t - 1);
      std::copy(prev.begin(), prev.end(), hp.begin());
    }
    cell_forward(in, hp, p, c.at(c.x, t), c.at(c.r, t), c.at(c.z, t), c.at(c.n, t), c.at(c.hn, t), c.at(c.h, t), c.gx,
                 c.gh);
    heads_forward(c.at(c.h, t), p, pred_obs[t], pred_eps[t]);
    total += weighted_loss(pred_obs[t], seg.next_obs.subspan(t * kObsDim, kObsDim), pred_eps[t],
                           seg.eps.subspan(t * kEpsDim, kEpsDim), cfg.obs_weight, cfg.eps_weight);
  }
  if (!grads) return total;

  PcmParams& g = *grads;
  std::vector<double> dh(hdim), dh_prev(hdim, 0.0), dx(hdim);
  std::vector<double> dgx(3 * hdim), dgh(3 * hdim);
  std::array<double, kObsDim> dy3{};
  std::array<double, kEpsDim> dy4{};

  auto w_x = p.range(Tensor::GruWxr, Tensor::GruWxn);
  auto w_h = p.range(Tensor::GruWhr, Tensor::GruWhn);
  auto gw_x = g.range(Tensor::GruWxr, Tensor::GruWxn);
  auto gb_x = g.range(Tensor::GruBxr, Tensor::GruBxn);
  auto gw_h = g.range(Tensor::GruWhr, Tensor::GruWhn);
  auto gb_h = g.range(Tensor::GruBhr, Tensor::GruBhn);

  for (std::size_t t = steps; t-- > 0;) {
    std::copy(dh_prev.begin(), dh_prev.end(), dh.begin());
    auto h_t = c.at(c.h, t);

    // Heads.
    for (std::size_t i = 0; i < kObsDim; ++i)
      dy3[i] = 2.0 * cfg.obs_weight[i] * (pred_obs[t][i] - seg.next_obs[t * kObsDim + i]) * cfg.obs_scale[i];
    for (std::size_t i = 0; i < kEpsDim; ++i)
      dy4[i] = 2.0 * cfg.eps_weight[i] * (pred_eps[t][i] - seg.eps[t * kEpsDim + i]) * cfg.eps_scale[i];
    kernels::ger_acc(dy3, h_t, g.tensor(Tensor::Fc3W));
    kernels::axpy(1.0, dy3, g.tensor(Tensor::Fc3B));
    kernels::gemv_t_acc(p.tensor(Tensor::Fc3W), kObsDim, hdim, dy3, dh);
    kernels::ger_acc(dy4, h_t, g.tensor(Tensor::Fc4W));
    kernels::axpy(1.0, dy4, g.tensor(Tensor::Fc4B));
    kernels::gemv_t_acc(p.tensor(Tensor::Fc4W), kEpsDim, hdim, dy4, dh);

    // GRU.
    auto hp = c.at(c.h_prev, t);
    auto r = c.at(c.r, t);
    auto z = c.at(c.z, t);
    auto n = c.at(c.n, t);
    auto hn = c.at(c.hn, t);
    auto x = c.at(c.x, t);
    for (std::size_t i = 0; i < hdim; ++i) {
      const double dn = dh[i] * (1.0 - z[i]);
      const double dz = dh[i] * (hp[i] - n[i]);
      const double da_n = dn * (1.0 - n[i] * n[i]);
      const double da_r = da_n * hn[i] * r[i] * (1.0 - r[i]);
      const double da_z = dz * z[i] * (1.0 - z[i]);
      dgx[i] = da_r;
      dgx[hdim + i] = da_z;
      dgx[2 * hdim + i] = da_n;
      dgh[i] = da_r;
      dgh[hdim + i] = da_z;
      dgh[2 * hdim + i] = da_n * r[i];
      dh_prev[i] = dh[i] * z[i];
    }
    kernels::ger_acc(dgx, x, gw_x);
    kernels::axpy(1.0, dgx, gb_x);
    kernels::ger_acc(dgh, hp, gw_h);
    kernels::axpy(1.0, dgh, gb_h);
    kernels::gemv_t_acc(w_h, 3 * hdim, hdim, dgh, dh_prev);
    std::fill(dx.begin(), dx.end(), 0.0);
    kernels::gemv_t_acc(w_x, 3 * hdim, hdim, dgx, dx);

    // FC1.
    for (std::size_t i = 0; i < hdim; ++i) dx[i] *= 1.0 - x[i] * x[i];
    kernels::ger_acc(dx, std::span<const double>(c.in).subspan(t * kInputDim, kInputDim), g.tensor(Tensor::Fc1W));
    kernels::axpy(1.0, dx, g.tensor(Tensor::Fc1B));
  }

  if (learned_init) {
    // dh_prev now holds dL/dh0.
    std::vector<double> da2(hdim), dg(hdim, 0.0);
    for (std::size_t i = 0; i < hdim; ++i) da2[i] = dh_prev[i] * (1.0 - init.h0[i] * init.h0[i]);
    kernels::ger_acc(da2, init.g, g.tensor(Tensor::Fch2W));
    kernels::axpy(1.0, da2, g.tensor(Tensor::Fch2B));
    kernels::gemv_t_acc(p.tensor(Tensor::Fch2W), hdim, hdim, da2, dg);
    for (std::size_t i = 0; i < hdim; ++i) dg[i] *= 1.0 - init.g[i] * init.g[i];
    kernels::ger_acc(dg, init.in, g.tensor(Tensor::Fch1W));
    kernels::axpy(1.0, dg, g.tensor(Tensor::Fch1B));
  }
  return total;
}

}  // namespace

LossTerms segment_loss(const SegmentView& seg, const PcmParams& params) { return run_segment(seg, params, nullptr); }

LossTerms backward(const SegmentView& seg, const PcmParams& params, PcmParams& grads) {
  assert(grads.size() == params.size());
  return run_segment(seg, params, &grads);
}

void adam_update(PcmParams& params, const PcmParams& grads, AdamState& adam) {
  assert(adam.m.size() == params.size() && adam.v.size() == params.size());
  ++adam.step;
  kernels::AdamCoefficients c;
  c.lr = adam.cfg.lr;
  c.beta1 = adam.cfg.beta1;
  c.beta2 = adam.cfg.beta2;
  c.eps = adam.cfg.eps;
  c.bias_correction1 = 1.0 - std::pow(adam.cfg.beta1, static_cast<double>(adam.step));
  c.bias_correction2 = 1.0 - std::pow(adam.cfg.beta2, static_cast<double>(adam.step));
  kernels::adam_step(params.flat(), grads.flat(), adam.m, adam.v, c);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kMagic = "sfc-pcm-checkpoint";
constexpr int kVersion = 1;

std::string hexd(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw std::runtime_error("checkpoint: bad number '" + tok + "'");
  return v;
}

void write_vec5(std::ostream& os, std::string_view key, const Vec5& v) {
  os << key;
  for (double d : v) os << ' ' << hexd(d);
  os << '\n';
}

Vec5 read_vec5(std::istream& is, std::string_view key) {
  std::string k;
  is >> k;
  if (k != key) throw std::runtime_error("checkpoint: expected '" + std::string(key) + "', got '" + k + "'");
  Vec5 v{};
  for (double& d : v) {
    std::string tok;
    is >> tok;
    d = parse_double(tok);
  }
  return v;
}

template <class T>
T read_field(std::istream& is, std::string_view key, bool hex = false) {
  std::string k;
  is >> k;
  if (k != key) throw std::runtime_error("checkpoint: expected '" + std::string(key) + "', got '" + k + "'");
  T v{};
  if (hex)
    is >> std::hex >> v >> std::dec;
  else
    is >> v;
  if (!is) throw std::runtime_error("checkpoint: bad value for '" + std::string(key) + "'");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PcmParams& params, const CheckpointMeta& meta) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  const PcmConfig& cfg = params.config();
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.fingerprint()));
  os << kMagic << ' ' << kVersion << '\n';
  os << "config_hash " << hash << '\n';
  os << "episodes " << meta.episodes << '\n';
  os << "seed " << meta.seed << '\n';
  os << "hidden " << cfg.hidden << '\n';
  write_vec5(os, "obs_scale", cfg.obs_scale);
  write_vec5(os, "error_scale", cfg.error_scale);
  write_vec5(os, "eps_scale", cfg.eps_scale);
  write_vec5(os, "obs_weight", cfg.obs_weight);
  write_vec5(os, "eps_weight", cfg.eps_weight);
  for (std::size_t t = 0; t < kTensorCount; ++t) {
    const TensorInfo& info = params.info(static_cast<Tensor>(t));
    os << "tensor " << info.name << ' ' << info.rows << ' ' << info.cols << '\n';
    auto data = params.tensor(static_cast<Tensor>(t));
    for (std::size_t r = 0; r < info.rows; ++r) {
      for (std::size_t col = 0; col < info.cols; ++col) os << (col ? " " : "") << hexd(data[r * info.cols + col]);
      os << '\n';
    }
  }
  os << "end\n";
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("checkpoint not found: " + path.string());
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != kMagic) throw std::runtime_error("not a PCM checkpoint: " + path.string());
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

  CheckpointMeta meta;
  meta.config_hash = read_field<std::uint64_t>(is, "config_hash", true);
  meta.episodes = read_field<std::uint64_t>(is, "episodes");
  meta.seed = read_field<std::uint64_t>(is, "seed");
  PcmConfig cfg;
  cfg.hidden = read_field<std::size_t>(is, "hidden");
  cfg.obs_scale = read_vec5(is, "obs_scale");
  cfg.error_scale = read_vec5(is, "error_scale");
  cfg.eps_scale = read_vec5(is, "eps_scale");
  cfg.obs_weight = read_vec5(is, "obs_weight");
  cfg.eps_weight = read_vec5(is, "eps_weight");
  if (cfg.fingerprint() != meta.config_hash)
    throw std::runtime_error("checkpoint header is inconsistent with its config_hash: " + path.string());

  PcmParams params(cfg);
  for (std::size_t t = 0; t < kTensorCount; ++t) {
    const TensorInfo& info = params.info(static_cast<Tensor>(t));
    std::string kw, name;
    std::size_t rows = 0, cols = 0;
    is >> kw >> name >> rows >> cols;
    if (kw != "tensor" || name != info.name || rows != info.rows || cols != info.cols)
      throw std::runtime_error("checkpoint: unexpected tensor header for " + std::string(info.name));
    for (double& d : params.tensor(static_cast<Tensor>(t))) {
      std::string tok;
      is >> tok;
      d = parse_double(tok);
    }
  }
  std::string end;
  is >> end;
  if (end != "end") throw std::runtime_error("checkpoint truncated: " + path.string());
  std::string extra;
  if (is >> extra) throw std::runtime_error("checkpoint has trailing content: " + path.string());
  return {std::move(params), meta};
}

}  // namespace sfc::pcm

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sfc/pcm.hpp"

using namespace sfc;
using namespace sfc::pcm;

namespace {

PcmConfig small_config(std::size_t h) {
  PcmConfig c;
  c.hidden = h;
  return c;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Straight-line reference: y = W x + b over a tensor pair.
std::vector<double> affine(const PcmParams& p, Tensor w, Tensor b, const std::vector<double>& x) {
  const auto& info = p.info(w);
  const auto wd = p.tensor(w);
  const auto bd = p.tensor(b);
  std::vector<double> y(info.rows);
  for (std::size_t r = 0; r < info.rows; ++r) {
    double s = bd[r];
    for (std::size_t c = 0; c < info.cols; ++c) s += wd[r * info.cols + c] * x[c];
    y[r] = s;
  }
  return y;
}

std::vector<double> tanh_all(std::vector<double> v) {
  for (double& x : v) x = std::tanh(x);
  return v;
}

std::vector<double> reference_gru(const PcmParams& p, const std::vector<double>& x, const std::vector<double>& h) {
  const auto r = affine(p, Tensor::GruWxr, Tensor::GruBxr, x);
  const auto z = affine(p, Tensor::GruWxz, Tensor::GruBxz, x);
  const auto n = affine(p, Tensor::GruWxn, Tensor::GruBxn, x);
  const auto hr = affine(p, Tensor::GruWhr, Tensor::GruBhr, h);
  const auto hz = affine(p, Tensor::GruWhz, Tensor::GruBhz, h);
  const auto hn = affine(p, Tensor::GruWhn, Tensor::GruBhn, h);
  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double ri = sigmoid(r[i] + hr[i]);
    const double zi = sigmoid(z[i] + hz[i]);
    const double ni = std::tanh(n[i] + ri * hn[i]);
    out[i] = (1.0 - zi) * ni + zi * h[i];
  }
  return out;
}

struct Segment {
  std::size_t steps;
  std::vector<double> first_obs, hidden, errors, actions, next_obs, eps;
  SegmentView view(bool from_start) const {
    return {steps, from_start ? std::span<const double>(first_obs) : std::span<const double>{},
            from_start ? std::span<const double>{} : std::span<const double>(hidden), errors, actions, next_obs, eps};
  }
};

Segment random_segment(std::size_t steps, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](std::size_t n, double s) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal(0.0, s);
    return v;
  };
  Segment s{steps, fill(5, 0.5), fill(h, 0.5), fill(steps * 5, 0.3), {}, fill(steps * 5, 0.5), fill(steps * 5, 0.2)};
  s.actions.resize(steps * kActionDim);
  for (double& a : s.actions) a = rng.uniform() < 0.3 ? 1.0 : 0.0;
  return s;
}

}  // namespace

TEST_CASE("learned initial state") {
  PcmParams zero(small_config(6));
  zero.set_zero();
  for (double v : init_hidden({0.3, -0.2, 1, 2, 3}, zero)) CHECK(v == 0.0);

  PcmParams p = PcmParams::random(small_config(6), 3);
  const auto h = init_hidden({0, 0, 0, 0, 0}, p);
  const auto inner = tanh_all(std::vector<double>(p.tensor(Tensor::Fch1B).begin(), p.tensor(Tensor::Fch1B).end()));
  const auto expected = tanh_all(affine(p, Tensor::Fch2W, Tensor::Fch2B, inner));
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::fabs(h[i] - expected[i]) < 1e-12);

  const std::vector<double> o0{0.1, -0.4, 0.7, 0.2, -1.1};
  const auto h2 = init_hidden({o0[0], o0[1], o0[2], o0[3], o0[4]}, p);
  const auto ref = tanh_all(affine(p, Tensor::Fch2W, Tensor::Fch2B, tanh_all(affine(p, Tensor::Fch1W, Tensor::Fch1B, o0))));
  for (std::size_t i = 0; i < h2.size(); ++i) CHECK(std::fabs(h2[i] - ref[i]) < 1e-12);
}

TEST_CASE("gru step") {
  PcmParams zero(small_config(4));
  zero.set_zero();
  const std::vector<double> x{0.3, -0.1, 0.8, 0.5};
  const std::vector<double> h{1.0, -2.0, 0.5, 0.0};
  std::vector<double> out(4);
  gru_step(x, h, zero, out);
  for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == 0.5 * h[i]);
  gru_step(x, std::vector<double>(4, 0.0), zero, out);
  for (double v : out) CHECK(v == 0.0);

  // Scalar hidden state against a hand evaluation of the gate equations.
  const PcmParams p = PcmParams::random(small_config(1), 21);
  auto w = [&](Tensor t) { return p.tensor(t)[0]; };
  const double xs = 0.37, hs = -0.52;
  const double r = sigmoid(w(Tensor::GruWxr) * xs + w(Tensor::GruBxr) + w(Tensor::GruWhr) * hs + w(Tensor::GruBhr));
  const double z = sigmoid(w(Tensor::GruWxz) * xs + w(Tensor::GruBxz) + w(Tensor::GruWhz) * hs + w(Tensor::GruBhz));
  const double n = std::tanh(w(Tensor::GruWxn) * xs + w(Tensor::GruBxn) + r * (w(Tensor::GruWhn) * hs + w(Tensor::GruBhn)));
  const double expected = (1.0 - z) * n + z * hs;
  std::vector<double> o1(1);
  gru_step(std::vector<double>{xs}, std::vector<double>{hs}, p, o1);
  CHECK(std::fabs(o1[0] - expected) < 1e-12);
}

TEST_CASE("heads and recurrence against an unrolled reference") {
  PcmParams zero(small_config(5));
  zero.set_zero();
  PcmState zs = initial_state({0.2, 0.1, 0.3, 0.4, 0.5}, zero);
  Action u{};
  u[3] = 1.0;
  const auto zo = forward_step({0.1, 0.1, 0.1, 0.1, 0.1}, u, zs, zero);
  for (double v : zo.pred_obs) CHECK(v == 0.0);
  for (double v : zo.eps_hat) CHECK(v == 0.0);

  const PcmParams p = PcmParams::random(small_config(5), 99);
  const PcmParams before = p;
  const Vec5 o0{0.1, -0.2, 0.5, -0.3, 0.05};
  PcmState s = initial_state(o0, p);
  std::vector<double> h = init_hidden(o0, p);
  Rng rng(4);
  for (int step = 0; step < 3; ++step) {
    Vec5 e;
    for (double& v : e) v = rng.normal(0.0, 0.2);
    Action a{};
    for (double& v : a) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
    const auto out = forward_step(e, a, s, p);

    std::vector<double> in(e.begin(), e.end());
    in.insert(in.end(), a.begin(), a.end());
    const auto x = tanh_all(affine(p, Tensor::Fc1W, Tensor::Fc1B, in));
    h = reference_gru(p, x, h);
    const auto o = affine(p, Tensor::Fc3W, Tensor::Fc3B, h);
    const auto eh = affine(p, Tensor::Fc4W, Tensor::Fc4B, h);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::fabs(s.h[i] - h[i]) < 1e-10);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::fabs(out.pred_obs[i] - o[i]) < 1e-10);
      CHECK(std::fabs(out.eps_hat[i] - eh[i]) < 1e-10);
    }
  }
  CHECK(p == before);

  // Heads are linear in their weights.
  PcmParams doubled = p;
  for (auto t : {Tensor::Fc3W, Tensor::Fc3B})
    for (double& v : doubled.tensor(t)) v *= 2.0;
  PcmState s1 = initial_state(o0, p), s2 = initial_state(o0, doubled);
  const auto a1 = forward_step(o0, u, s1, p);
  const auto a2 = forward_step(o0, u, s2, doubled);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a2.pred_obs[i] == 2.0 * a1.pred_obs[i]);
}

TEST_CASE("loss") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{1, 2, 3, 4, 5};
  CHECK(loss(a, b, a, b).total == 0.0);
  const std::vector<double> c{1, 2, 5, 4, 5};
  const auto l = loss(c, b, a, b);
  CHECK(l.total == 4.0);
  CHECK(l.obs == 4.0);
  CHECK(l.eps == 0.0);
  const std::vector<double> d{1, 2, 7, 4, 5};
  CHECK(loss(d, b, a, b).total == 16.0);

  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> po(5), o(5), pe(5), e(5);
    for (auto* v : {&po, &o, &pe, &e})
      for (double& x : *v) x = rng.normal();
    double naive = 0.0;
    for (std::size_t i = 0; i < 5; ++i) naive += (po[i] - o[i]) * (po[i] - o[i]);
    for (std::size_t i = 0; i < 5; ++i) naive += (pe[i] - e[i]) * (pe[i] - e[i]);
    CHECK(std::fabs(loss(po, o, pe, e).total - naive) <= 1e-9 * naive);
  }

  const Vec5 wo{2, 1, 1, 1, 1}, we{1, 1, 1, 1, 3};
  const std::vector<double> z(5, 0.0), one(5, 1.0);
  const auto wl = weighted_loss(one, z, one, z, wo, we);
  CHECK(wl.obs == 6.0);
  CHECK(wl.eps == 7.0);
}

TEST_CASE("backpropagation") {
  SUBCASE("a perfectly predicted segment has zero gradient") {
    PcmParams zero(small_config(4));
    zero.set_zero();
    auto seg = random_segment(6, 4, 2);
    std::fill(seg.next_obs.begin(), seg.next_obs.end(), 0.0);
    std::fill(seg.eps.begin(), seg.eps.end(), 0.0);
    PcmParams g(small_config(4));
    g.set_zero();
    CHECK(backward(seg.view(true), zero, g).total == 0.0);
    for (double v : g.flat()) CHECK(v == 0.0);
  }
  SUBCASE("every parameter matches central differences") {
    PcmConfig cfg = small_config(8);
    cfg.obs_scale = {0.5, 0.5, 2.0, 2.0, 2.0};
    cfg.error_scale = {0.1, 0.1, 0.3, 0.3, 0.3};
    cfg.eps_scale = {0.2, 0.2, 0.2, 0.2, 0.2};
    cfg.obs_weight = {3, 3, 1, 1, 1};
    cfg.eps_weight = {2, 2, 2, 2, 2};
    const PcmParams p = PcmParams::random(cfg, 31);
    const auto seg = random_segment(10, 8, 32);
    for (bool from_start : {true, false}) {
      CAPTURE(from_start);
      const auto view = seg.view(from_start);
      PcmParams g(cfg);
      g.set_zero();
      const auto l = backward(view, p, g);
      CHECK(l.total == doctest::Approx(segment_loss(view, p).total).epsilon(1e-12));
      std::size_t bad = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        PcmParams plus = p, minus = p;
        plus.flat()[i] += 1e-5;
        minus.flat()[i] -= 1e-5;
        const double numeric = (segment_loss(view, plus).total - segment_loss(view, minus).total) / 2e-5;
        const double analytic = g.flat()[i];
        const double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1e-7});
        bad += std::fabs(numeric - analytic) / denom >= 1e-4;
      }
      CHECK(bad == 0);
    }
  }
  SUBCASE("doubling every residual quadruples the loss") {
    PcmParams zero(small_config(4));
    zero.set_zero();
    auto seg = random_segment(5, 4, 3);
    const double l1 = segment_loss(seg.view(true), zero).total;
    for (auto* v : {&seg.next_obs, &seg.eps})
      for (double& x : *v) x *= 2.0;
    CHECK(segment_loss(seg.view(true), zero).total == doctest::Approx(4.0 * l1).epsilon(1e-14));
  }
}

TEST_CASE("adam") {
  const PcmConfig cfg = small_config(3);
  SUBCASE("zero gradient leaves parameters alone") {
    PcmParams p = PcmParams::random(cfg, 1);
    const PcmParams before = p;
    PcmParams g(cfg);
    g.set_zero();
    AdamState st({}, p.size());
    adam_update(p, g, st);
    CHECK(p == before);
  }
  SUBCASE("first step moves each parameter by about lr against the gradient sign") {
    PcmParams p(cfg);
    p.set_zero();
    PcmParams g(cfg);
    Rng rng(2);
    for (double& v : g.flat()) v = rng.uniform() < 0.5 ? -3.0 : 2.0;
    AdamConfig ac;
    ac.lr = 1e-3;
    AdamState st(ac, p.size());
    adam_update(p, g, st);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(std::fabs(std::fabs(p.flat()[i]) - 1e-3) < 1e-9);
      CHECK(p.flat()[i] * g.flat()[i] < 0.0);
    }
  }
  SUBCASE("a constant gradient keeps steps near lr") {
    PcmParams p(cfg);
    p.set_zero();
    PcmParams g(cfg);
    for (double& v : g.flat()) v = 0.7;
    AdamConfig ac;
    ac.lr = 1e-3;
    AdamState st(ac, p.size());
    double prev = 0.0;
    for (int i = 0; i < 100; ++i) {
      adam_update(p, g, st);
      const double step = prev - p.flat()[0];
      CHECK(std::fabs(step - 1e-3) < 1e-8);
      prev = p.flat()[0];
    }
  }
}

TEST_CASE("identical seeds give identical parameters after training steps") {
  auto run = [] {
    const PcmConfig cfg = small_config(6);
    PcmParams p = PcmParams::random(cfg, 8);
    AdamState st({}, p.size());
    const auto seg = random_segment(8, 6, 9);
    for (int i = 0; i < 5; ++i) {
      PcmParams g(cfg);
      g.set_zero();
      backward(seg.view(i % 2 == 0), p, g);
      adam_update(p, g, st);
    }
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip") {
  PcmConfig cfg = small_config(7);
  cfg.obs_scale = {0.3, 0.3, 1, 1, 1};
  cfg.eps_weight = {10, 10, 10, 10, 10};
  const PcmParams p = PcmParams::random(cfg, 77);
  const auto path = std::filesystem::temp_directory_path() / "sfc_unit_checkpoint.txt";
  save_checkpoint(path, p, {cfg.fingerprint(), 1234, 5});
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.params == p);
  CHECK(loaded.params.config().fingerprint() == cfg.fingerprint());
  CHECK(loaded.meta.episodes == 1234);
  CHECK(loaded.meta.seed == 5);

  PcmConfig other = cfg;
  other.eps_weight[0] = 11;
  CHECK(other.fingerprint() != cfg.fingerprint());

  {
    std::ofstream f(path, std::ios::app);
    f << "garbage\n";
  }
  CHECK_THROWS(load_checkpoint(path));
  std::ofstream(path) << "not a checkpoint\n";
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
}

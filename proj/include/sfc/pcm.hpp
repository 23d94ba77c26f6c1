#pragma once

// Action-conditional predictive coding model.
//
//   h0      = tanh(Wh2 tanh(Wh1 o0 + bh1) + bh2)            learned initial state
//   x_t     = tanh(W1 [e_t; u_t] + b1)
//   h_{t+1} = GRU(x_t, h_t)
//   o_hat   = W3 h_{t+1} + b3                                next observation
//   eps_hat = W4 h_{t+1} + b4                                next scale factors
//
// Inputs and heads carry fixed per-channel scales (PcmConfig) so that the
// network works on O(1) numbers; with unit scales the formulas above are exact.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfc/random.hpp"

namespace sfc::pcm {

inline constexpr std::size_t kObsDim = 5;
inline constexpr std::size_t kActionDim = 16;
inline constexpr std::size_t kInputDim = kObsDim + kActionDim;
inline constexpr std::size_t kEpsDim = 5;

using Vec5 = std::array<double, 5>;
using Action = std::array<double, kActionDim>;

struct PcmConfig {
  std::size_t hidden = 64;
  Vec5 obs_scale{1, 1, 1, 1, 1};    // FCh1 input divisor and FC3 output multiplier
  Vec5 error_scale{1, 1, 1, 1, 1};  // divisor on the prediction error fed to FC1
  Vec5 eps_scale{1, 1, 1, 1, 1};    // FC4 output multiplier
  // Per-channel weights on the squared residuals of the training objective.
  // Unit weights give the plain sums of squares.
  Vec5 obs_weight{1, 1, 1, 1, 1};
  Vec5 eps_weight{1, 1, 1, 1, 1};

  /// Stable 64-bit fingerprint of everything that determines the parameter layout and meaning.
  std::uint64_t fingerprint() const;
};

enum class Tensor : std::size_t {
  Fch1W, Fch1B, Fch2W, Fch2B,
  Fc1W, Fc1B,
  // Input-side GRU weights/biases, gate order r, z, n. Stored contiguously so
  // the three input projections form one (3H x H) matrix.
  GruWxr, GruWxz, GruWxn, GruBxr, GruBxz, GruBxn,
  // Recurrent-side GRU weights/biases, same gate order.
  GruWhr, GruWhz, GruWhn, GruBhr, GruBhz, GruBhn,
  Fc3W, Fc3B, Fc4W, Fc4B,
  Count
};

inline constexpr std::size_t kTensorCount = static_cast<std::size_t>(Tensor::Count);

struct TensorInfo {
  std::string_view name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return rows * cols; }
};

/// All weights and biases in one flat buffer. Also used as the gradient container.
class PcmParams {
 public:
  PcmParams() : PcmParams(PcmConfig{}) {}
  explicit PcmParams(const PcmConfig& cfg);

  /// PyTorch-style uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  static PcmParams random(const PcmConfig& cfg, std::uint64_t seed);

  const PcmConfig& config() const { return cfg_; }
  std::size_t hidden() const { return cfg_.hidden; }
  std::size_t size() const { return data_.size(); }

  const TensorInfo& info(Tensor t) const { return layout_[static_cast<std::size_t>(t)]; }
  std::span<double> tensor(Tensor t);
  std::span<const double> tensor(Tensor t) const;
  /// Contiguous span covering tensors first..last inclusive.
  std::span<const double> range(Tensor first, Tensor last) const;
  std::span<double> range(Tensor first, Tensor last);

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  void set_zero();
  bool all_finite() const;

  friend bool operator==(const PcmParams& a, const PcmParams& b) { return a.data_ == b.data_; }

 private:
  PcmConfig cfg_;
  std::array<TensorInfo, kTensorCount> layout_{};
  std::vector<double> data_;
};

/// Recurrent state carried from step to step during an episode.
struct PcmState {
  std::vector<double> h;
  Vec5 error{};     // e_t
  Vec5 pred_obs{};  // o_hat for the upcoming observation
  Vec5 eps_hat{};   // scale factor estimate for the upcoming observation
};

std::vector<double> init_hidden(const Vec5& o0, const PcmParams& params);

/// Fresh episode state: h0 from the first observation, e0 = 0, eps_hat0 = 0.
PcmState initial_state(const Vec5& o0, const PcmParams& params);

void gru_step(std::span<const double> x, std::span<const double> h_prev, const PcmParams& params,
              std::span<double> h_out);

struct StepOutput {
  Vec5 pred_obs;
  Vec5 eps_hat;
};

/// One network step: consumes (e, u), advances state.h, returns both heads.
/// Also stores the heads into state.pred_obs / state.eps_hat.
StepOutput forward_step(const Vec5& error, const Action& action, PcmState& state, const PcmParams& params);

struct LossTerms {
  double total = 0.0;
  double obs = 0.0;
  double eps = 0.0;

  LossTerms& operator+=(const LossTerms& o) {
    total += o.total;
    obs += o.obs;
    eps += o.eps;
    return *this;
  }
};

/// Sum-of-squares losses; L = L_o + L_eps.
LossTerms loss(std::span<const double> pred_obs, std::span<const double> obs, std::span<const double> pred_eps,
               std::span<const double> eps);

/// Same sums with per-channel weights on the squared residuals.
LossTerms weighted_loss(std::span<const double> pred_obs, std::span<const double> obs,
                        std::span<const double> pred_eps, std::span<const double> eps, const Vec5& obs_weight,
                        const Vec5& eps_weight);

/// A stretch of recorded steps for truncated backpropagation. All step arrays are
/// row-major with `steps` rows. If `first_obs` is non-empty the segment starts an
/// episode and its hidden state is recomputed through FCh1/FCh2; otherwise
/// `initial_hidden` (the state recorded during the rollout) is used as a constant.
struct SegmentView {
  std::size_t steps = 0;
  std::span<const double> first_obs;       // 5, or empty
  std::span<const double> initial_hidden;  // H, used when first_obs is empty
  std::span<const double> errors;          // steps x 5
  std::span<const double> actions;         // steps x 16
  std::span<const double> next_obs;        // steps x 5
  std::span<const double> eps;             // steps x 5
};

/// Forward-only loss over a segment, with the channel weights of the model config.
LossTerms segment_loss(const SegmentView& seg, const PcmParams& params);

/// Loss over a segment and its exact gradient, accumulated into `grads`.
LossTerms backward(const SegmentView& seg, const PcmParams& params, PcmParams& grads);

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(const AdamConfig& c, std::size_t n) : cfg(c), m(n, 0.0), v(n, 0.0) {}
};

void adam_update(PcmParams& params, const PcmParams& grads, AdamState& adam);

struct CheckpointMeta {
  std::uint64_t config_hash = 0;  // PcmConfig::fingerprint() of the stored model
  std::uint64_t episodes = 0;     // training episodes consumed
  std::uint64_t seed = 0;
};

/// Text checkpoint; values are written as hexadecimal floats so a round trip is exact.
void save_checkpoint(const std::filesystem::path& path, const PcmParams& params, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  PcmParams params;
  CheckpointMeta meta;
};

/// Throws std::runtime_error on malformed input or a fingerprint that does not
/// match the stored configuration.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sfc::pcm

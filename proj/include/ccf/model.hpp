#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ccf/boxcox.hpp"
#include "ccf/matrix.hpp"
#include "ccf/rng.hpp"

namespace ccf {

struct CcfArch {
  std::size_t feature_dim = 0;
  std::size_t hidden_dim = 2048;
  std::size_t n_base_classes = 0;  // latent dimension, fixed to |C_base|
  double activation_slope = 0.01;
  // Activation placement. Default: encoder activates the hidden layer
  // only (the latent vector stays an unconstrained logit vector), the
  // decoder activates its output.
  bool encoder_output_activation = false;
  bool decoder_output_activation = true;

  void validate() const;
  bool operator==(const CcfArch&) const = default;
};

// Encoder x -> hidden -> z (logits over base classes), single-layer
// decoder z -> x_hat. Weights are stored row-major as (in x out), so the
// forward pass is x * W per layer.
class CcfModel {
 public:
  CcfModel() = default;
  // Glorot-uniform weight init (+-sqrt(6/(fan_in+fan_out))), zero biases,
  // drawn in declaration order from rng.
  CcfModel(const CcfArch& arch, Rng& rng);

  const CcfArch& arch() const noexcept { return arch_; }

  Vector encode(const Vector& x) const;
  Vector decode(const Vector& z) const;
  // decode(encode(x)): exactly one rectified feature per input. Inputs
  // must live in the same (Box-Cox transformed) space the model was
  // trained in.
  Vector rectify(const Vector& x) const;

  Matrix encode_rows(const Matrix& x) const;
  Matrix rectify_rows(const Matrix& x) const;

  bool all_finite() const noexcept;

  // Parameter tensors in fixed order: w1, b1, w2, b2, w3, b3.
  std::vector<std::span<double>> param_views();
  std::vector<std::span<const double>> param_views() const;
  static std::vector<std::size_t> param_sizes(const CcfArch& arch);

  Matrix w1, w2, w3;
  Vector b1, b2, b3;

  bool operator==(const CcfModel&) const = default;

 private:
  CcfArch arch_;
};

struct LossConfig {
  double temperature = 0.1;
  double beta = 0.05;
  // Off = plain autoencoder (reconstruction + Frobenius penalty only).
  bool ce_enabled = true;
};

// total = mse + ce + beta * frob, all batch means. ce is 0 when disabled.
struct LossBreakdown {
  double mse = 0.0;
  double ce = 0.0;
  double frob = 0.0;
  double total = 0.0;
};

struct CcfGradients {
  Matrix w1, w2, w3;
  Vector b1, b2, b3;

  std::vector<std::span<const double>> views() const;
};

// labels are latent indices in [0, n_base_classes).
LossBreakdown ccf_loss(const CcfModel& model, const Matrix& x,
                       std::span<const std::uint32_t> labels, const LossConfig& config);
std::pair<LossBreakdown, CcfGradients> ccf_loss_gradients(
    const CcfModel& model, const Matrix& x, std::span<const std::uint32_t> labels,
    const LossConfig& config);

struct TrainConfig {
  double temperature = 0.1;    // 0.1 suits 1-shot, 0.02 suits 5-shot
  double beta = 0.05;
  double learning_rate = 1e-4;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 100;
  std::size_t eval_every = 1;   // epochs between validation evaluations
  std::size_t patience = 10;    // consecutive non-improving evaluations tolerated
  std::size_t val_episodes = 200;
  std::uint64_t seed = 0;
  std::size_t hidden_dim = 2048;
  double activation_slope = 0.01;
  bool encoder_output_activation = false;
  bool decoder_output_activation = true;
  bool ce_enabled = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  LossConfig loss_config() const { return {temperature, beta, ce_enabled}; }
};

// Self-describing checkpoint: binary weights plus the train config and
// Box-Cox parameters used, as a JSON trailer.
struct Checkpoint {
  CcfModel model;
  TrainConfig train_config;
  BoxCoxParams boxcox;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ccf

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccf/matrix.hpp"

namespace ccf {

// Tempered softmax: softmax(z / T). Stable form: the scaled logits are
// shifted by their max before exponentiation, so softmax_t(z, T) is
// bit-identical to softmax_t(z/T, 1).
Vector softmax_t(const Vector& z, double temperature);

// In place, one softmax per row.
void softmax_t_rows(Matrix& logits, double temperature);

// log(sum_i exp(v_i)), max-shifted.
double log_sum_exp(std::span<const double> v);

// Entrywise max(x, slope * x); slope must be nonnegative.
Vector leaky_relu(const Vector& v, double slope);
void leaky_relu_inplace(Matrix& m, double slope);
// Derivative convention matching the max form: 1 where x > slope*x,
// slope elsewhere (arbitrary but fixed on the measure-zero kink).
double leaky_relu_grad(double pre_activation, double slope);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over an ordered set of parameter tensors. Moment
// buffers are allocated per tensor at construction and must be stepped
// with tensors of the same shapes, in the same order.
class AdamState {
 public:
  AdamState(AdamConfig config, std::vector<std::size_t> param_sizes);

  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads);

  std::uint64_t step_count() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t step_ = 0;
};

}  // namespace ccf

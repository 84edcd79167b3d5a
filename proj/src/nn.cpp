#include "ccf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccf {

namespace {

void softmax_span(std::span<double> w) {
  double max = w[0];
  for (double x : w) max = std::max(max, x);
  double sum = 0.0;
  for (double& x : w) {
    x = std::exp(x - max);
    sum += x;
  }
  for (double& x : w) x /= sum;
}

}  // namespace

Vector softmax_t(const Vector& z, double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("softmax_t: temperature must be positive");
  if (z.dim() == 0) throw std::invalid_argument("softmax_t: empty logits");
  Vector w(z.dim());
  for (std::size_t i = 0; i < z.dim(); ++i) {
    if (!std::isfinite(z[i])) throw std::invalid_argument("softmax_t: non-finite logit");
    w[i] = z[i] / temperature;
  }
  softmax_span(w.span());
  return w;
}

void softmax_t_rows(Matrix& logits, double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("softmax_t_rows: temperature must be positive");
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    for (double& x : row) x /= temperature;
    softmax_span(row);
  }
}

double log_sum_exp(std::span<const double> v) {
  double max = v[0];
  for (double x : v) max = std::max(max, x);
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - max);
  return max + std::log(sum);
}

Vector leaky_relu(const Vector& v, double slope) {
  if (slope < 0.0) throw std::invalid_argument("leaky_relu: slope must be nonnegative");
  Vector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = std::max(v[i], slope * v[i]);
  return out;
}

void leaky_relu_inplace(Matrix& m, double slope) {
  if (slope < 0.0) throw std::invalid_argument("leaky_relu: slope must be nonnegative");
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = std::max(p[i], slope * p[i]);
}

double leaky_relu_grad(double pre_activation, double slope) {
  return pre_activation > slope * pre_activation ? 1.0 : slope;
}

AdamState::AdamState(AdamConfig config, std::vector<std::size_t> param_sizes)
    : config_(config) {
  m_.reserve(param_sizes.size());
  v_.reserve(param_sizes.size());
  for (std::size_t n : param_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void AdamState::step(const std::vector<std::span<double>>& params,
                     const std::vector<std::span<const double>>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("AdamState::step: tensor count mismatch");
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    auto& m = m_[t];
    auto& v = v_[t];
    if (p.size() != m.size() || g.size() != m.size())
      throw std::invalid_argument("AdamState::step: tensor shape mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace ccf

#include "ccf/boxcox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ccf/error.hpp"

namespace ccf {

double boxcox_value(double v, double lambda) {
  if (lambda == 0.0) return std::log(v);
  if (lambda == 1.0) return v - 1.0;
  return std::expm1(lambda * std::log(v)) / lambda;
}

Vector boxcox(const Vector& x, const BoxCoxParams& params) {
  if (!(params.shift >= 0.0))
    throw std::invalid_argument("boxcox: shift must be nonnegative");
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double v = x[i] + params.shift;
    if (!(v > 0.0))
      throw DataError("boxcox: entry " + std::to_string(i) + " is " +
                      std::to_string(x[i]) + ", non-positive after shift " +
                      std::to_string(params.shift));
    out[i] = boxcox_value(v, params.lambda);
  }
  return out;
}

FeatureBank boxcox_bank(const FeatureBank& bank, const BoxCoxParams& params) {
  if (!(params.shift >= 0.0))
    throw std::invalid_argument("boxcox: shift must be nonnegative");
  Matrix transformed(bank.n_samples(), bank.feature_dim());
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    const auto row = bank.sample(i);
    for (std::size_t j = 0; j < bank.feature_dim(); ++j) {
      const double v = row[j] + params.shift;
      if (!(v > 0.0))
        throw DataError("boxcox: sample " + std::to_string(i) + " entry " +
                        std::to_string(j) + " non-positive after shift");
      transformed(i, j) = boxcox_value(v, params.lambda);
    }
  }
  std::vector<Split> splits(bank.n_classes());
  for (std::uint32_t c = 0; c < bank.n_classes(); ++c) splits[c] = bank.class_split(c);
  return FeatureBank(std::move(transformed), bank.labels(), std::move(splits),
                     bank.class_names());
}

double auto_shift(const FeatureBank& bank) {
  double min = std::numeric_limits<double>::infinity();
  const double* p = bank.features().data();
  for (std::size_t i = 0; i < bank.features().size(); ++i) min = std::min(min, p[i]);
  if (!std::isfinite(min)) return 0.0;  // empty bank
  return std::max(0.0, 1e-6 - min);
}

double boxcox_log_likelihood(const std::vector<double>& shifted_values, double lambda) {
  const std::size_t n = shifted_values.size();
  double log_sum = 0.0;
  double mean = 0.0;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_sum += std::log(shifted_values[i]);
    w[i] = boxcox_value(shifted_values[i], lambda);
    mean += w[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double wi : w) var += (wi - mean) * (wi - mean);
  var /= static_cast<double>(n);
  if (!(var > 0.0)) return -std::numeric_limits<double>::infinity();
  return -0.5 * static_cast<double>(n) * std::log(var) + (lambda - 1.0) * log_sum;
}

BoxCoxParams fit_lambda(const FeatureBank& bank, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("fit_lambda: empty candidate grid");
  const auto base_samples = bank.samples_of(Split::base);
  if (base_samples.empty()) throw DataError("fit_lambda: base split is empty");

  const double shift = auto_shift(bank);
  std::vector<double> pooled;
  pooled.reserve(base_samples.size() * bank.feature_dim());
  for (std::uint32_t idx : base_samples)
    for (double v : bank.sample(idx)) pooled.push_back(v + shift);

  double best_ll = -std::numeric_limits<double>::infinity();
  double best_lambda = grid[0];
  bool have_best = false;
  for (double lambda : grid) {
    const double ll = boxcox_log_likelihood(pooled, lambda);
    const bool better =
        !have_best || ll > best_ll ||
        (ll == best_ll && (std::abs(lambda) < std::abs(best_lambda) ||
                           (std::abs(lambda) == std::abs(best_lambda) &&
                            lambda < best_lambda)));
    if (better) {
      best_ll = ll;
      best_lambda = lambda;
      have_best = true;
    }
  }
  return BoxCoxParams{best_lambda, shift};
}

}  // namespace ccf

#pragma once

#include <vector>

#include "ccf/feature_bank.hpp"
#include "ccf/matrix.hpp"

namespace ccf {

// Power-transform parameters. shift is added to every value before the
// transform to enforce positivity; it must make x + shift > 0 for every
// input the transform will ever see.
struct BoxCoxParams {
  double lambda = 0.5;
  double shift = 0.0;
};

// (v^lambda - 1) / lambda for lambda != 0, ln(v) at lambda = 0. Evaluated
// as expm1(lambda * ln v) / lambda, which stays accurate through the
// lambda -> 0 branch point; lambda == 1 is exact (v - 1). v must be > 0.
double boxcox_value(double v, double lambda);

// Entrywise transform of x + shift. A non-positive shifted entry raises a
// domain error naming the offending index.
Vector boxcox(const Vector& x, const BoxCoxParams& params);

// Same transform applied to every feature in the bank; splits, labels and
// names are untouched. In-memory result, not meant to be persisted.
FeatureBank boxcox_bank(const FeatureBank& bank, const BoxCoxParams& params);

// max(0, 1e-6 - min value) over every feature in the bank, so the fitted
// transform stays in-domain on each split.
double auto_shift(const FeatureBank& bank);

// Grid search maximizing the Box-Cox profile log-likelihood of the pooled
// base-split feature values (one scalar population). Ties break toward
// the smallest |lambda|, then the smaller lambda.
BoxCoxParams fit_lambda(const FeatureBank& bank, const std::vector<double>& grid);

// The profile log-likelihood used by fit_lambda, exposed for verification.
double boxcox_log_likelihood(const std::vector<double>& shifted_values, double lambda);

}  // namespace ccf

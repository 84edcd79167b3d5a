#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ccf/boxcox.hpp"
#include "ccf/error.hpp"
#include "ccf/rng.hpp"
#include "test_util.hpp"

using namespace ccf;

TEST_CASE("boxcox fixed points and hand values") {
  // x = 1 maps to 0 for every lambda
  for (double lambda : {-1.0, -0.3, 0.0, 0.3, 0.5, 1.0, 2.0})
    CHECK(boxcox(Vector{1.0}, {lambda, 0.0})[0] == 0.0);

  // log branch: ln(e) = 1
  CHECK(boxcox(Vector{std::exp(1.0)}, {0.0, 0.0})[0] ==
        doctest::Approx(1.0).epsilon(1e-14));

  // (sqrt(4) - 1) / 0.5 = 2
  CHECK(boxcox(Vector{4.0}, {0.5, 0.0})[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lambda 1 with zero shift subtracts one exactly") {
  Rng rng(41);
  for (int it = 0; it < 200; ++it) {
    const double x = rng.uniform(0.001, 50.0);
    CHECK(boxcox(Vector{x}, {1.0, 0.0})[0] == x - 1.0);
  }
}

TEST_CASE("boxcox is strictly monotone increasing entrywise") {
  Rng rng(42);
  for (int it = 0; it < 500; ++it) {
    const double lambda = rng.uniform(-2.0, 2.0);
    const double a = rng.uniform(0.001, 20.0);
    const double b = a + rng.uniform(1e-6, 5.0);
    const BoxCoxParams p{lambda, 0.0};
    CHECK(boxcox(Vector{a}, p)[0] < boxcox(Vector{b}, p)[0]);
  }
}

TEST_CASE("boxcox branch point is continuous at lambda = +-1e-9") {
  Rng rng(43);
  std::vector<double> xs = {0.1, 0.5, 0.9, 1.0000001, 2.0, 5.0, 19.0};
  for (int it = 0; it < 100; ++it) xs.push_back(rng.uniform(0.01, 20.0));
  for (double x : xs) {
    const double at_zero = boxcox(Vector{x}, {0.0, 0.0})[0];
    for (double lambda : {1e-9, -1e-9}) {
      const double near = boxcox(Vector{x}, {lambda, 0.0})[0];
      const double denom = std::max(std::abs(at_zero), 1e-12);
      CHECK(std::abs(near - at_zero) / denom < 1e-6);
    }
  }
}

TEST_CASE("boxcox domain error names the offending index") {
  const BoxCoxParams p{0.5, 0.25};
  try {
    boxcox(Vector{1.0, -0.25, 3.0}, p);
    FAIL("expected a domain error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("entry 1") != std::string::npos);
  }
  CHECK_THROWS_AS(boxcox(Vector{1.0}, {0.5, -1.0}), std::invalid_argument);
}

TEST_CASE("boxcox_bank transforms every feature and keeps structure") {
  SyntheticSpec spec;
  spec.n_base_classes = 3;
  spec.n_val_classes = 1;
  spec.n_novel_classes = 2;
  spec.feature_dim = 4;
  spec.samples_per_class = 6;
  spec.seed = 9;
  const FeatureBank bank = generate_synthetic(spec);
  const BoxCoxParams p{0.5, auto_shift(bank)};
  const FeatureBank out = boxcox_bank(bank, p);
  CHECK(out.n_samples() == bank.n_samples());
  CHECK(out.feature_dim() == bank.feature_dim());
  CHECK(out.classes_of(Split::novel) == bank.classes_of(Split::novel));
  for (std::size_t i = 0; i < bank.n_samples(); ++i)
    for (std::size_t j = 0; j < bank.feature_dim(); ++j)
      CHECK(out.sample(i)[j] ==
            doctest::Approx(boxcox_value(bank.sample(i)[j] + p.shift, p.lambda))
                .epsilon(1e-15));
}

TEST_CASE("auto_shift keeps the whole bank strictly positive") {
  SyntheticSpec spec;
  spec.n_base_classes = 4;
  spec.n_val_classes = 2;
  spec.n_novel_classes = 2;
  spec.feature_dim = 8;
  spec.samples_per_class = 10;
  spec.seed = 77;
  const FeatureBank bank = generate_synthetic(spec);
  const double shift = auto_shift(bank);
  const double* p = bank.features().data();
  for (std::size_t i = 0; i < bank.features().size(); ++i) CHECK(p[i] + shift > 0.0);
  CHECK_NOTHROW(boxcox_bank(bank, {0.5, shift}));
}

namespace {

FeatureBank scalar_bank(const std::vector<double>& values) {
  Matrix f(values.size(), 1);
  std::vector<std::uint32_t> labels(values.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) f(i, 0) = values[i];
  return FeatureBank(std::move(f), std::move(labels), {Split::base});
}

}  // namespace

TEST_CASE("fit_lambda picks lambda 0 on log-normal data, against a brute-force oracle") {
  Rng rng(4242);
  std::vector<double> values(5000);
  for (auto& v : values) v = std::exp(rng.normal());
  const FeatureBank bank = scalar_bank(values);
  const std::vector<double> grid = {-1.0, -0.5, 0.0, 0.5, 1.0};

  const BoxCoxParams fitted = fit_lambda(bank, grid);
  CHECK(fitted.lambda == 0.0);
  CHECK(fitted.shift == 0.0);  // data already positive

  // Independent long-double likelihood evaluation over the same grid.
  double best = -1e300;
  double best_lambda = grid.front();
  for (double lambda : grid) {
    long double log_sum = 0.0L, mean = 0.0L;
    std::vector<long double> w(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const long double v = values[i];
      log_sum += std::log(v);
      w[i] = lambda == 0.0 ? std::log(v) : (std::pow(v, (long double)lambda) - 1.0L) / lambda;
      mean += w[i];
    }
    mean /= static_cast<long double>(values.size());
    long double var = 0.0L;
    for (auto wi : w) var += (wi - mean) * (wi - mean);
    var /= static_cast<long double>(values.size());
    const double ll = static_cast<double>(
        -0.5L * static_cast<long double>(values.size()) * std::log(var) +
        (static_cast<long double>(lambda) - 1.0L) * log_sum);
    if (ll > best) {
      best = ll;
      best_lambda = lambda;
    }
  }
  CHECK(best_lambda == fitted.lambda);
}

TEST_CASE("fit_lambda: singleton grid wins regardless of data") {
  Rng rng(5);
  std::vector<double> values(100);
  for (auto& v : values) v = rng.uniform(0.5, 3.0);
  const BoxCoxParams p = fit_lambda(scalar_bank(values), {0.5});
  CHECK(p.lambda == 0.5);
}

TEST_CASE("fit_lambda: all-equal data ties break to the smallest |lambda|") {
  const std::vector<double> values(50, 2.5);
  const BoxCoxParams p = fit_lambda(scalar_bank(values), {2.0, 1.0, 0.5});
  CHECK(p.lambda == 0.5);
  // equal magnitudes fall back to the smaller signed value
  const BoxCoxParams q = fit_lambda(scalar_bank(values), {2.0, -0.5, 1.0, 0.5});
  CHECK(q.lambda == -0.5);
}

TEST_CASE("fit_lambda rejects an empty grid") {
  CHECK_THROWS_AS(fit_lambda(scalar_bank({1.0, 2.0}), {}), std::invalid_argument);
}

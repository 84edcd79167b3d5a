#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ccf/error.hpp"
#include "ccf/train.hpp"
#include "test_util.hpp"

using namespace ccf;

namespace {

FeatureBank small_bank(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_base_classes = 6;
  spec.n_val_classes = 3;
  spec.n_novel_classes = 3;
  spec.feature_dim = 8;
  spec.samples_per_class = 20;
  spec.within_class_stddev = 0.4;
  spec.seed = seed;
  return generate_synthetic(spec);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.hidden_dim = 16;
  cfg.batch_size = 32;
  cfg.max_epochs = 5;
  cfg.learning_rate = 1e-3;
  cfg.temperature = 0.1;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("train: patience 0 stops right after the first evaluation") {
  const FeatureBank bank = small_bank(1);
  TrainConfig cfg = small_config();
  cfg.patience = 0;
  cfg.eval_every = 1;
  cfg.max_epochs = 50;
  int calls = 0;
  const TrainResult res = train_ccf(bank, cfg, [&](const CcfModel&) {
    ++calls;
    return 0.5;
  });
  CHECK(calls == 1);
  CHECK(res.log.epochs.size() == 1);
  CHECK(res.log.evals.size() == 1);
  CHECK(res.log.best_epoch == 1);
  CHECK(res.log.stopped_epoch == 1);
}

TEST_CASE("train: returns the checkpoint with the best validation accuracy") {
  const FeatureBank bank = small_bank(2);
  TrainConfig cfg = small_config();
  cfg.max_epochs = 50;
  cfg.patience = 3;
  const std::vector<double> script = {0.3, 0.9, 0.1, 0.1, 0.1, 0.1};
  std::vector<CcfModel> snapshots;
  const TrainResult res = train_ccf(bank, cfg, [&](const CcfModel& m) {
    snapshots.push_back(m);
    return script[snapshots.size() - 1];
  });
  CHECK(res.log.evals.size() == 5);  // improvements at 1,2; misses at 3,4,5
  CHECK(res.log.best_epoch == 2);
  CHECK(res.log.best_val_accuracy == 0.9);
  CHECK(res.log.stopped_epoch == 5);
  CHECK(res.model == snapshots[1]);
}

TEST_CASE("train: identical config and seed give bitwise-identical weights") {
  const FeatureBank bank = small_bank(3);
  TrainConfig cfg = small_config();
  const TrainResult a = train_ccf(bank, cfg, nullptr);
  const TrainResult b = train_ccf(bank, cfg, nullptr);
  CHECK(a.model == b.model);
  CHECK(a.log.epochs.size() == b.log.epochs.size());
  for (std::size_t i = 0; i < a.log.epochs.size(); ++i)
    CHECK(a.log.epochs[i].loss.total == b.log.epochs[i].loss.total);
}

TEST_CASE("train: optimizer makes progress on synthetic data") {
  double first = 0.0, last = 0.0;
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    const FeatureBank bank = small_bank(seed);
    TrainConfig cfg = small_config();
    cfg.seed = seed;
    cfg.max_epochs = 20;
    const TrainResult res = train_ccf(bank, cfg, nullptr);
    first += res.log.epochs.front().loss.total;
    last += res.log.epochs.back().loss.total;
  }
  CHECK(last / 3.0 < first / 3.0);
}

TEST_CASE("train: empty base split is an error") {
  Matrix f = Matrix::from_rows({{1.0}, {2.0}});
  const FeatureBank bank(std::move(f), {0, 1}, {Split::val, Split::novel});
  CHECK_THROWS_AS(train_ccf(bank, small_config(), nullptr), DataError);
}

TEST_CASE("train: callback without a validation split is an error") {
  Matrix f = Matrix::from_rows({{1.0}, {2.0}});
  const FeatureBank bank(std::move(f), {0, 1}, {Split::base, Split::novel});
  CHECK_THROWS_AS(train_ccf(bank, small_config(), [](const CcfModel&) { return 0.0; }),
                  DataError);
}

TEST_CASE("train: divergence raises a numeric error naming the epoch") {
  const FeatureBank bank = small_bank(4);
  TrainConfig cfg = small_config();
  cfg.learning_rate = 1e100;  // first step shoots the weights past overflow
  cfg.max_epochs = 50;
  try {
    train_ccf(bank, cfg, nullptr);
    FAIL("expected divergence");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("train: ce-free mode reports zero ce and still reconstructs") {
  const FeatureBank bank = small_bank(5);
  TrainConfig cfg = small_config();
  cfg.ce_enabled = false;
  cfg.max_epochs = 10;
  const TrainResult res = train_ccf(bank, cfg, nullptr);
  for (const auto& row : res.log.epochs) {
    CHECK(row.loss.ce == 0.0);
    CHECK(std::abs(row.loss.total - (row.loss.mse + cfg.beta * row.loss.frob)) < 1e-10);
  }
}

#pragma once

#include <cstdint>
#include <vector>

#include "ccf/classifier.hpp"
#include "ccf/feature_bank.hpp"
#include "ccf/model.hpp"
#include "ccf/rng.hpp"

namespace ccf {

// One N-way K-shot task. Episode-local labels run 0..way-1 in the order
// classes were drawn; support and query rows are class-major. Support and
// query samples never overlap within a class.
struct Episode {
  std::size_t way = 0;
  std::size_t shot = 0;
  std::size_t query_per_class = 0;
  std::vector<std::uint32_t> class_ids;  // bank class ids, draw order
  LabeledSet support;                    // way*shot rows
  LabeledSet query;                      // way*query_per_class rows
};

Episode sample_episode(const FeatureBank& bank, Split split, std::size_t way,
                       std::size_t shot, std::size_t query_per_class, Rng& rng);

// S united with its rectified copies: 2*way*shot rows, originals first,
// then the rectified feature of each original with the same label.
LabeledSet augment_support(const Episode& episode, const CcfModel& model);

struct EvalReport {
  std::size_t n_episodes = 0;
  double mean_accuracy = 0.0;
  double ci95_halfwidth = 0.0;  // 1.96 * stddev(n-1) / sqrt(n)
  std::vector<double> per_episode_accuracies;
};

// Mean and 95% half-width from per-episode accuracies (n-1 stddev;
// half-width 0 for a single episode).
EvalReport aggregate_report(std::vector<double> per_episode);

struct EvalOptions {
  std::size_t way = 5;
  std::size_t shot = 1;
  std::size_t query_per_class = 15;
  std::size_t n_episodes = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Episodic evaluation over `split`. With a model, each episode's support
// set is augmented with rectified features before fitting the classifier;
// query sets are identical either way under the same seed. Episode i uses
// an Rng seeded with derive(seed, i), so results do not depend on thread
// count or execution order. The bank must already be in the model's
// (transformed) feature space.
EvalReport evaluate(const FeatureBank& bank, Split split, const CcfModel* model,
                    const ClassifierSpec& classifier, const EvalOptions& options);

}  // namespace ccf

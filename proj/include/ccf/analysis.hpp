#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ccf/feature_bank.hpp"
#include "ccf/model.hpp"
#include "ccf/train.hpp"

namespace ccf {

// Mean Euclidean distance of original (d) and rectified (d_hat) features
// to their ground-truth class means, per class and split-wide. Distances
// live in the space the model operates in, i.e. the transformed bank
// passed in.
struct DistanceReport {
  Split split = Split::novel;
  double mean_d = 0.0;
  double mean_d_hat = 0.0;
  struct PerClass {
    std::uint32_t class_id = 0;
    std::size_t n_samples = 0;
    double mean_d = 0.0;
    double mean_d_hat = 0.0;
  };
  std::vector<PerClass> per_class;
};

DistanceReport centroid_distances(const FeatureBank& bank, Split split,
                                  const CcfModel& model);

// Latent geometry: mean over classes of the mean squared distance of z to
// its class-mean z, plus the mean pairwise distance between class-mean
// z vectors. Single-sample classes contribute zero variance.
struct DispersionReport {
  Split split = Split::base;
  double intra_class_variance = 0.0;
  double between_class_spread = 0.0;
  struct PerClass {
    std::uint32_t class_id = 0;
    std::size_t n_samples = 0;
    double variance = 0.0;
  };
  std::vector<PerClass> per_class;
};

DispersionReport latent_dispersion(const FeatureBank& bank, const CcfModel& model,
                                   Split split);

// Mean ||x - rectify(x)||^2 over the split (same per-sample convention as
// the training loss).
double mean_reconstruction_error(const FeatureBank& bank, Split split,
                                 const CcfModel& model);

struct SweepRow {
  double temperature = 0.0;
  std::uint64_t seed = 0;
  double reconstruction_error = 0.0;  // on the base split, final model
  double val_accuracy = 0.0;
  std::size_t epochs_trained = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // temperatures outer, seeds inner
};

// Trains one model per (temperature, seed) with everything else held at
// base_config, recording final base-split reconstruction error and the
// validation accuracy from val_eval. Cells are independent and may run
// concurrently; rows always come back in (temperature, seed) order.
SweepReport temperature_sweep(const FeatureBank& transformed_bank,
                              const TrainConfig& base_config,
                              const std::vector<double>& temperatures,
                              const std::vector<std::uint64_t>& seeds,
                              const std::function<double(const CcfModel&)>& val_eval,
                              int threads = 1);

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ccf

#pragma once

#include <functional>
#include <vector>

#include "ccf/feature_bank.hpp"
#include "ccf/model.hpp"

namespace ccf {

// Validation-accuracy callback: given the current model, returns mean
// few-shot accuracy on the validation split (full pipeline: rectify,
// combine, fit classifier). Supplied by the caller so this module stays
// independent of the episodic evaluator.
using ValAccuracyFn = std::function<double(const CcfModel&)>;

struct TrainLog {
  struct EpochRow {
    std::size_t epoch = 0;  // 1-based
    LossBreakdown loss;     // sample-weighted mean over the epoch's batches
  };
  struct EvalRow {
    std::size_t epoch = 0;
    double val_accuracy = 0.0;
    bool improved = false;
  };
  std::vector<EpochRow> epochs;
  std::vector<EvalRow> evals;
  std::size_t best_epoch = 0;       // 0 when no evaluation ran
  double best_val_accuracy = -1.0;  // -1 when no evaluation ran
  std::size_t stopped_epoch = 0;    // 0 when training ran to max_epochs
};

struct TrainResult {
  CcfModel model;  // checkpoint with the best validation accuracy
  TrainLog log;
};

// Mini-batch Adam over the shuffled base split of an already-transformed
// bank. Every eval_every epochs val_eval is invoked and the best
// checkpoint kept; training stops once `patience` consecutive
// evaluations fail to improve (patience 0 stops right after the first
// evaluation). With a null val_eval the loop runs to max_epochs and the
// final weights are returned. Pure function of (bank, config).
TrainResult train_ccf(const FeatureBank& transformed_bank, const TrainConfig& config,
                      const ValAccuracyFn& val_eval);

}  // namespace ccf

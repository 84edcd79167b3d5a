#include "ccf/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "ccf/error.hpp"
#include "ccf/nn.hpp"

namespace ccf {

TrainResult train_ccf(const FeatureBank& bank, const TrainConfig& config,
                      const ValAccuracyFn& val_eval) {
  if (!(config.temperature > 0.0))
    throw std::invalid_argument("train: temperature must be positive");
  if (!(config.beta >= 0.0)) throw std::invalid_argument("train: beta must be >= 0");
  if (config.batch_size == 0 || config.max_epochs == 0 || config.eval_every == 0)
    throw std::invalid_argument("train: batch_size, max_epochs, eval_every must be positive");

  const auto base_classes = bank.classes_of(Split::base);
  if (base_classes.empty()) throw DataError("train: base split is empty");
  if (val_eval && bank.classes_of(Split::val).empty())
    throw DataError("train: validation split is empty");

  // Latent index = rank of the class id among base classes (ascending).
  std::vector<std::uint32_t> latent_index(bank.n_classes(),
                                          std::numeric_limits<std::uint32_t>::max());
  for (std::uint32_t i = 0; i < base_classes.size(); ++i)
    latent_index[base_classes[i]] = i;

  std::vector<std::uint32_t> samples = bank.samples_of(Split::base);

  CcfArch arch;
  arch.feature_dim = bank.feature_dim();
  arch.hidden_dim = config.hidden_dim;
  arch.n_base_classes = base_classes.size();
  arch.activation_slope = config.activation_slope;
  arch.encoder_output_activation = config.encoder_output_activation;
  arch.decoder_output_activation = config.decoder_output_activation;

  Rng rng(config.seed);
  CcfModel model(arch, rng);
  AdamState adam({config.learning_rate, config.adam_beta1, config.adam_beta2,
                  config.adam_epsilon},
                 CcfModel::param_sizes(arch));
  const LossConfig loss_cfg = config.loss_config();

  TrainResult result;
  TrainLog& log = result.log;
  CcfModel best = model;
  double best_acc = -1.0;
  std::size_t best_epoch = 0;
  std::size_t stagnant = 0;
  bool evaluated = false;
  bool stopped = false;

  const std::size_t dim = bank.feature_dim();
  Matrix batch_x;
  std::vector<std::uint32_t> batch_y;

  for (std::size_t epoch = 1; epoch <= config.max_epochs && !stopped; ++epoch) {
    rng.shuffle(samples);

    LossBreakdown epoch_loss;
    for (std::size_t start = 0; start < samples.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, samples.size() - start);
      batch_x = Matrix(n, dim);
      batch_y.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        const std::uint32_t idx = samples[start + r];
        std::memcpy(batch_x.data() + r * dim, bank.sample(idx).data(),
                    dim * sizeof(double));
        batch_y[r] = latent_index[bank.label(idx)];
      }

      auto [lb, grads] = ccf_loss_gradients(model, batch_x, batch_y, loss_cfg);
      if (!std::isfinite(lb.total))
        throw NumericError("training diverged (non-finite loss) at epoch " +
                           std::to_string(epoch));
      adam.step(model.param_views(), grads.views());

      const double w = static_cast<double>(n) / static_cast<double>(samples.size());
      epoch_loss.mse += w * lb.mse;
      epoch_loss.ce += w * lb.ce;
      epoch_loss.frob += w * lb.frob;
      epoch_loss.total += w * lb.total;
    }
    log.epochs.push_back({epoch, epoch_loss});

    if (val_eval && epoch % config.eval_every == 0) {
      const double acc = val_eval(model);
      const bool improved = !evaluated || acc > best_acc;
      evaluated = true;
      log.evals.push_back({epoch, acc, improved});
      if (improved) {
        best_acc = acc;
        best = model;
        best_epoch = epoch;
        stagnant = 0;
      } else {
        ++stagnant;
      }
      if (stagnant >= config.patience) {
        log.stopped_epoch = epoch;
        stopped = true;
      }
    }
  }

  if (evaluated) {
    result.model = std::move(best);
    log.best_epoch = best_epoch;
    log.best_val_accuracy = best_acc;
  } else {
    result.model = std::move(model);
  }
  return result;
}

}  // namespace ccf

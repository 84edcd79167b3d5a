#include "ccf/fewshot.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "ccf/error.hpp"

namespace ccf {

Episode sample_episode(const FeatureBank& bank, Split split, std::size_t way,
                       std::size_t shot, std::size_t query_per_class, Rng& rng) {
  if (way == 0 || shot == 0 || query_per_class == 0)
    throw std::invalid_argument("sample_episode: way, shot, query must be positive");
  const auto classes = bank.classes_of(split);
  if (classes.size() < way)
    throw DataError("sample_episode: split '" + std::string(split_name(split)) +
                    "' has " + std::to_string(classes.size()) + " classes, need " +
                    std::to_string(way));

  const std::size_t per_class = shot + query_per_class;
  const std::size_t dim = bank.feature_dim();

  Episode ep;
  ep.way = way;
  ep.shot = shot;
  ep.query_per_class = query_per_class;
  ep.support.x = Matrix(way * shot, dim);
  ep.support.y.resize(way * shot);
  ep.query.x = Matrix(way * query_per_class, dim);
  ep.query.y.resize(way * query_per_class);

  const auto chosen = rng.sample_without_replacement(
      static_cast<std::uint32_t>(classes.size()), static_cast<std::uint32_t>(way));
  for (std::size_t local = 0; local < way; ++local) {
    const std::uint32_t class_id = classes[chosen[local]];
    ep.class_ids.push_back(class_id);
    const auto& members = bank.class_samples(class_id);
    if (members.size() < per_class)
      throw DataError("sample_episode: class " + std::to_string(class_id) + " has " +
                      std::to_string(members.size()) + " samples, need " +
                      std::to_string(per_class));
    const auto picks = rng.sample_without_replacement(
        static_cast<std::uint32_t>(members.size()), static_cast<std::uint32_t>(per_class));
    for (std::size_t s = 0; s < shot; ++s) {
      const std::size_t row = local * shot + s;
      std::memcpy(ep.support.x.data() + row * dim, bank.sample(members[picks[s]]).data(),
                  dim * sizeof(double));
      ep.support.y[row] = static_cast<std::uint32_t>(local);
    }
    for (std::size_t q = 0; q < query_per_class; ++q) {
      const std::size_t row = local * query_per_class + q;
      std::memcpy(ep.query.x.data() + row * dim,
                  bank.sample(members[picks[shot + q]]).data(), dim * sizeof(double));
      ep.query.y[row] = static_cast<std::uint32_t>(local);
    }
  }
  return ep;
}

LabeledSet augment_support(const Episode& episode, const CcfModel& model) {
  const std::size_t n = episode.support.x.rows();
  const std::size_t dim = episode.support.x.cols();
  if (dim != model.arch().feature_dim)
    throw std::invalid_argument("augment_support: feature dim mismatch");

  LabeledSet out;
  out.x = Matrix(2 * n, dim);
  out.y.resize(2 * n);
  std::memcpy(out.x.data(), episode.support.x.data(), n * dim * sizeof(double));
  const Matrix rectified = model.rectify_rows(episode.support.x);
  std::memcpy(out.x.data() + n * dim, rectified.data(), n * dim * sizeof(double));
  for (std::size_t i = 0; i < n; ++i) {
    out.y[i] = episode.support.y[i];
    out.y[n + i] = episode.support.y[i];
  }
  return out;
}

EvalReport aggregate_report(std::vector<double> per_episode) {
  if (per_episode.empty())
    throw std::invalid_argument("aggregate_report: no episodes");
  EvalReport r;
  r.n_episodes = per_episode.size();
  double sum = 0.0;
  for (double a : per_episode) sum += a;
  r.mean_accuracy = sum / static_cast<double>(r.n_episodes);
  bool constant = true;
  for (double a : per_episode) constant = constant && a == per_episode[0];
  if (constant) r.mean_accuracy = per_episode[0];
  if (r.n_episodes > 1 && !constant) {
    double ss = 0.0;
    for (double a : per_episode) {
      const double d = a - r.mean_accuracy;
      ss += d * d;
    }
    const double stddev = std::sqrt(ss / static_cast<double>(r.n_episodes - 1));
    r.ci95_halfwidth = 1.96 * stddev / std::sqrt(static_cast<double>(r.n_episodes));
  }
  r.per_episode_accuracies = std::move(per_episode);
  return r;
}

EvalReport evaluate(const FeatureBank& bank, Split split, const CcfModel* model,
                    const ClassifierSpec& classifier, const EvalOptions& options) {
  if (options.n_episodes == 0)
    throw std::invalid_argument("evaluate: n_episodes must be positive");
  if (model) {
    if (model->arch().feature_dim != bank.feature_dim())
      throw DataError("evaluate: model feature dim " +
                      std::to_string(model->arch().feature_dim) +
                      " does not match bank dim " + std::to_string(bank.feature_dim()));
    const auto base = bank.classes_of(Split::base);
    if (!base.empty() && base.size() != model->arch().n_base_classes)
      throw DataError("evaluate: model latent dim " +
                      std::to_string(model->arch().n_base_classes) +
                      " does not match the bank's " + std::to_string(base.size()) +
                      " base classes");
  }

  std::vector<double> acc(options.n_episodes);
  auto run_episode = [&](std::size_t i) {
    Rng rng(Rng::derive(options.seed, i));
    const Episode ep =
        sample_episode(bank, split, options.way, options.shot, options.query_per_class, rng);
    const Classifier clf =
        model ? Classifier::fit(augment_support(ep, *model), classifier)
              : Classifier::fit(ep.support, classifier);
    std::size_t correct = 0;
    for (std::size_t q = 0; q < ep.query.x.rows(); ++q)
      if (clf.predict(ep.query.x.row(q)) == ep.query.y[q]) ++correct;
    acc[i] = static_cast<double>(correct) / static_cast<double>(ep.query.x.rows());
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1 || options.n_episodes == 1) {
    for (std::size_t i = 0; i < options.n_episodes; ++i) run_episode(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= options.n_episodes) return;
        try {
          run_episode(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers =
        std::min<std::size_t>(threads, options.n_episodes);
    pool.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  return aggregate_report(std::move(acc));
}

}  // namespace ccf

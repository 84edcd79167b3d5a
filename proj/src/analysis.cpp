#include "ccf/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "ccf/error.hpp"

namespace ccf {

DistanceReport centroid_distances(const FeatureBank& bank, Split split,
                                  const CcfModel& model) {
  const auto classes = bank.classes_of(split);
  if (classes.empty())
    throw DataError(std::string("centroid_distances: split '") + split_name(split) +
                    "' is empty");
  const Matrix centroids = class_centroids(bank, split);

  DistanceReport report;
  report.split = split;
  double sum_d = 0.0, sum_d_hat = 0.0;
  std::size_t total = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& members = bank.class_samples(classes[c]);
    const auto center = centroids.row(c);
    double class_d = 0.0, class_d_hat = 0.0;
    for (std::uint32_t idx : members) {
      const Vector x(std::vector<double>(bank.sample(idx).begin(), bank.sample(idx).end()));
      const Vector x_hat = model.rectify(x);
      class_d += std::sqrt(squared_distance(x.span(), center));
      class_d_hat += std::sqrt(squared_distance(x_hat.span(), center));
    }
    sum_d += class_d;
    sum_d_hat += class_d_hat;
    total += members.size();
    const double inv = 1.0 / static_cast<double>(members.size());
    report.per_class.push_back(
        {classes[c], members.size(), class_d * inv, class_d_hat * inv});
  }
  report.mean_d = sum_d / static_cast<double>(total);
  report.mean_d_hat = sum_d_hat / static_cast<double>(total);
  return report;
}

DispersionReport latent_dispersion(const FeatureBank& bank, const CcfModel& model,
                                   Split split) {
  const auto classes = bank.classes_of(split);
  if (classes.empty())
    throw DataError(std::string("latent_dispersion: split '") + split_name(split) +
                    "' is empty");

  DispersionReport report;
  report.split = split;
  Matrix class_means(classes.size(), model.arch().n_base_classes);
  std::vector<Matrix> latents(classes.size());

  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& members = bank.class_samples(classes[c]);
    Matrix x(members.size(), bank.feature_dim());
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto row = bank.sample(members[i]);
      std::copy(row.begin(), row.end(), x.data() + i * bank.feature_dim());
    }
    latents[c] = model.encode_rows(x);
    const Vector mean = column_sums(latents[c]);
    for (std::size_t j = 0; j < mean.dim(); ++j)
      class_means(c, j) = mean[j] / static_cast<double>(members.size());
  }

  double intra_sum = 0.0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& z = latents[c];
    double var = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i)
      var += squared_distance(z.row(i), class_means.row(c));
    var /= static_cast<double>(z.rows());
    intra_sum += var;
    report.per_class.push_back({classes[c], z.rows(), var});
  }
  report.intra_class_variance = intra_sum / static_cast<double>(classes.size());

  if (classes.size() > 1) {
    double spread = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < classes.size(); ++a)
      for (std::size_t b = a + 1; b < classes.size(); ++b) {
        spread += std::sqrt(squared_distance(class_means.row(a), class_means.row(b)));
        ++pairs;
      }
    report.between_class_spread = spread / static_cast<double>(pairs);
  }
  return report;
}

double mean_reconstruction_error(const FeatureBank& bank, Split split,
                                 const CcfModel& model) {
  const auto samples = bank.samples_of(split);
  if (samples.empty())
    throw DataError(std::string("mean_reconstruction_error: split '") +
                    split_name(split) + "' is empty");
  // Chunked so big splits do not materialize one giant activations block.
  const std::size_t chunk = 512;
  const std::size_t dim = bank.feature_dim();
  double sum = 0.0;
  for (std::size_t start = 0; start < samples.size(); start += chunk) {
    const std::size_t n = std::min(chunk, samples.size() - start);
    Matrix x(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = bank.sample(samples[start + i]);
      std::copy(row.begin(), row.end(), x.data() + i * dim);
    }
    const Matrix x_hat = model.rectify_rows(x);
    for (std::size_t i = 0; i < n; ++i)
      sum += squared_distance(x.row(i), x_hat.row(i));
  }
  return sum / static_cast<double>(samples.size());
}

SweepReport temperature_sweep(const FeatureBank& bank, const TrainConfig& base_config,
                              const std::vector<double>& temperatures,
                              const std::vector<std::uint64_t>& seeds,
                              const std::function<double(const CcfModel&)>& val_eval,
                              int threads) {
  if (temperatures.empty())
    throw std::invalid_argument("temperature_sweep: no temperatures given");
  if (seeds.empty()) throw std::invalid_argument("temperature_sweep: no seeds given");

  const std::size_t n_cells = temperatures.size() * seeds.size();
  SweepReport report;
  report.rows.resize(n_cells);

  auto run_cell = [&](std::size_t cell) {
    const double t = temperatures[cell / seeds.size()];
    const std::uint64_t seed = seeds[cell % seeds.size()];
    TrainConfig cfg = base_config;
    cfg.temperature = t;
    cfg.seed = seed;
    try {
      TrainResult res = train_ccf(bank, cfg, val_eval);
      SweepRow row;
      row.temperature = t;
      row.seed = seed;
      row.reconstruction_error = mean_reconstruction_error(bank, Split::base, res.model);
      row.val_accuracy = val_eval ? val_eval(res.model) : 0.0;
      row.epochs_trained = res.log.epochs.size();
      report.rows[cell] = row;
    } catch (const std::exception& e) {
      throw NumericError("sweep cell (T=" + std::to_string(t) +
                         ", seed=" + std::to_string(seed) + ") failed: " + e.what());
    }
  };

  const int n_threads = std::max(1, threads);
  if (n_threads == 1 || n_cells == 1) {
    for (std::size_t c = 0; c < n_cells; ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= n_cells) return;
        try {
          run_cell(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min<std::size_t>(n_threads, n_cells);
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  return report;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length series of size >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;  // a constant series carries no order
  return cov / std::sqrt(va * vb);
}

}  // namespace ccf

#include "ccf/report_io.hpp"

#include <charconv>
#include <fstream>

#include "ccf/error.hpp"

namespace ccf {

std::string csv_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

nlohmann::ordered_json eval_report_json(const EvalReport& report,
                                        const nlohmann::ordered_json& config) {
  nlohmann::ordered_json j;
  j["n_episodes"] = report.n_episodes;
  j["mean_accuracy"] = report.mean_accuracy;
  j["ci95_halfwidth"] = report.ci95_halfwidth;
  j["per_episode_accuracies"] = report.per_episode_accuracies;
  if (!config.empty()) j["config"] = config;
  return j;
}

nlohmann::ordered_json distance_report_json(const DistanceReport& distances,
                                            const DispersionReport& dispersion,
                                            const nlohmann::ordered_json& config) {
  nlohmann::ordered_json j;
  j["split"] = split_name(distances.split);
  j["mean_d"] = distances.mean_d;
  j["mean_d_hat"] = distances.mean_d_hat;
  auto& per_class = j["per_class"] = nlohmann::ordered_json::array();
  for (const auto& pc : distances.per_class)
    per_class.push_back({{"class_id", pc.class_id},
                         {"n_samples", pc.n_samples},
                         {"mean_d", pc.mean_d},
                         {"mean_d_hat", pc.mean_d_hat}});
  j["latent"] = {{"intra_class_variance", dispersion.intra_class_variance},
                 {"between_class_spread", dispersion.between_class_spread}};
  if (!config.empty()) j["config"] = config;
  return j;
}

std::string distance_report_csv(const DistanceReport& distances,
                                const DispersionReport& dispersion) {
  std::string out = "split,class_id,n_samples,mean_d,mean_d_hat,latent_intra_class_variance\n";
  for (std::size_t i = 0; i < distances.per_class.size(); ++i) {
    const auto& pc = distances.per_class[i];
    const double latent_var =
        i < dispersion.per_class.size() ? dispersion.per_class[i].variance : 0.0;
    out += std::string(split_name(distances.split)) + "," + std::to_string(pc.class_id) +
           "," + std::to_string(pc.n_samples) + "," + csv_double(pc.mean_d) + "," +
           csv_double(pc.mean_d_hat) + "," + csv_double(latent_var) + "\n";
  }
  return out;
}

nlohmann::ordered_json sweep_report_json(const SweepReport& report,
                                         const nlohmann::ordered_json& config) {
  nlohmann::ordered_json j;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"temperature", r.temperature},
                    {"seed", r.seed},
                    {"reconstruction_error", r.reconstruction_error},
                    {"val_accuracy", r.val_accuracy},
                    {"epochs_trained", r.epochs_trained}});
  if (!config.empty()) j["config"] = config;
  return j;
}

std::string sweep_report_csv(const SweepReport& report) {
  std::string out = "temperature,seed,reconstruction_error,val_accuracy,epochs_trained\n";
  for (const auto& r : report.rows)
    out += csv_double(r.temperature) + "," + std::to_string(r.seed) + "," +
           csv_double(r.reconstruction_error) + "," + csv_double(r.val_accuracy) + "," +
           std::to_string(r.epochs_trained) + "\n";
  return out;
}

nlohmann::ordered_json train_log_json(const TrainLog& log,
                                      const nlohmann::ordered_json& config) {
  nlohmann::ordered_json j;
  auto& epochs = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : log.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"mse", e.loss.mse},
                      {"ce", e.loss.ce},
                      {"frob", e.loss.frob},
                      {"total", e.loss.total}});
  auto& evals = j["evals"] = nlohmann::ordered_json::array();
  for (const auto& e : log.evals)
    evals.push_back({{"epoch", e.epoch},
                     {"val_accuracy", e.val_accuracy},
                     {"improved", e.improved}});
  j["best_epoch"] = log.best_epoch;
  if (log.best_epoch > 0)
    j["best_val_accuracy"] = log.best_val_accuracy;
  else
    j["best_val_accuracy"] = nullptr;
  j["stopped_epoch"] = log.stopped_epoch;
  if (!config.empty()) j["config"] = config;
  return j;
}

}  // namespace ccf

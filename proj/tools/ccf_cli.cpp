// ccf: feature-level few-shot classification toolkit.
//
// Subcommands: gen-synthetic, train, eval, sweep, analyze, convert.
// Every randomized command requires an explicit --seed; re-running any
// command with identical flags produces byte-identical outputs.
// Exit codes: 0 success, 1 usage/config error, 2 data/format error,
// 3 numerical failure.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccf/analysis.hpp"
#include "ccf/boxcox.hpp"
#include "ccf/error.hpp"
#include "ccf/feature_bank.hpp"
#include "ccf/fewshot.hpp"
#include "ccf/model.hpp"
#include "ccf/report_io.hpp"
#include "ccf/train.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct RunConfig {
  ccf::SyntheticSpec synth;  // seed supplied via --seed
  double boxcox_lambda = 0.5;
  double boxcox_shift = -1.0;  // negative = derive from the bank
  bool boxcox_fit = false;
  std::vector<double> boxcox_grid = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  ccf::TrainConfig train;
  std::size_t way = 5;
  std::size_t shot = 1;
  std::size_t query = 15;
  std::size_t episodes = 2000;
  ccf::ClassifierSpec classifier;
  std::string classifier_kind = "logistic_regression";
  std::vector<double> temperatures = {0.02, 0.05, 0.1, 0.5, 1.0, 2.0};
  std::size_t sweep_seeds = 3;
  int threads = 1;
};

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    std::string tok =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.erase(0, 1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
    if (!tok.empty()) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw ccf::UsageError("bad value '" + tok + "' in " + what);
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Binds config-file keys (flat dotted JSON) to the same storage as the
// CLI flags. Precedence: defaults < file < flags.
class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_,
                    "JSON config file with flat dotted keys; flags override");
  }

  template <typename T>
  CLI::Option* add(const std::string& flag, const std::string& key, T& target,
                   const std::string& desc) {
    CLI::Option* opt = cmd_->add_option(flag, target, desc)->capture_default_str();
    entries_.push_back({key, opt,
                        [&target](const json& v) { target = v.get<T>(); },
                        [&target] { return ordered_json(target); }});
    return opt;
  }

  CLI::Option* add_bool(const std::string& flag, const std::string& key, bool& target,
                        const std::string& desc) {
    CLI::Option* opt = cmd_->add_flag(flag, target, desc);
    entries_.push_back({key, opt,
                        [&target](const json& v) { target = v.get<bool>(); },
                        [&target] { return ordered_json(target); }});
    return opt;
  }

  // Comma-separated list flag; plain JSON array in the file.
  CLI::Option* add_list(const std::string& flag, const std::string& key,
                        std::vector<double>& target, const std::string& desc) {
    auto staged = std::make_shared<std::string>();
    CLI::Option* opt = cmd_->add_option(flag, *staged, desc);
    lists_.push_back({staged, &target, key});
    entries_.push_back({key, opt,
                        [&target](const json& v) { target = v.get<std::vector<double>>(); },
                        [&target] { return ordered_json(target); }});
    return opt;
  }

  // Apply the config file (if any) under already-parsed flags, then
  // materialize list flags.
  void finalize() {
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in) throw ccf::UsageError("cannot open config file " + config_path_);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw ccf::UsageError("config file " + config_path_ + ": " + e.what());
      }
      if (!doc.is_object())
        throw ccf::UsageError("config file must hold a JSON object of dotted keys");
      for (const auto& [key, value] : doc.items()) {
        Entry* entry = find(key);
        if (!entry) throw ccf::UsageError("unknown config key '" + key + "'");
        if (entry->opt->count() == 0) {  // flags win over the file
          try {
            entry->from_json(value);
          } catch (const json::exception& e) {
            throw ccf::UsageError("config key '" + key + "': " + e.what());
          }
        }
      }
    }
    for (auto& list : lists_)
      if (!list.staged->empty())
        *list.target = parse_double_list(*list.staged, list.key);
  }

  void echo_extra(const std::string& key, ordered_json value) {
    extras_.emplace_back(key, std::move(value));
  }

  ordered_json echo() const {
    ordered_json out;
    for (const auto& e : entries_) out[e.key] = e.to_json();
    for (const auto& [k, v] : extras_) out[k] = v;
    return out;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<void(const json&)> from_json;
    std::function<ordered_json()> to_json;
  };
  struct ListBinding {
    std::shared_ptr<std::string> staged;
    std::vector<double>* target;
    std::string key;
  };

  Entry* find(const std::string& key) {
    for (auto& e : entries_)
      if (e.key == key) return &e;
    return nullptr;
  }

  CLI::App* cmd_;
  std::string config_path_;
  std::vector<Entry> entries_;
  std::vector<ListBinding> lists_;
  std::vector<std::pair<std::string, ordered_json>> extras_;
};

void bind_boxcox(ConfigBinder& b, RunConfig& rc) {
  b.add("--boxcox-lambda", "boxcox.lambda", rc.boxcox_lambda,
        "Power-transform exponent");
  b.add("--boxcox-shift", "boxcox.shift", rc.boxcox_shift,
        "Additive shift before the transform; negative = derive from the bank");
  b.add_bool("--boxcox-fit", "boxcox.fit", rc.boxcox_fit,
             "Fit lambda on the base split by profile likelihood over the grid");
  b.add_list("--boxcox-grid", "boxcox.grid", rc.boxcox_grid,
             "Candidate lambda grid (comma separated)");
}

void bind_train(ConfigBinder& b, RunConfig& rc) {
  b.add("--temperature", "train.temperature", rc.train.temperature,
        "Softmax temperature (0.1 suits 1-shot, 0.02 suits 5-shot)");
  b.add("--beta", "train.beta", rc.train.beta, "Frobenius penalty weight on z");
  b.add("--lr", "train.learning_rate", rc.train.learning_rate, "Adam learning rate");
  b.add("--batch-size", "train.batch_size", rc.train.batch_size, "Mini-batch size");
  b.add("--max-epochs", "train.max_epochs", rc.train.max_epochs, "Epoch cap");
  b.add("--eval-every", "train.eval_every", rc.train.eval_every,
        "Epochs between validation evaluations");
  b.add("--patience", "train.patience", rc.train.patience,
        "Consecutive non-improving evaluations before stopping");
  b.add("--val-episodes", "train.val_episodes", rc.train.val_episodes,
        "Validation episodes per evaluation");
  b.add("--hidden", "train.hidden_dim", rc.train.hidden_dim, "Encoder hidden width");
  b.add("--slope", "train.activation_slope", rc.train.activation_slope,
        "LeakyReLU negative slope");
  b.add_bool("--enc-act,!--no-enc-act", "train.encoder_output_activation",
             rc.train.encoder_output_activation, "Activate the latent output");
  b.add_bool("--dec-act,!--no-dec-act", "train.decoder_output_activation",
             rc.train.decoder_output_activation, "Activate the decoder output");
  b.add_bool("--ce,!--no-ce", "train.ce", rc.train.ce_enabled,
             "Classification loss on the latent logits (--no-ce = plain autoencoder)");
}

void bind_episode(ConfigBinder& b, RunConfig& rc) {
  b.add("--way", "episode.way", rc.way, "Classes per episode");
  b.add("--shot", "episode.shot", rc.shot, "Support samples per class");
  b.add("--query", "episode.query", rc.query, "Query samples per class");
}

void bind_classifier(ConfigBinder& b, RunConfig& rc) {
  b.add("--classifier", "classifier.kind", rc.classifier_kind,
        "logistic_regression|cosine|nearest_centroid");
  b.add("--classifier-l2", "classifier.l2", rc.classifier.l2,
        "L2 penalty for logistic regression");
  b.add("--classifier-iters", "classifier.max_iters", rc.classifier.max_iters,
        "Gradient-descent iteration cap");
  b.add("--classifier-lr", "classifier.learning_rate", rc.classifier.learning_rate,
        "Initial gradient-descent step");
  b.add("--classifier-tol", "classifier.tolerance", rc.classifier.tolerance,
        "Gradient max-norm convergence tolerance");
}

ccf::ClassifierSpec resolve_classifier(RunConfig& rc) {
  rc.classifier.kind = ccf::classifier_kind_from_name(rc.classifier_kind);
  return rc.classifier;
}

ccf::BoxCoxParams resolve_boxcox(const RunConfig& rc, const ccf::FeatureBank& bank) {
  if (rc.boxcox_fit) return ccf::fit_lambda(bank, rc.boxcox_grid);
  ccf::BoxCoxParams p;
  p.lambda = rc.boxcox_lambda;
  p.shift = rc.boxcox_shift >= 0.0 ? rc.boxcox_shift : ccf::auto_shift(bank);
  return p;
}

void emit_json(const ordered_json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    ccf::write_text_file(out_path, text);
}

std::string matrix_csv(const ccf::FeatureBank& bank, ccf::Split split,
                       const std::function<ccf::Vector(const ccf::Vector&)>& map,
                       const std::string& prefix) {
  const auto samples = bank.samples_of(split);
  std::string out = "class_id";
  if (!samples.empty()) {
    ccf::Vector first(std::vector<double>(bank.sample(samples[0]).begin(),
                                          bank.sample(samples[0]).end()));
    const std::size_t width = map(first).dim();
    for (std::size_t j = 0; j < width; ++j)
      out += "," + prefix + std::to_string(j);
  }
  out.push_back('\n');
  for (std::uint32_t idx : samples) {
    ccf::Vector x(std::vector<double>(bank.sample(idx).begin(), bank.sample(idx).end()));
    const ccf::Vector v = map(x);
    out += std::to_string(bank.label(idx));
    for (std::size_t j = 0; j < v.dim(); ++j) out += "," + ccf::csv_double(v[j]);
    out.push_back('\n');
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-level few-shot classification with rectified support features"};
  app.require_subcommand(1);

  RunConfig rc;
  std::uint64_t seed = 0;
  std::string bank_path, out_path, checkpoint_path, log_path;
  std::string in_path, split_name = "novel";
  std::string out_json, out_csv, export_latent, export_rectified;
  bool baseline = false;

  // --- gen-synthetic ---------------------------------------------------------
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "Generate a synthetic feature bank with base/val/novel splits");
  ConfigBinder gen_binder(gen);
  gen_binder.add("--base", "synthetic.base_classes", rc.synth.n_base_classes,
                 "Base classes");
  gen_binder.add("--val", "synthetic.val_classes", rc.synth.n_val_classes,
                 "Validation classes");
  gen_binder.add("--novel", "synthetic.novel_classes", rc.synth.n_novel_classes,
                 "Novel classes");
  gen_binder.add("--dim", "synthetic.feature_dim", rc.synth.feature_dim,
                 "Feature dimension");
  gen_binder.add("--per-class", "synthetic.samples_per_class", rc.synth.samples_per_class,
                 "Samples per class");
  gen_binder.add("--centroid-scale", "synthetic.centroid_scale", rc.synth.centroid_scale,
                 "Centroid coordinate scale");
  gen_binder.add("--stddev", "synthetic.within_class_stddev", rc.synth.within_class_stddev,
                 "Within-class standard deviation");
  gen_binder.add("--correlation", "synthetic.novel_correlation", rc.synth.novel_correlation,
                 "Blend toward mixtures of base centroids for val/novel classes");
  gen->add_option("--seed", seed, "Generator seed")->required();
  gen->add_option("-o,--output", out_path, "Bank file (.fbk or .csv)")->required();
  gen->callback([&] {
    gen_binder.finalize();
    rc.synth.seed = seed;
    const ccf::FeatureBank bank = ccf::generate_synthetic(rc.synth);
    ccf::save_bank(bank, out_path, ccf::bank_format_from_extension(out_path));
    gen_binder.echo_extra("seed", seed);
    gen_binder.echo_extra("paths.output", out_path);
    ordered_json summary;
    summary["n_classes"] = bank.n_classes();
    summary["n_samples"] = bank.n_samples();
    summary["feature_dim"] = bank.feature_dim();
    summary["config"] = gen_binder.echo();
    emit_json(summary, "");
  });

  // --- convert ---------------------------------------------------------------
  auto* convert = app.add_subcommand("convert", "Convert a bank between .fbk and .csv");
  convert->add_option("--in", in_path, "Input bank")->required();
  convert->add_option("--out", out_path, "Output bank")->required();
  convert->callback([&] {
    const ccf::FeatureBank bank =
        ccf::load_bank(in_path, ccf::bank_format_from_extension(in_path));
    ccf::save_bank(bank, out_path, ccf::bank_format_from_extension(out_path));
  });

  // --- train -----------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train the feature corrector on the base split");
  ConfigBinder train_binder(train);
  bind_train(train_binder, rc);
  bind_boxcox(train_binder, rc);
  bind_episode(train_binder, rc);
  bind_classifier(train_binder, rc);
  train->add_option("--threads", rc.threads, "Worker threads for validation episodes");
  train->add_option("--bank", bank_path, "Feature bank")->required();
  train->add_option("--seed", seed, "Training seed")->required();
  train->add_option("-o,--output", out_path, "Checkpoint file")->required();
  train->add_option("--log", log_path, "Training log JSON");
  train->callback([&] {
    train_binder.finalize();
    rc.train.seed = seed;
    const ccf::FeatureBank raw =
        ccf::load_bank(bank_path, ccf::bank_format_from_extension(bank_path));
    const ccf::BoxCoxParams boxcox = resolve_boxcox(rc, raw);
    const ccf::FeatureBank bank = ccf::boxcox_bank(raw, boxcox);

    const ccf::ClassifierSpec cspec = resolve_classifier(rc);
    ccf::EvalOptions val_opt;
    val_opt.way = rc.way;
    val_opt.shot = rc.shot;
    val_opt.query_per_class = rc.query;
    val_opt.n_episodes = rc.train.val_episodes;
    val_opt.seed = seed;
    val_opt.threads = rc.threads;
    const auto val_eval = [&](const ccf::CcfModel& m) {
      return ccf::evaluate(bank, ccf::Split::val, &m, cspec, val_opt).mean_accuracy;
    };

    const ccf::TrainResult result = ccf::train_ccf(bank, rc.train, val_eval);
    ccf::save_checkpoint({result.model, rc.train, boxcox}, out_path);

    train_binder.echo_extra("seed", seed);
    train_binder.echo_extra("boxcox.lambda_resolved", boxcox.lambda);
    train_binder.echo_extra("boxcox.shift_resolved", boxcox.shift);
    train_binder.echo_extra("paths.bank", bank_path);
    train_binder.echo_extra("paths.output", out_path);
    const ordered_json echo = train_binder.echo();
    if (!log_path.empty())
      ccf::write_text_file(log_path, ccf::train_log_json(result.log, echo).dump(2) + "\n");

    ordered_json summary;
    summary["epochs_trained"] = result.log.epochs.size();
    summary["best_epoch"] = result.log.best_epoch;
    summary["best_val_accuracy"] = result.log.best_val_accuracy;
    summary["checkpoint"] = out_path;
    summary["config"] = echo;
    emit_json(summary, "");
  });

  // --- eval ------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Episodic N-way K-shot evaluation");
  ConfigBinder eval_binder(eval);
  bind_episode(eval_binder, rc);
  bind_classifier(eval_binder, rc);
  bind_boxcox(eval_binder, rc);
  eval_binder.add("--episodes", "episode.count", rc.episodes, "Number of episodes");
  eval->add_option("--threads", rc.threads, "Worker threads");
  eval->add_option("--bank", bank_path, "Feature bank")->required();
  eval->add_option("--checkpoint", checkpoint_path, "Trained corrector");
  eval->add_option("--split", split_name, "Split to evaluate (base|val|novel)")
      ->capture_default_str();
  eval->add_flag("--baseline", baseline, "Skip support augmentation");
  eval->add_option("--seed", seed, "Episode seed")->required();
  eval->add_option("-o,--output", out_path, "Report JSON (stdout when omitted)");
  eval->callback([&] {
    eval_binder.finalize();
    if (checkpoint_path.empty() && !baseline)
      throw ccf::UsageError("eval needs --checkpoint unless --baseline is given");

    const ccf::FeatureBank raw =
        ccf::load_bank(bank_path, ccf::bank_format_from_extension(bank_path));
    ccf::BoxCoxParams boxcox;
    ccf::Checkpoint ckpt;
    if (!checkpoint_path.empty()) {
      ckpt = ccf::load_checkpoint(checkpoint_path);
      boxcox = ckpt.boxcox;
    } else {
      boxcox = resolve_boxcox(rc, raw);
    }
    const ccf::FeatureBank bank = ccf::boxcox_bank(raw, boxcox);

    ccf::EvalOptions opt;
    opt.way = rc.way;
    opt.shot = rc.shot;
    opt.query_per_class = rc.query;
    opt.n_episodes = rc.episodes;
    opt.seed = seed;
    opt.threads = rc.threads;
    const ccf::ClassifierSpec cspec = resolve_classifier(rc);
    const ccf::CcfModel* model =
        (!checkpoint_path.empty() && !baseline) ? &ckpt.model : nullptr;
    const ccf::EvalReport report =
        ccf::evaluate(bank, ccf::split_from_name(split_name), model, cspec, opt);

    eval_binder.echo_extra("seed", seed);
    eval_binder.echo_extra("split", split_name);
    eval_binder.echo_extra("baseline", baseline);
    eval_binder.echo_extra("boxcox.lambda_resolved", boxcox.lambda);
    eval_binder.echo_extra("boxcox.shift_resolved", boxcox.shift);
    eval_binder.echo_extra("paths.bank", bank_path);
    if (!checkpoint_path.empty())
      eval_binder.echo_extra("paths.checkpoint", checkpoint_path);
    emit_json(ccf::eval_report_json(report, eval_binder.echo()), out_path);
  });

  // --- sweep -----------------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "sweep", "Train across temperatures and seeds; report reconstruction vs accuracy");
  ConfigBinder sweep_binder(sweep);
  bind_train(sweep_binder, rc);
  bind_boxcox(sweep_binder, rc);
  bind_episode(sweep_binder, rc);
  bind_classifier(sweep_binder, rc);
  sweep_binder.add_list("--temps", "sweep.temperatures", rc.temperatures,
                        "Temperatures (comma separated)");
  sweep_binder.add("--seeds", "sweep.seeds", rc.sweep_seeds,
                   "Seeds per temperature (seed, seed+1, ...)");
  sweep->add_option("--threads", rc.threads, "Concurrent sweep cells");
  sweep->add_option("--bank", bank_path, "Feature bank")->required();
  sweep->add_option("--seed", seed, "Base seed")->required();
  sweep->add_option("--out-json", out_json, "Report JSON (stdout when omitted)");
  sweep->add_option("--out-csv", out_csv, "Flat CSV, one row per (T, seed)");
  sweep->callback([&] {
    sweep_binder.finalize();
    if (rc.temperatures.empty()) throw ccf::UsageError("sweep needs at least one --temps value");
    if (rc.sweep_seeds == 0) throw ccf::UsageError("sweep needs at least one seed");

    const ccf::FeatureBank raw =
        ccf::load_bank(bank_path, ccf::bank_format_from_extension(bank_path));
    const ccf::BoxCoxParams boxcox = resolve_boxcox(rc, raw);
    const ccf::FeatureBank bank = ccf::boxcox_bank(raw, boxcox);

    const ccf::ClassifierSpec cspec = resolve_classifier(rc);
    ccf::EvalOptions val_opt;
    val_opt.way = rc.way;
    val_opt.shot = rc.shot;
    val_opt.query_per_class = rc.query;
    val_opt.n_episodes = rc.train.val_episodes;
    val_opt.seed = seed;
    val_opt.threads = 1;  // cells already run concurrently
    const auto val_eval = [&](const ccf::CcfModel& m) {
      return ccf::evaluate(bank, ccf::Split::val, &m, cspec, val_opt).mean_accuracy;
    };

    std::vector<std::uint64_t> seeds(rc.sweep_seeds);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = seed + i;
    const ccf::SweepReport report = ccf::temperature_sweep(
        bank, rc.train, rc.temperatures, seeds, val_eval, rc.threads);

    sweep_binder.echo_extra("seed", seed);
    sweep_binder.echo_extra("boxcox.lambda_resolved", boxcox.lambda);
    sweep_binder.echo_extra("boxcox.shift_resolved", boxcox.shift);
    sweep_binder.echo_extra("paths.bank", bank_path);
    const ordered_json echo = sweep_binder.echo();
    if (!out_csv.empty()) ccf::write_text_file(out_csv, ccf::sweep_report_csv(report));
    emit_json(ccf::sweep_report_json(report, echo), out_json);
  });

  // --- analyze ---------------------------------------------------------------
  auto* analyze = app.add_subcommand(
      "analyze", "Centroid-distance and latent-dispersion report for a trained corrector");
  analyze->add_option("--checkpoint", checkpoint_path, "Trained corrector")->required();
  analyze->add_option("--bank", bank_path, "Feature bank")->required();
  analyze->add_option("--split", split_name, "Split to analyze (base|val|novel)")
      ->capture_default_str();
  analyze->add_option("--out-json", out_json, "Report JSON (stdout when omitted)");
  analyze->add_option("--out-csv", out_csv, "Flat CSV, one row per class");
  analyze->add_option("--export-latent", export_latent,
                      "CSV of per-sample latent logits for the split");
  analyze->add_option("--export-rectified", export_rectified,
                      "CSV of per-sample rectified features for the split");
  analyze->callback([&] {
    const ccf::Checkpoint ckpt = ccf::load_checkpoint(checkpoint_path);
    const ccf::FeatureBank raw =
        ccf::load_bank(bank_path, ccf::bank_format_from_extension(bank_path));
    const ccf::FeatureBank bank = ccf::boxcox_bank(raw, ckpt.boxcox);
    const ccf::Split split = ccf::split_from_name(split_name);

    const ccf::DistanceReport distances = ccf::centroid_distances(bank, split, ckpt.model);
    const ccf::DispersionReport dispersion =
        ccf::latent_dispersion(bank, ckpt.model, split);

    ordered_json echo;
    echo["split"] = split_name;
    echo["boxcox.lambda_resolved"] = ckpt.boxcox.lambda;
    echo["boxcox.shift_resolved"] = ckpt.boxcox.shift;
    echo["paths.bank"] = bank_path;
    echo["paths.checkpoint"] = checkpoint_path;

    if (!out_csv.empty())
      ccf::write_text_file(out_csv, ccf::distance_report_csv(distances, dispersion));
    if (!export_latent.empty())
      ccf::write_text_file(
          export_latent,
          matrix_csv(bank, split,
                     [&](const ccf::Vector& x) { return ckpt.model.encode(x); }, "z"));
    if (!export_rectified.empty())
      ccf::write_text_file(
          export_rectified,
          matrix_csv(bank, split,
                     [&](const ccf::Vector& x) { return ckpt.model.rectify(x); }, "x"));
    emit_json(ccf::distance_report_json(distances, dispersion, echo), out_json);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc_code = app.exit(e);
    return rc_code == 0 ? 0 : 1;
  } catch (const ccf::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ccf::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ccf::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

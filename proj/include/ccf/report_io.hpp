#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "ccf/analysis.hpp"
#include "ccf/fewshot.hpp"
#include "ccf/train.hpp"

namespace ccf {

// JSON/CSV views of the report types. `config` is the caller's effective
// configuration echo; pass an empty object to omit it.

nlohmann::ordered_json eval_report_json(const EvalReport& report,
                                        const nlohmann::ordered_json& config);

nlohmann::ordered_json distance_report_json(const DistanceReport& distances,
                                            const DispersionReport& dispersion,
                                            const nlohmann::ordered_json& config);
std::string distance_report_csv(const DistanceReport& distances,
                                const DispersionReport& dispersion);

nlohmann::ordered_json sweep_report_json(const SweepReport& report,
                                         const nlohmann::ordered_json& config);
std::string sweep_report_csv(const SweepReport& report);

nlohmann::ordered_json train_log_json(const TrainLog& log,
                                      const nlohmann::ordered_json& config);

// Shortest round-trip decimal form; used for every double that lands in
// a CSV cell so identical runs emit identical bytes.
std::string csv_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ccf

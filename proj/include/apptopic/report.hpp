#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "apptopic/pipeline.hpp"

namespace apptopic {

// RFC 4180 field quoting: quoted only when it contains a comma, quote or line break.
std::string csv_field(std::string_view text);

// Splits CSV text into rows of fields. Throws DataError on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// "app_id,assigned_topic,score,verdict"; scores use the shortest exact form.
std::string predictions_csv(const std::vector<Prediction>& predictions);
std::vector<Prediction> parse_predictions_csv(std::string_view text);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

std::string affinity_histogram_csv(const std::vector<std::size_t>& counts);

struct ReportInputs {
  const TrainedDetector* detector = nullptr;  // optional
  DetectionReport evaluation;
  std::vector<CoherenceScore> coherence;  // empty when not computed
  std::optional<std::uint64_t> seed;
};

nlohmann::json report_json(const ReportInputs& inputs);
nlohmann::json topics_json(const TrainedDetector* detector);

// Writes report.json, topics.json and the CSV series into dir. When
// run_timestamp is set it goes to run_info.json, never into report.json.
void write_report_bundle(const std::filesystem::path& dir, const ReportInputs& inputs,
                         const std::optional<std::string>& run_timestamp = std::nullopt);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace apptopic

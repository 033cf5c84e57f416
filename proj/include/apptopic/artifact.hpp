#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "apptopic/pipeline.hpp"

namespace apptopic {

// Versioned JSON form of a TrainedDetector. Sections that do not apply to the
// variant are omitted. Support vectors are stored as the indices of their set
// bits.
nlohmann::json detector_to_json(const TrainedDetector& detector);

// Throws DataError on a schema_version mismatch or a malformed artifact.
TrainedDetector detector_from_json(const nlohmann::json& json);

void save_detector(const TrainedDetector& detector, const std::filesystem::path& path);
TrainedDetector load_detector(const std::filesystem::path& path);

nlohmann::json config_to_json(const PipelineConfig& config);

}  // namespace apptopic

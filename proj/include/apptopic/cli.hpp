#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "apptopic/pipeline.hpp"

namespace apptopic {

// Every field is optional so that a --config JSON file can fill what the
// command line left unset. JSON keys are the flag names without the dashes,
// with '-' written as '_'.
struct RunConfig {
  std::optional<std::string> variant;
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> validation;
  std::optional<std::filesystem::path> test;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> out_dir;

  std::optional<std::size_t> topics;  // LDA K
  std::optional<std::size_t> k;       // k-means k
  std::optional<std::size_t> lda_iterations;
  std::optional<std::size_t> n_neighbors;
  std::optional<double> min_dist;
  std::optional<std::size_t> umap_dim;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> min_cluster_size;
  std::optional<std::size_t> min_samples;
  std::optional<std::string> kernel;
  std::optional<double> nu;
  std::optional<double> gamma;
  std::optional<bool> tune_nu;
  std::optional<std::size_t> npmi_window;
  std::optional<std::size_t> cv_window;
  std::optional<std::size_t> top_n;
  std::optional<std::size_t> dim;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

// Fills unset fields of config from a JSON object. Throws UsageError on an
// unknown key or a value of the wrong type.
void merge_config_file(RunConfig& config, const std::filesystem::path& path);

// Throws UsageError for an unknown variant or kernel.
PipelineConfig to_pipeline_config(const RunConfig& config);

// Runs one command; args excludes the program name. Returns the process exit
// code: 0 success, 1 usage, 2 data, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apptopic

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apptopic/coherence.hpp"
#include "apptopic/corpus.hpp"
#include "apptopic/density_cluster.hpp"
#include "apptopic/embedding.hpp"
#include "apptopic/flat_cluster.hpp"
#include "apptopic/lda.hpp"
#include "apptopic/metrics.hpp"
#include "apptopic/ocsvm.hpp"
#include "apptopic/reducer.hpp"
#include "apptopic/topic_rep.hpp"

namespace apptopic {

enum class Variant { kBertDetect, kLdaOnly, kChabada, kGCata, kOcsvmOnly };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view text);
bool needs_embeddings(Variant v);
bool has_topic_stage(Variant v);

struct PipelineConfig {
  Variant variant = Variant::kBertDetect;
  LayoutParams umap;
  HdbscanParams hdbscan;
  LdaParams lda;
  std::size_t kmeans_k = 50;
  std::size_t kmeans_max_iter = kDefaultKMeansIterations;
  KernelType kernel = KernelType::kRbf;
  double nu = 0.15;
  std::optional<double> gamma;  // default 1 / |API vocabulary|
  std::size_t min_topic_members = 5;
  std::size_t top_n = kDefaultTopTerms;
  std::size_t npmi_window = 10;
  std::size_t cv_window = 110;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // 0 = hardware concurrency; never changes results
};

inline constexpr int kArtifactSchemaVersion = 1;

struct UmapTopicStage {
  LowDimLayout layout;
  std::vector<std::string> train_ids;
  std::string embedding_hash;
  std::vector<int> cluster_labels;  // raw density labels, -1 = noise
  std::vector<std::vector<std::size_t>> exemplars;
  std::vector<double> stability;
  Matrix centroids;
  double temperature = 1.0;
};

struct TrainingManifest {
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::string embedding_hash;
  std::size_t train_count = 0;
  double nu = 0.0;
  double gamma = 0.0;
  bool nu_tuned = false;
  std::vector<std::pair<double, double>> tuning_curve;  // (nu, validation F1)
  std::vector<std::string> warnings;
};

struct TrainedDetector {
  PipelineConfig config;
  ApiVocabulary vocab;

  std::optional<UmapTopicStage> umap;
  std::optional<LdaModel> lda;
  std::optional<KMeansModel> kmeans;

  std::size_t topic_count = 0;
  std::vector<std::string> train_ids;
  std::vector<int> train_topics;
  std::vector<Vector> train_affinities;  // empty for variants without affinities

  std::map<int, OcSvmModel> topic_models;
  OcSvmModel global_model;
  std::vector<TopicSummary> summaries;
  TrainingManifest manifest;

  std::size_t members_of(int topic) const;
};

struct Prediction {
  std::string app_id;
  int assigned_topic = -1;  // -1 when scored by the global model only
  double score = 0.0;
  Label verdict = Label::kBenign;
};

// Throws UsageError when embeddings are required but missing, DataError for
// data problems and NumericError when no topics are found.
TrainedDetector train(const PipelineConfig& config, const DatasetSplit& train_split, const EmbeddingMatrix* embeddings);

// Grid search over nu on a labelled validation split, maximising F1; the topic
// stage is fitted once. The chosen nu and the curve go into the manifest.
TrainedDetector train_with_nu_search(const PipelineConfig& config, const DatasetSplit& train_split,
                                     const DatasetSplit& validation, const EmbeddingMatrix* embeddings,
                                     const std::vector<double>& nu_grid);

std::vector<double> default_nu_grid();

// Topic for one app (for the variant's topic stage), -1 for OcsvmOnly.
int assign_topic(const TrainedDetector& detector, const AppRecord& app, const EmbeddingMatrix* embeddings,
                 const Matrix* training_vectors);

std::vector<Prediction> infer(const TrainedDetector& detector, const std::vector<AppRecord>& apps,
                              const EmbeddingMatrix* embeddings);

struct TopicCounts {
  int topic_id = 0;
  ConfusionCounts counts;
};

struct DetectionReport {
  ConfusionCounts counts;
  std::vector<TopicCounts> per_topic;
};

// Throws DataError for a prediction without a labelled app, or a count mismatch.
DetectionReport evaluate(const std::vector<Prediction>& predictions, const std::vector<AppRecord>& labelled);

// NPMI and Cv for every topic summary against the tokenized training corpus.
std::vector<CoherenceScore> topic_coherence(const TrainedDetector& detector, const std::vector<TokenizedDoc>& reference);

std::string dataset_hash(const DatasetSplit& split);

}  // namespace apptopic

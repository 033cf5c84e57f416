#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace apptopic {

enum class Label { kBenign, kMalicious };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);

struct AppRecord {
  std::string app_id;
  std::string description;
  std::set<std::string> api_calls;
  std::optional<Label> label;
};

enum class SplitRole { kTrain, kValidation, kTest };

std::string_view to_string(SplitRole role);

struct DatasetSplit {
  SplitRole role = SplitRole::kTrain;
  std::vector<AppRecord> records;
  // Non-fatal ingestion notes (empty file, empty descriptions).
  std::vector<std::string> warnings;

  const AppRecord* find(std::string_view app_id) const;
};

// Reads a JSON Lines dataset. Throws DataError naming the 1-based line for a
// malformed record and naming the id for a duplicate app_id.
DatasetSplit load_dataset(const std::filesystem::path& path, SplitRole role);
DatasetSplit parse_dataset(std::string_view text, SplitRole role);

// Training splits must be all benign; unlabelled records count as benign.
void require_benign(const DatasetSplit& split);

std::string serialize_record(const AppRecord& record);

using StopwordSet = std::unordered_set<std::string>;

// The bundled 179-word English list (data/stopwords_en.txt).
const StopwordSet& default_stopwords();
StopwordSet load_stopwords(const std::filesystem::path& path);

struct TokenizedDoc {
  std::string app_id;
  std::vector<std::string> tokens;
};

inline constexpr std::size_t kMinTokenLength = 3;

// Lowercases, splits on non-alphanumeric boundaries (bytes >= 0x80 count as
// word characters so UTF-8 letters survive), then drops short, all-digit and
// stopword tokens.
std::vector<std::string> tokenize(std::string_view description, const StopwordSet& stopwords);
TokenizedDoc tokenize_record(const AppRecord& record, const StopwordSet& stopwords);
std::vector<TokenizedDoc> tokenize_split(const DatasetSplit& split, const StopwordSet& stopwords);

class ApiVocabulary {
 public:
  ApiVocabulary() = default;
  // Entries are sorted and deduplicated.
  explicit ApiVocabulary(std::vector<std::string> entries);

  const std::vector<std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::optional<std::size_t> index_of(std::string_view api) const;

 private:
  std::vector<std::string> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Sorted union of api_calls over the training split. Throws DataError when the
// union is empty.
ApiVocabulary build_api_vocabulary(const DatasetSplit& train);

struct ApiFeatureVector {
  std::string app_id;
  std::vector<double> bits;  // 0.0 or 1.0
  std::size_t unseen = 0;    // calls dropped for being outside the vocabulary
};

ApiFeatureVector vectorize_api_calls(const AppRecord& record, const ApiVocabulary& vocab);

// Inverse of vectorize_api_calls for calls inside the vocabulary.
std::set<std::string> api_calls_from_bits(const ApiFeatureVector& vec, const ApiVocabulary& vocab);

}  // namespace apptopic

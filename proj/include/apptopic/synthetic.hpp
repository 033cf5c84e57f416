#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "apptopic/corpus.hpp"

namespace apptopic {

// Planted-theme corpus. Each theme owns a word list and an API profile; benign
// apps draw both from the same theme, malicious apps take their description
// from one theme and their APIs from another.
struct SyntheticConfig {
  std::size_t themes = 8;
  std::size_t train_per_theme = 100;
  std::size_t holdout_benign_per_theme = 25;  // per held-out split
  std::size_t malicious = 80;                 // per held-out split
  std::size_t theme_words = 50;
  std::size_t generic_words = 40;
  std::size_t description_length = 30;
  double theme_word_share = 0.8;
  std::size_t apis_per_theme = 12;
  double api_keep = 0.6;
  std::size_t common_apis = 4;
  double common_api_keep = 0.25;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  DatasetSplit train;
  DatasetSplit validation;
  DatasetSplit test;
  // Planted theme per record; for malicious apps this is the description theme.
  std::vector<int> train_themes;
  std::vector<int> validation_themes;
  std::vector<int> test_themes;
  std::vector<std::vector<std::string>> theme_vocab;
  std::vector<std::vector<std::string>> theme_apis;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config);

// One JSON object per line, in record order.
std::string to_jsonl(const DatasetSplit& split);

}  // namespace apptopic

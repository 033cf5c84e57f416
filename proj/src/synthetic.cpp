#include "apptopic/synthetic.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "apptopic/util.hpp"

namespace apptopic {

namespace {

constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr", "pl", "gr"};
constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u"};

// Distinct pronounceable pseudo-words of 3 syllables; none is a stopword.
std::vector<std::string> make_words(std::size_t count, std::set<std::string>& taken, Rng& rng) {
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w;
    for (int s = 0; s < 3; ++s) {
      w += kOnsets[uniform_index(rng, std::size(kOnsets))];
      w += kVowels[uniform_index(rng, std::size(kVowels))];
    }
    if (taken.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

struct Generator {
  const SyntheticConfig& cfg;
  Rng rng;
  std::vector<std::string> generic;
  std::vector<std::vector<std::string>> vocab;
  std::vector<std::vector<std::string>> apis;
  std::vector<std::string> common;

  std::string description(std::size_t theme) {
    std::string text;
    for (std::size_t i = 0; i < cfg.description_length; ++i) {
      const auto& pool = uniform01(rng) < cfg.theme_word_share ? vocab[theme] : generic;
      if (!text.empty()) text += ' ';
      text += pool[uniform_index(rng, pool.size())];
    }
    return text;
  }

  std::set<std::string> api_calls(std::size_t theme) {
    std::set<std::string> calls;
    for (const auto& a : apis[theme]) {
      if (uniform01(rng) < cfg.api_keep) calls.insert(a);
    }
    if (calls.empty()) calls.insert(apis[theme][uniform_index(rng, apis[theme].size())]);
    for (const auto& a : common) {
      if (uniform01(rng) < cfg.common_api_keep) calls.insert(a);
    }
    return calls;
  }

  void add(DatasetSplit& split, std::vector<int>& themes, std::string id, std::size_t text_theme, std::size_t api_theme,
           Label label) {
    split.records.push_back({std::move(id), description(text_theme), api_calls(api_theme), label});
    themes.push_back(static_cast<int>(text_theme));
  }

  void holdout(DatasetSplit& split, std::vector<int>& themes, std::string_view prefix) {
    for (std::size_t t = 0; t < cfg.themes; ++t) {
      for (std::size_t i = 0; i < cfg.holdout_benign_per_theme; ++i) {
        add(split, themes, fmt::format("{}.benign.t{}.{:03}", prefix, t, i), t, t, Label::kBenign);
      }
    }
    for (std::size_t i = 0; i < cfg.malicious; ++i) {
      const std::size_t text_theme = i % cfg.themes;
      const std::size_t offset = 1 + uniform_index(rng, cfg.themes - 1);
      add(split, themes, fmt::format("{}.malicious.{:03}", prefix, i), text_theme, (text_theme + offset) % cfg.themes,
          Label::kMalicious);
    }
  }
};

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& cfg) {
  Generator g{cfg, Rng(cfg.seed), {}, {}, {}, {}};
  std::set<std::string> taken;
  g.generic = make_words(cfg.generic_words, taken, g.rng);
  for (std::size_t t = 0; t < cfg.themes; ++t) {
    g.vocab.push_back(make_words(cfg.theme_words, taken, g.rng));
    std::vector<std::string> profile;
    for (std::size_t a = 0; a < cfg.apis_per_theme; ++a) profile.push_back(fmt::format("android.theme{}.Api{:02}", t, a));
    g.apis.push_back(std::move(profile));
  }
  for (std::size_t a = 0; a < cfg.common_apis; ++a) g.common.push_back(fmt::format("android.common.Api{:02}", a));

  SyntheticCorpus c;
  c.train.role = SplitRole::kTrain;
  c.validation.role = SplitRole::kValidation;
  c.test.role = SplitRole::kTest;
  for (std::size_t t = 0; t < cfg.themes; ++t) {
    for (std::size_t i = 0; i < cfg.train_per_theme; ++i) {
      g.add(c.train, c.train_themes, fmt::format("train.t{}.{:03}", t, i), t, t, Label::kBenign);
    }
  }
  g.holdout(c.validation, c.validation_themes, "val");
  g.holdout(c.test, c.test_themes, "test");
  c.theme_vocab = g.vocab;
  c.theme_apis = g.apis;
  return c;
}

std::string to_jsonl(const DatasetSplit& split) {
  std::string out;
  for (const auto& r : split.records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

}  // namespace apptopic

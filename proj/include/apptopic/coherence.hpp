#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "apptopic/corpus.hpp"

namespace apptopic {

// Boolean sliding-window document frequencies.
class CooccurrenceTable {
 public:
  CooccurrenceTable(std::size_t window_size, std::size_t total_windows) : window_size_(window_size), total_windows_(total_windows) {}

  std::size_t window_size() const { return window_size_; }
  std::size_t total_windows() const { return total_windows_; }

  std::size_t count(const std::string& word) const;
  std::size_t count(const std::string& a, const std::string& b) const;
  double probability(const std::string& word) const;
  double probability(const std::string& a, const std::string& b) const;

  std::size_t vocabulary_size() const { return words_.size(); }

 private:
  friend CooccurrenceTable count_cooccurrences(const std::vector<TokenizedDoc>&, std::size_t,
                                               const std::set<std::string>*);
  static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b);

  std::size_t window_size_;
  std::size_t total_windows_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::size_t> word_counts_;
  std::unordered_map<std::uint64_t, std::size_t> pair_counts_;
};

// Windows of `window_size` tokens stepping by one; a document shorter than the
// window is a single window and an empty document contributes none. When
// `targets` is given only those words are tracked (the window count is not
// affected). Throws std::invalid_argument for window_size < 2.
CooccurrenceTable count_cooccurrences(const std::vector<TokenizedDoc>& docs, std::size_t window_size,
                                      const std::set<std::string>* targets = nullptr);

inline constexpr double kCoherenceEpsilon = 1e-12;
inline constexpr std::size_t kNpmiWindow = 10;
inline constexpr std::size_t kCvWindow = 110;

// log((P(a,b) + eps) / (P(a) P(b))) / -log(P(a,b) + eps), clamped to [-1, 1].
// A word absent from the reference corpus scores -1 against everything.
double npmi_pair(const CooccurrenceTable& table, const std::string& a, const std::string& b,
                 double eps = kCoherenceEpsilon);

struct TopicWordSet {
  int topic_id = 0;
  std::vector<std::string> words;
};

// Mean pair NPMI over all N(N-1)/2 unordered pairs. Throws for N < 2.
double npmi_topic(const TopicWordSet& topic, const CooccurrenceTable& table, double eps = kCoherenceEpsilon);

// One-set indirect cosine over NPMI context vectors, mapped to [0, 1].
double cv_topic(const TopicWordSet& topic, const CooccurrenceTable& table, double eps = kCoherenceEpsilon);

struct CoherenceScore {
  int topic_id = 0;
  double npmi = 0.0;
  double cv = 0.0;
};

struct CcdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;
};

// Fraction of scores strictly above each threshold. Throws for empty scores.
std::vector<CcdfPoint> ccdf(const std::vector<double>& scores, const std::vector<double>& thresholds);

// Evenly spaced grid lo, lo + step, ..., hi.
std::vector<double> threshold_grid(double lo, double hi, double step);

struct ScatterRow {
  int topic_id = 0;
  double cv = 0.0;
  double f1 = 0.0;
};

// "topic_id,cv,f1" CSV sorted by topic id.
std::string coherence_f1_scatter(std::vector<ScatterRow> rows);

std::string ccdf_csv(const std::vector<CcdfPoint>& series);

}  // namespace apptopic

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace apptopic {

// Class-based TF-IDF weights: weights[c][t] for classes[c] and terms[t].
struct CtfidfMatrix {
  std::vector<int> classes;
  std::vector<std::string> terms;  // sorted
  std::vector<std::vector<double>> weights;
  std::vector<std::size_t> doc_counts;  // documents per class, when known

  std::size_t class_index(int topic_id) const;  // throws std::out_of_range
};

// Term multisets per class, e.g. the concatenated tokens of a topic's documents.
using ClassTokens = std::map<int, std::vector<std::string>>;

// W[t,c] = tf(t,c) * log(1 + A / f(t)), A = mean token count per class,
// f(t) = total count of t over all classes.
CtfidfMatrix ctfidf(const ClassTokens& docs_by_topic);

struct TopicSummary {
  int topic_id = 0;
  std::vector<std::pair<std::string, double>> top_terms;
  std::size_t doc_count = 0;
};

inline constexpr std::size_t kDefaultTopTerms = 10;

// Highest-weight terms with ties broken lexicographically; zero-weight terms
// (absent from the class) are skipped.
TopicSummary top_terms(const CtfidfMatrix& weights, int topic_id, std::size_t n = kDefaultTopTerms);

}  // namespace apptopic

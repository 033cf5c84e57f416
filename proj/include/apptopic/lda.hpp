#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "apptopic/corpus.hpp"
#include "apptopic/util.hpp"

namespace apptopic {

struct LdaParams {
  std::size_t topics = 50;
  double alpha = -1.0;  // < 0 means 50 / topics
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::size_t fold_in_iterations = 100;
  std::uint64_t seed = 0;
  // Verify every full conditional is positive and normalised (slow; for tests).
  bool check_conditionals = false;

  double effective_alpha() const { return alpha < 0.0 ? 50.0 / static_cast<double>(topics) : alpha; }
};

struct LdaModel {
  std::size_t topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> word_index;
  std::vector<std::vector<std::uint32_t>> topic_word;  // K x V
  std::vector<std::uint64_t> topic_totals;

  // Per training document (in input order) topic counts; empty docs keep zeros.
  std::vector<std::vector<std::uint32_t>> doc_topic;
  std::vector<std::size_t> skipped_docs;

  void rebuild_index();
};

// Collapsed Gibbs sampling. Documents with no tokens are recorded in
// skipped_docs and excluded. Throws DataError for an empty corpus.
LdaModel fit_gibbs(const std::vector<TokenizedDoc>& docs, const LdaParams& params);

// Called after every sweep with the current counts.
using LdaSweepObserver = std::function<void(const LdaModel&)>;
LdaModel fit_gibbs(const std::vector<TokenizedDoc>& docs, const LdaParams& params, const LdaSweepObserver& observer);

// Affinity of a training document from its final sampler counts.
Vector training_doc_affinity(const LdaModel& model, std::size_t doc_index);

// Fold-in Gibbs with frozen topic-word counts; unseen terms are skipped.
Vector doc_topic_affinity(const LdaModel& model, const TokenizedDoc& doc, std::size_t fold_in_iterations,
                          std::uint64_t seed);

// n terms by (n_kw + beta), ties lexicographic.
std::vector<std::string> lda_top_words(const LdaModel& model, std::size_t topic, std::size_t n);

}  // namespace apptopic

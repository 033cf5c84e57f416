#include "apptopic/topic_rep.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace apptopic {

std::size_t CtfidfMatrix::class_index(int topic_id) const {
  auto it = std::find(classes.begin(), classes.end(), topic_id);
  if (it == classes.end()) throw std::out_of_range(fmt::format("unknown topic {}", topic_id));
  return static_cast<std::size_t>(it - classes.begin());
}

CtfidfMatrix ctfidf(const ClassTokens& docs_by_topic) {
  CtfidfMatrix m;
  std::set<std::string> vocab;
  for (const auto& [topic, tokens] : docs_by_topic) {
    m.classes.push_back(topic);
    vocab.insert(tokens.begin(), tokens.end());
  }
  m.terms.assign(vocab.begin(), vocab.end());
  auto term_index = [&](const std::string& t) {
    return static_cast<std::size_t>(std::lower_bound(m.terms.begin(), m.terms.end(), t) - m.terms.begin());
  };

  std::vector<std::vector<double>> tf(m.classes.size(), std::vector<double>(m.terms.size(), 0.0));
  std::vector<double> total(m.terms.size(), 0.0);
  double all_tokens = 0.0;
  std::size_t c = 0;
  for (const auto& [topic, tokens] : docs_by_topic) {
    for (const auto& t : tokens) {
      const std::size_t idx = term_index(t);
      tf[c][idx] += 1.0;
      total[idx] += 1.0;
    }
    all_tokens += static_cast<double>(tokens.size());
    ++c;
  }
  const double avg = m.classes.empty() ? 0.0 : all_tokens / static_cast<double>(m.classes.size());

  m.weights.assign(m.classes.size(), std::vector<double>(m.terms.size(), 0.0));
  for (std::size_t k = 0; k < m.classes.size(); ++k) {
    for (std::size_t t = 0; t < m.terms.size(); ++t) {
      if (tf[k][t] > 0.0) m.weights[k][t] = tf[k][t] * std::log(1.0 + avg / total[t]);
    }
  }
  return m;
}

TopicSummary top_terms(const CtfidfMatrix& weights, int topic_id, std::size_t n) {
  const std::size_t c = weights.class_index(topic_id);
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < weights.terms.size(); ++t) {
    if (weights.weights[c][t] > 0.0) order.push_back(t);
  }
  // Terms are stored sorted, so index order is the lexicographic tie-break.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return weights.weights[c][x] > weights.weights[c][y]; });
  if (order.size() > n) order.resize(n);
  TopicSummary s;
  s.topic_id = topic_id;
  s.doc_count = c < weights.doc_counts.size() ? weights.doc_counts[c] : 0;
  for (std::size_t t : order) s.top_terms.emplace_back(weights.terms[t], weights.weights[c][t]);
  return s;
}

}  // namespace apptopic

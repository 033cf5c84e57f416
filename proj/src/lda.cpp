#include "apptopic/lda.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "apptopic/errors.hpp"

namespace apptopic {
namespace {

std::size_t sample_discrete(const std::vector<double>& weights, double total, Rng& rng) {
  double u = uniform01(rng) * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    u -= weights[k];
    if (u < 0.0) return k;
  }
  // Rounding can leave u marginally non-negative; pick the last positive entry.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  return weights.size() - 1;
}

void check_conditional(const std::vector<double>& p, double total) {
  double s = 0.0;
  for (double v : p) {
    if (!(v > 0.0)) throw NumericError("LDA full conditional has a non-positive entry");
    s += v / total;
  }
  if (std::abs(s - 1.0) > 1e-12) throw NumericError(fmt::format("LDA full conditional sums to {}", s));
}

}  // namespace

void LdaModel::rebuild_index() {
  word_index.clear();
  for (std::size_t w = 0; w < vocab.size(); ++w) word_index.emplace(vocab[w], w);
}

LdaModel fit_gibbs(const std::vector<TokenizedDoc>& docs, const LdaParams& params) {
  return fit_gibbs(docs, params, LdaSweepObserver{});
}

LdaModel fit_gibbs(const std::vector<TokenizedDoc>& docs, const LdaParams& params, const LdaSweepObserver& observer) {
  if (params.topics < 2) throw UsageError("LDA needs at least 2 topics");
  LdaModel m;
  m.topics = params.topics;
  m.alpha = params.effective_alpha();
  m.beta = params.beta;
  m.iterations = params.iterations;
  m.seed = params.seed;

  std::set<std::string> vocab;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].tokens.empty()) {
      m.skipped_docs.push_back(d);
      continue;
    }
    vocab.insert(docs[d].tokens.begin(), docs[d].tokens.end());
  }
  if (vocab.empty()) throw DataError("LDA corpus is empty after filtering empty documents");
  m.vocab.assign(vocab.begin(), vocab.end());
  m.rebuild_index();

  const std::size_t K = m.topics;
  const std::size_t V = m.vocab.size();
  const double vbeta = static_cast<double>(V) * m.beta;
  m.topic_word.assign(K, std::vector<std::uint32_t>(V, 0));
  m.topic_totals.assign(K, 0);
  m.doc_topic.assign(docs.size(), std::vector<std::uint32_t>(K, 0));

  std::vector<std::vector<std::size_t>> words(docs.size());
  std::vector<std::vector<std::size_t>> z(docs.size());
  Rng rng(params.seed);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& t : docs[d].tokens) {
      const std::size_t w = m.word_index.at(t);
      const std::size_t k = uniform_index(rng, K);
      words[d].push_back(w);
      z[d].push_back(k);
      ++m.topic_word[k][w];
      ++m.topic_totals[k];
      ++m.doc_topic[d][k];
    }
  }

  std::vector<double> p(K);
  for (std::size_t iter = 0; iter < params.iterations; ++iter) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      auto& nd = m.doc_topic[d];
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const std::size_t w = words[d][i];
        const std::size_t old = z[d][i];
        --m.topic_word[old][w];
        --m.topic_totals[old];
        --nd[old];
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          p[k] = (nd[k] + m.alpha) * (m.topic_word[k][w] + m.beta) / (static_cast<double>(m.topic_totals[k]) + vbeta);
          total += p[k];
        }
        if (params.check_conditionals) check_conditional(p, total);
        const std::size_t k = sample_discrete(p, total, rng);
        z[d][i] = k;
        ++m.topic_word[k][w];
        ++m.topic_totals[k];
        ++nd[k];
      }
    }
    if (observer) observer(m);
  }
  return m;
}

Vector training_doc_affinity(const LdaModel& model, std::size_t doc_index) {
  const auto& nd = model.doc_topic.at(doc_index);
  double len = 0.0;
  for (auto c : nd) len += c;
  const double denom = len + static_cast<double>(model.topics) * model.alpha;
  Vector out(model.topics);
  for (std::size_t k = 0; k < model.topics; ++k) out[k] = (nd[k] + model.alpha) / denom;
  return out;
}

Vector doc_topic_affinity(const LdaModel& model, const TokenizedDoc& doc, std::size_t fold_in_iterations,
                          std::uint64_t seed) {
  const std::size_t K = model.topics;
  const double vbeta = static_cast<double>(model.vocab.size()) * model.beta;
  std::vector<std::size_t> words;
  for (const auto& t : doc.tokens) {
    if (auto it = model.word_index.find(t); it != model.word_index.end()) words.push_back(it->second);
  }
  std::vector<std::uint32_t> nd(K, 0);
  std::vector<std::size_t> z(words.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < words.size(); ++i) {
    z[i] = uniform_index(rng, K);
    ++nd[z[i]];
  }
  std::vector<double> p(K);
  for (std::size_t iter = 0; iter < fold_in_iterations; ++iter) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --nd[z[i]];
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        p[k] = (nd[k] + model.alpha) * (model.topic_word[k][words[i]] + model.beta) /
               (static_cast<double>(model.topic_totals[k]) + vbeta);
        total += p[k];
      }
      z[i] = sample_discrete(p, total, rng);
      ++nd[z[i]];
    }
  }
  const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * model.alpha;
  Vector out(K);
  for (std::size_t k = 0; k < K; ++k) out[k] = (nd[k] + model.alpha) / denom;
  return out;
}

std::vector<std::string> lda_top_words(const LdaModel& model, std::size_t topic, std::size_t n) {
  if (topic >= model.topics) throw std::out_of_range(fmt::format("topic {} out of range (K={})", topic, model.topics));
  std::vector<std::size_t> order(model.vocab.size());
  for (std::size_t w = 0; w < order.size(); ++w) order[w] = w;
  // vocab is sorted, so stable order by count keeps the lexicographic tie-break.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return model.topic_word[topic][x] > model.topic_word[topic][y];
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(n, order.size()); ++i) out.push_back(model.vocab[order[i]]);
  return out;
}

}  // namespace apptopic

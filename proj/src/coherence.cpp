#include "apptopic/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "apptopic/embedding.hpp"

namespace apptopic {

std::uint64_t CooccurrenceTable::pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::size_t CooccurrenceTable::count(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? 0 : word_counts_[it->second];
}

std::size_t CooccurrenceTable::count(const std::string& a, const std::string& b) const {
  auto ia = ids_.find(a);
  auto ib = ids_.find(b);
  if (ia == ids_.end() || ib == ids_.end()) return 0;
  if (ia->second == ib->second) return word_counts_[ia->second];
  auto it = pair_counts_.find(pair_key(ia->second, ib->second));
  return it == pair_counts_.end() ? 0 : it->second;
}

double CooccurrenceTable::probability(const std::string& word) const {
  return total_windows_ == 0 ? 0.0 : static_cast<double>(count(word)) / static_cast<double>(total_windows_);
}

double CooccurrenceTable::probability(const std::string& a, const std::string& b) const {
  return total_windows_ == 0 ? 0.0 : static_cast<double>(count(a, b)) / static_cast<double>(total_windows_);
}

CooccurrenceTable count_cooccurrences(const std::vector<TokenizedDoc>& docs, std::size_t window_size,
                                      const std::set<std::string>* targets) {
  if (window_size < 2) throw std::invalid_argument("count_cooccurrences: window size must be >= 2");
  std::size_t windows = 0;
  for (const auto& d : docs) {
    if (d.tokens.empty()) continue;
    windows += d.tokens.size() <= window_size ? 1 : d.tokens.size() - window_size + 1;
  }
  CooccurrenceTable table(window_size, windows);

  std::vector<std::uint32_t> present;
  std::vector<std::size_t> seen_in;  // last window stamp per word id
  std::size_t stamp = 0;
  for (const auto& d : docs) {
    if (d.tokens.empty()) continue;
    std::vector<std::int64_t> ids(d.tokens.size(), -1);
    for (std::size_t i = 0; i < d.tokens.size(); ++i) {
      const auto& t = d.tokens[i];
      if (targets && !targets->contains(t)) continue;
      auto [it, inserted] = table.ids_.try_emplace(t, static_cast<std::uint32_t>(table.words_.size()));
      if (inserted) {
        table.words_.push_back(t);
        table.word_counts_.push_back(0);
        seen_in.push_back(0);
      }
      ids[i] = it->second;
    }
    const std::size_t span = std::min(window_size, d.tokens.size());
    const std::size_t starts = d.tokens.size() - span + 1;
    for (std::size_t s = 0; s < starts; ++s) {
      ++stamp;
      present.clear();
      for (std::size_t i = s; i < s + span; ++i) {
        if (ids[i] < 0) continue;
        const auto id = static_cast<std::uint32_t>(ids[i]);
        if (seen_in[id] == stamp) continue;
        seen_in[id] = stamp;
        present.push_back(id);
      }
      for (std::size_t x = 0; x < present.size(); ++x) {
        ++table.word_counts_[present[x]];
        for (std::size_t y = x + 1; y < present.size(); ++y) {
          ++table.pair_counts_[CooccurrenceTable::pair_key(present[x], present[y])];
        }
      }
    }
  }
  return table;
}

double npmi_pair(const CooccurrenceTable& table, const std::string& a, const std::string& b, double eps) {
  const double pa = table.probability(a);
  const double pb = table.probability(b);
  if (pa == 0.0 || pb == 0.0) return -1.0;
  const double joint = table.probability(a, b) + eps;
  const double denom = -std::log(joint);
  if (denom <= 0.0) return 1.0;  // the pair fills every window
  const double v = std::log(joint / (pa * pb)) / denom;
  return std::clamp(v, -1.0, 1.0);
}

double npmi_topic(const TopicWordSet& topic, const CooccurrenceTable& table, double eps) {
  const auto& w = topic.words;
  if (w.size() < 2) throw std::invalid_argument("npmi_topic: need at least 2 words");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      total += npmi_pair(table, w[i], w[j], eps);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double cv_topic(const TopicWordSet& topic, const CooccurrenceTable& table, double eps) {
  const auto& w = topic.words;
  const std::size_t n = w.size();
  if (n < 2) throw std::invalid_argument("cv_topic: need at least 2 words");
  Matrix context(n, Vector(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) context[i][j] = context[j][i] = npmi_pair(table, w[i], w[j], eps);
  }
  Vector whole(n, 0.0);
  for (const auto& v : context) {
    for (std::size_t j = 0; j < n; ++j) whole[j] += v[j];
  }
  double total = 0.0;
  for (const auto& v : context) total += cosine_similarity(v, whole);
  const double mean = total / static_cast<double>(n);
  return std::clamp((mean + 1.0) / 2.0, 0.0, 1.0);
}

std::vector<CcdfPoint> ccdf(const std::vector<double>& scores, const std::vector<double>& thresholds) {
  if (scores.empty()) throw std::invalid_argument("ccdf: no scores");
  std::vector<CcdfPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto above = std::count_if(scores.begin(), scores.end(), [t](double s) { return s > t; });
    out.push_back({t, static_cast<double>(above) / static_cast<double>(scores.size())});
  }
  return out;
}

std::vector<double> threshold_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::llround((hi - lo) / step));
  for (std::size_t i = 0; i <= steps; ++i) grid.push_back(lo + step * static_cast<double>(i));
  return grid;
}

std::string coherence_f1_scatter(std::vector<ScatterRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ScatterRow& a, const ScatterRow& b) { return a.topic_id < b.topic_id; });
  std::string out = "topic_id,cv,f1\n";
  for (const auto& r : rows) out += fmt::format("{},{:.6f},{:.6f}\n", r.topic_id, r.cv, r.f1);
  return out;
}

std::string ccdf_csv(const std::vector<CcdfPoint>& series) {
  std::string out = "threshold,fraction\n";
  for (const auto& p : series) out += fmt::format("{:.4f},{:.6f}\n", p.threshold, p.fraction);
  return out;
}

}  // namespace apptopic

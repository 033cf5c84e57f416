#include "apptopic/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "apptopic/errors.hpp"
#include "apptopic/metrics.hpp"

namespace apptopic {

using nlohmann::json;

namespace {

constexpr std::string_view kNotApplicable = "not applicable";
constexpr std::string_view kPredictionsHeader = "app_id,assigned_topic,score,verdict";

json counts_json(const ConfusionCounts& c) {
  return {{"tp", c.tp},   {"fp", c.fp},   {"tn", c.tn},   {"fn", c.fn},
          {"tpr", c.tpr()}, {"tnr", c.tnr()}, {"fpr", c.fpr()}, {"fnr", c.fnr()},
          {"f1", c.f1()},  {"f1_rounded", round_to(c.f1(), 2)}};
}

bool has_topics(const ReportInputs& in) {
  return in.detector != nullptr && has_topic_stage(in.detector->config.variant);
}

std::vector<ScatterRow> scatter_rows(const ReportInputs& in) {
  std::map<int, double> f1;
  for (const auto& t : in.evaluation.per_topic) f1[t.topic_id] = t.counts.f1();
  std::vector<ScatterRow> rows;
  for (const auto& s : in.coherence) {
    const auto it = f1.find(s.topic_id);
    rows.push_back({s.topic_id, s.cv, it == f1.end() ? 0.0 : it->second});
  }
  return rows;
}

}  // namespace

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_open = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_open = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_open = true;
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        row_open = false;
        break;
      default:
        field += c;
        row_open = true;
    }
  }
  if (quoted) throw DataError("CSV ends inside a quoted field");
  if (row_open) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string predictions_csv(const std::vector<Prediction>& predictions) {
  std::string out(kPredictionsHeader);
  out += '\n';
  for (const auto& p : predictions) {
    out += fmt::format("{},{},{},{}\n", csv_field(p.app_id), p.assigned_topic, p.score, to_string(p.verdict));
  }
  return out;
}

std::vector<Prediction> parse_predictions_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw DataError("predictions file is empty (missing header)");
  if (rows.front() != std::vector<std::string>{"app_id", "assigned_topic", "score", "verdict"}) {
    throw DataError(fmt::format("predictions header must be '{}'", kPredictionsHeader));
  }
  std::vector<Prediction> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() != 4) throw DataError(fmt::format("predictions row {}: expected 4 fields, got {}", line, row.size()));
    Prediction p;
    p.app_id = row[0];
    if (p.app_id.empty()) throw DataError(fmt::format("predictions row {}: empty app_id", line));
    try {
      std::size_t used = 0;
      p.assigned_topic = std::stoi(row[1], &used);
      if (used != row[1].size()) throw std::invalid_argument("trailing");
      p.score = std::stod(row[2], &used);
      if (used != row[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(fmt::format("predictions row {}: malformed topic or score", line));
    }
    const auto verdict = parse_label(row[3]);
    if (!verdict) throw DataError(fmt::format("predictions row {}: unknown verdict '{}'", line, row[3]));
    p.verdict = *verdict;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  return parse_predictions_csv(read_text_file(path));
}

std::string affinity_histogram_csv(const std::vector<std::size_t>& counts) {
  std::string out = "bin_start,bin_end,count\n";
  const double width = counts.empty() ? 0.0 : 1.0 / static_cast<double>(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    out += fmt::format("{:.2f},{:.2f},{}\n", width * static_cast<double>(b), width * static_cast<double>(b + 1), counts[b]);
  }
  return out;
}

json topics_json(const TrainedDetector* detector) {
  json topics = json::array();
  if (detector == nullptr) return topics;
  for (const auto& s : detector->summaries) {
    json terms = json::array();
    for (const auto& [term, weight] : s.top_terms) terms.push_back({{"term", term}, {"weight", weight}});
    topics.push_back({{"topic_id", s.topic_id},
                      {"doc_count", s.doc_count},
                      {"has_dedicated_model", detector->topic_models.count(s.topic_id) > 0},
                      {"top_terms", terms}});
  }
  return topics;
}

json report_json(const ReportInputs& in) {
  json j;
  if (in.seed) j["seed"] = *in.seed;
  j["detection"] = counts_json(in.evaluation.counts);
  json per_topic = json::array();
  for (const auto& t : in.evaluation.per_topic) {
    json row = counts_json(t.counts);
    row["topic_id"] = t.topic_id;
    per_topic.push_back(std::move(row));
  }
  j["per_topic"] = per_topic;

  if (in.detector != nullptr) {
    const auto& d = *in.detector;
    const auto& m = d.manifest;
    j["model"] = {{"variant", std::string(to_string(d.config.variant))},
                  {"seed", m.seed},
                  {"dataset_hash", m.dataset_hash},
                  {"embedding_hash", m.embedding_hash},
                  {"train_count", m.train_count},
                  {"topic_count", d.topic_count},
                  {"topic_models", d.topic_models.size()},
                  {"kernel", std::string(to_string(d.config.kernel))},
                  {"nu", m.nu},
                  {"gamma", m.gamma},
                  {"nu_tuned", m.nu_tuned},
                  {"warnings", m.warnings}};
  }

  if (!has_topics(in)) {
    j["coherence"] = kNotApplicable;
    j["affinity"] = kNotApplicable;
    return j;
  }

  if (in.coherence.empty()) {
    j["coherence"] = "not computed";
  } else {
    json scores = json::array();
    double npmi_sum = 0.0, cv_sum = 0.0;
    for (const auto& s : in.coherence) {
      scores.push_back({{"topic_id", s.topic_id}, {"npmi", s.npmi}, {"cv", s.cv}});
      npmi_sum += s.npmi;
      cv_sum += s.cv;
    }
    const double n = static_cast<double>(in.coherence.size());
    json coherence = {{"topics", scores}, {"mean_npmi", npmi_sum / n}, {"mean_cv", cv_sum / n}};

    std::map<int, double> f1;
    for (const auto& t : in.evaluation.per_topic) f1[t.topic_id] = t.counts.f1();
    std::vector<double> cv, f;
    for (const auto& s : in.coherence) {
      if (const auto it = f1.find(s.topic_id); it != f1.end()) {
        cv.push_back(s.cv);
        f.push_back(it->second);
      }
    }
    if (cv.size() >= 2) {
      coherence["spearman_cv_f1"] = spearman_correlation(cv, f);
    } else {
      coherence["spearman_cv_f1"] = nullptr;
    }
    j["coherence"] = std::move(coherence);
  }

  if (in.detector->train_affinities.empty()) {
    j["affinity"] = kNotApplicable;
  } else {
    const auto h = affinity_stats(in.detector->train_affinities);
    j["affinity"] = {{"bins", AffinityHistograms::kBins}, {"first", h.first}, {"second", h.second}};
  }
  return j;
}

void write_report_bundle(const std::filesystem::path& dir, const ReportInputs& in,
                         const std::optional<std::string>& run_timestamp) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create report directory '{}': {}", dir.string(), ec.message()));

  write_text_file(dir / "report.json", report_json(in).dump(2) + "\n");
  write_text_file(dir / "topics.json", topics_json(in.detector).dump(2) + "\n");

  std::vector<double> npmi, cv;
  for (const auto& s : in.coherence) {
    npmi.push_back(s.npmi);
    cv.push_back(s.cv);
  }
  const auto npmi_grid = threshold_grid(-1.0, 1.0, 0.05);
  const auto cv_grid = threshold_grid(0.0, 1.0, 0.05);
  write_text_file(dir / "ccdf_npmi.csv", npmi.empty() ? ccdf_csv({}) : ccdf_csv(ccdf(npmi, npmi_grid)));
  write_text_file(dir / "ccdf_cv.csv", cv.empty() ? ccdf_csv({}) : ccdf_csv(ccdf(cv, cv_grid)));
  write_text_file(dir / "coherence_f1_scatter.csv", coherence_f1_scatter(scatter_rows(in)));

  AffinityHistograms h;
  if (has_topics(in) && !in.detector->train_affinities.empty()) h = affinity_stats(in.detector->train_affinities);
  write_text_file(dir / "affinity_first.csv", affinity_histogram_csv(h.first));
  write_text_file(dir / "affinity_second.csv", affinity_histogram_csv(h.second));

  if (run_timestamp) write_text_file(dir / "run_info.json", json{{"generated_at", *run_timestamp}}.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace apptopic

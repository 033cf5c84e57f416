#include "apptopic/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "apptopic/errors.hpp"

namespace apptopic {
namespace {

#include "stopwords_data.inc"  // defines kStopwordData

AppRecord parse_record(const nlohmann::json& obj, std::size_t line_no) {
  auto fail = [line_no](const std::string& why) {
    return DataError(fmt::format("line {}: {}", line_no, why));
  };
  if (!obj.is_object()) throw fail("record is not a JSON object");
  AppRecord rec;
  const auto id = obj.find("app_id");
  if (id == obj.end() || !id->is_string()) throw fail("missing string field 'app_id'");
  rec.app_id = id->get<std::string>();
  if (rec.app_id.empty()) throw fail("empty app_id");

  const auto desc = obj.find("description");
  if (desc == obj.end() || !desc->is_string()) throw fail("missing string field 'description'");
  rec.description = desc->get<std::string>();

  const auto calls = obj.find("api_calls");
  if (calls == obj.end() || !calls->is_array()) throw fail("missing array field 'api_calls'");
  for (const auto& c : *calls) {
    if (!c.is_string()) throw fail("api_calls entries must be strings");
    rec.api_calls.insert(c.get<std::string>());
  }

  if (const auto lab = obj.find("label"); lab != obj.end() && !lab->is_null()) {
    if (!lab->is_string()) throw fail("label must be a string");
    rec.label = parse_label(lab->get<std::string>());
    if (!rec.label) throw fail(fmt::format("unknown label '{}'", lab->get<std::string>()));
  }
  return rec;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::kBenign ? "benign" : "malicious";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "benign") return Label::kBenign;
  if (text == "malicious") return Label::kMalicious;
  return std::nullopt;
}

std::string_view to_string(SplitRole role) {
  switch (role) {
    case SplitRole::kTrain: return "train";
    case SplitRole::kValidation: return "validation";
    case SplitRole::kTest: return "test";
  }
  return "unknown";
}

const AppRecord* DatasetSplit::find(std::string_view app_id) const {
  for (const auto& r : records) {
    if (r.app_id == app_id) return &r;
  }
  return nullptr;
}

DatasetSplit parse_dataset(std::string_view text, SplitRole role) {
  DatasetSplit split;
  split.role = role;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      continue;
    }
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(fmt::format("line {}: malformed JSON ({})", line_no, e.what()));
    }
    AppRecord rec = parse_record(obj, line_no);
    if (!seen.insert(rec.app_id).second) {
      throw DataError(fmt::format("line {}: duplicate app_id '{}'", line_no, rec.app_id));
    }
    if (rec.description.empty()) {
      split.warnings.push_back(fmt::format("line {}: app '{}' has an empty description", line_no, rec.app_id));
    }
    split.records.push_back(std::move(rec));
  }
  if (split.records.empty()) split.warnings.emplace_back("dataset contains no records");
  return split;
}

DatasetSplit load_dataset(const std::filesystem::path& path, SplitRole role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open dataset '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), role);
}

void require_benign(const DatasetSplit& split) {
  for (const auto& r : split.records) {
    if (r.label == Label::kMalicious) {
      throw DataError(fmt::format("training split contains malicious app '{}'", r.app_id));
    }
  }
}

std::string serialize_record(const AppRecord& record) {
  nlohmann::json obj;
  obj["app_id"] = record.app_id;
  obj["description"] = record.description;
  obj["api_calls"] = std::vector<std::string>(record.api_calls.begin(), record.api_calls.end());
  if (record.label) obj["label"] = std::string(to_string(*record.label));
  return obj.dump();
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = [] {
    StopwordSet s;
    std::istringstream in{std::string(kStopwordData)};
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) s.insert(line);
    }
    return s;
  }();
  return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open stopword file '{}'", path.string()));
  StopwordSet s;
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (!line.empty()) s.insert(line);
  }
  return s;
}

std::vector<std::string> tokenize(std::string_view description, const StopwordSet& stopwords) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    const bool all_digits = std::all_of(current.begin(), current.end(),
                                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (utf8_length(current) >= kMinTokenLength && !all_digits && !stopwords.contains(current)) {
      out.push_back(current);
    }
    current.clear();
  };
  for (char ch : description) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

TokenizedDoc tokenize_record(const AppRecord& record, const StopwordSet& stopwords) {
  return TokenizedDoc{record.app_id, tokenize(record.description, stopwords)};
}

std::vector<TokenizedDoc> tokenize_split(const DatasetSplit& split, const StopwordSet& stopwords) {
  std::vector<TokenizedDoc> docs;
  docs.reserve(split.records.size());
  for (const auto& r : split.records) docs.push_back(tokenize_record(r, stopwords));
  return docs;
}

ApiVocabulary::ApiVocabulary(std::vector<std::string> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i], i);
}

std::optional<std::size_t> ApiVocabulary::index_of(std::string_view api) const {
  if (auto it = index_.find(api); it != index_.end()) return it->second;
  return std::nullopt;
}

ApiVocabulary build_api_vocabulary(const DatasetSplit& train) {
  std::set<std::string> all;
  for (const auto& r : train.records) all.insert(r.api_calls.begin(), r.api_calls.end());
  if (all.empty()) {
    throw DataError("training split has no API calls; cannot build a feature space");
  }
  return ApiVocabulary(std::vector<std::string>(all.begin(), all.end()));
}

ApiFeatureVector vectorize_api_calls(const AppRecord& record, const ApiVocabulary& vocab) {
  ApiFeatureVector v{record.app_id, std::vector<double>(vocab.size(), 0.0), 0};
  for (const auto& call : record.api_calls) {
    if (auto idx = vocab.index_of(call)) {
      v.bits[*idx] = 1.0;
    } else {
      ++v.unseen;
    }
  }
  return v;
}

std::set<std::string> api_calls_from_bits(const ApiFeatureVector& vec, const ApiVocabulary& vocab) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < vec.bits.size(); ++i) {
    if (vec.bits[i] != 0.0) out.insert(vocab.entries()[i]);
  }
  return out;
}

}  // namespace apptopic

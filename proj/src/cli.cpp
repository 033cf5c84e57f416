#include "apptopic/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "apptopic/artifact.hpp"
#include "apptopic/errors.hpp"
#include "apptopic/report.hpp"

namespace apptopic {

using nlohmann::json;

namespace {

template <typename T>
void fill_from(std::optional<T>& field, const json& obj, const char* key) {
  if (field || !obj.contains(key)) return;
  try {
    if constexpr (std::is_same_v<T, std::filesystem::path>) {
      field = std::filesystem::path(obj.at(key).get<std::string>());
    } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!obj.at(key).is_number_unsigned()) throw UsageError(fmt::format("config key '{}' must be a non-negative integer", key));
      field = obj.at(key).get<T>();
    } else {
      field = obj.at(key).get<T>();
    }
  } catch (const json::exception&) {
    throw UsageError(fmt::format("config key '{}' has the wrong type", key));
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

template <typename T>
const T& require(const std::optional<T>& value, std::string_view flag, std::string_view command) {
  if (!value) throw UsageError(fmt::format("{} requires {}", command, flag));
  return *value;
}

std::optional<EmbeddingMatrix> maybe_embeddings(const RunConfig& rc) {
  if (!rc.embeddings) return std::nullopt;
  return load_embeddings(*rc.embeddings);
}

void print_topics(const TrainedDetector& d, std::ostream& out) {
  out << fmt::format("variant {}: {} topic(s), {} dedicated OC-SVM model(s)\n", to_string(d.config.variant), d.topic_count,
                     d.topic_models.size());
  for (std::size_t t = 0; t < d.topic_count; ++t) {
    out << fmt::format("  topic {}: {} member(s)\n", t, d.members_of(static_cast<int>(t)));
  }
  if (d.manifest.nu_tuned) out << fmt::format("  tuned nu = {}\n", d.manifest.nu);
}

int cmd_train(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const auto pc = to_pipeline_config(rc);
  const auto& train_path = require(rc.train, "--train", "train");
  const auto& out_path = require(rc.out, "--out", "train");
  if (needs_embeddings(pc.variant) && !rc.embeddings) {
    throw UsageError(fmt::format("variant {} requires --embeddings", to_string(pc.variant)));
  }
  const auto split = load_dataset(train_path, SplitRole::kTrain);
  for (const auto& w : split.warnings) err << "warning: " << w << '\n';
  const auto embeddings = maybe_embeddings(rc);
  const EmbeddingMatrix* emb = embeddings ? &*embeddings : nullptr;

  TrainedDetector det;
  if (rc.tune_nu.value_or(false)) {
    const auto& val_path = require(rc.validation, "--validation", "train --tune-nu");
    const auto validation = load_dataset(val_path, SplitRole::kValidation);
    det = train_with_nu_search(pc, split, validation, emb, default_nu_grid());
  } else {
    det = train(pc, split, emb);
  }
  for (const auto& w : det.manifest.warnings) err << "warning: " << w << '\n';
  save_detector(det, out_path);
  print_topics(det, out);
  return 0;
}

TrainedDetector load_model_with_overrides(const RunConfig& rc, std::string_view command) {
  auto det = load_detector(require(rc.model, "--model", command));
  if (rc.threads) det.config.threads = *rc.threads;
  return det;
}

int cmd_infer(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const auto det = load_model_with_overrides(rc, "infer");
  const auto split = load_dataset(require(rc.test, "--test", "infer"), SplitRole::kTest);
  for (const auto& w : split.warnings) err << "warning: " << w << '\n';
  if (needs_embeddings(det.config.variant) && !rc.embeddings && !split.records.empty()) {
    throw UsageError(fmt::format("variant {} requires --embeddings", to_string(det.config.variant)));
  }
  const auto embeddings = maybe_embeddings(rc);
  const auto predictions = infer(det, split.records, embeddings ? &*embeddings : nullptr);
  const auto csv = predictions_csv(predictions);
  if (rc.out) {
    write_text_file(*rc.out, csv);
    const auto flagged = std::count_if(predictions.begin(), predictions.end(),
                                       [](const Prediction& p) { return p.verdict == Label::kMalicious; });
    out << fmt::format("{} prediction(s), {} flagged malicious\n", predictions.size(), flagged);
  } else {
    out << csv;
  }
  return 0;
}

void print_counts(const DetectionReport& r, std::ostream& out) {
  const auto& c = r.counts;
  out << fmt::format("TP {} FN {} TN {} FP {}\n", c.tp, c.fn, c.tn, c.fp);
  out << fmt::format("TPR {:.2f}% TNR {:.2f}% FPR {:.2f}% FNR {:.2f}%\n", c.tpr(), c.tnr(), c.fpr(), c.fnr());
  out << fmt::format("F1 {:.4f} ({:.2f})\n", c.f1(), round_to(c.f1(), 2));
}

std::vector<CoherenceScore> coherence_for(const TrainedDetector& det, const std::filesystem::path& corpus) {
  const auto split = load_dataset(corpus, SplitRole::kTrain);
  return topic_coherence(det, tokenize_split(split, default_stopwords()));
}

int cmd_evaluate(const RunConfig& rc, std::ostream& out, std::ostream&, bool full_report) {
  const std::string_view command = full_report ? "report" : "evaluate";
  const auto predictions = load_predictions(require(rc.predictions, "--predictions", command));
  const auto labelled = load_dataset(require(rc.test, "--test", command), SplitRole::kTest);
  const auto& dir = require(rc.out_dir, "--out-dir", command);

  std::optional<TrainedDetector> det;
  if (full_report || rc.model) det = load_model_with_overrides(rc, command);

  ReportInputs in;
  in.evaluation = evaluate(predictions, labelled.records);
  in.seed = det ? std::optional<std::uint64_t>(det->manifest.seed) : rc.seed;
  if (det) {
    in.detector = &*det;
    if (full_report && has_topic_stage(det->config.variant)) {
      in.coherence = coherence_for(*det, require(rc.train, "--train", command));
    }
  }
  write_report_bundle(dir, in, utc_timestamp());
  print_counts(in.evaluation, out);
  return 0;
}

int cmd_coherence(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const auto det = load_model_with_overrides(rc, "coherence");
  if (!has_topic_stage(det.config.variant)) {
    throw UsageError(fmt::format("no topics: variant {} has no topic stage", to_string(det.config.variant)));
  }
  const auto scores = coherence_for(det, require(rc.train, "--train", "coherence"));
  std::string csv = "topic_id,npmi,cv\n";
  std::vector<double> npmi, cv;
  for (const auto& s : scores) {
    csv += fmt::format("{},{:.6f},{:.6f}\n", s.topic_id, s.npmi, s.cv);
    npmi.push_back(s.npmi);
    cv.push_back(s.cv);
  }
  if (rc.out_dir) {
    std::filesystem::create_directories(*rc.out_dir);
    write_text_file(*rc.out_dir / "coherence.csv", csv);
    write_text_file(*rc.out_dir / "ccdf_npmi.csv",
                    npmi.empty() ? ccdf_csv({}) : ccdf_csv(ccdf(npmi, threshold_grid(-1.0, 1.0, 0.05))));
    write_text_file(*rc.out_dir / "ccdf_cv.csv", cv.empty() ? ccdf_csv({}) : ccdf_csv(ccdf(cv, threshold_grid(0.0, 1.0, 0.05))));
    out << fmt::format("{} topic(s) scored\n", scores.size());
  } else if (rc.out) {
    write_text_file(*rc.out, csv);
  } else {
    out << csv;
  }
  return 0;
}

int cmd_write_embeddings(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const auto& input = require(rc.input, "--input", "write-embeddings");
  const auto& out_path = require(rc.out, "--out", "write-embeddings");
  const auto split = load_dataset(input, SplitRole::kTrain);
  for (const auto& w : split.warnings) err << "warning: " << w << '\n';
  const auto matrix = fallback_embed_records(split.records, rc.dim.value_or(64), rc.seed.value_or(0), default_stopwords());
  write_embeddings(matrix, out_path);
  out << fmt::format("wrote {} vector(s) of dim {}\n", matrix.size(), matrix.dim());
  return 0;
}

struct Command {
  CLI::App* app;
  std::string name;
};

void add_common(CLI::App* sub, RunConfig& rc, std::optional<std::filesystem::path>& config_path) {
  sub->add_option("--config", config_path, "JSON file supplying any flag; flags win");
  sub->add_option("--seed", rc.seed, "random seed");
  sub->add_option("--threads", rc.threads, "worker cap (0 = all cores); never changes results");
}

void add_hyperparameters(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--variant", rc.variant, "bertdetect | lda | chabada | gcata | ocsvm-only");
  sub->add_option("--topics", rc.topics, "LDA topic count K");
  sub->add_option("--k", rc.k, "k-means cluster count");
  sub->add_option("--lda-iterations", rc.lda_iterations, "Gibbs sweeps");
  sub->add_option("--n-neighbors", rc.n_neighbors, "UMAP neighbourhood size");
  sub->add_option("--min-dist", rc.min_dist, "UMAP min_dist");
  sub->add_option("--umap-dim", rc.umap_dim, "UMAP output dimension");
  sub->add_option("--epochs", rc.epochs, "UMAP epochs");
  sub->add_option("--min-cluster-size", rc.min_cluster_size, "HDBSCAN min_cluster_size");
  sub->add_option("--min-samples", rc.min_samples, "HDBSCAN min_samples");
  sub->add_option("--kernel", rc.kernel, "rbf | linear");
  sub->add_option("--nu", rc.nu, "OC-SVM nu");
  sub->add_option("--gamma", rc.gamma, "RBF gamma (default 1/|API vocabulary|)");
  sub->add_option("--npmi-window", rc.npmi_window, "NPMI sliding window");
  sub->add_option("--cv-window", rc.cv_window, "Cv sliding window");
  sub->add_option("--top-n", rc.top_n, "terms per topic");
  sub->add_flag_function("--tune-nu", [&rc](std::int64_t) { rc.tune_nu = true; }, "grid-search nu on --validation");
}

}  // namespace

void merge_config_file(RunConfig& rc, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open config file '{}'", path.string()));
  json obj;
  try {
    in >> obj;
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("config file '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  if (!obj.is_object()) throw UsageError("config file must hold a JSON object");

  static const std::vector<std::string> known = {
      "variant", "train", "validation", "test", "input", "embeddings", "model", "predictions", "out", "out_dir",
      "topics", "k", "lda_iterations", "n_neighbors", "min_dist", "umap_dim", "epochs", "min_cluster_size",
      "min_samples", "kernel", "nu", "gamma", "tune_nu", "npmi_window", "cv_window", "top_n", "dim", "seed", "threads"};
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError(fmt::format("unknown config key '{}'", key));
    }
  }
  fill_from(rc.variant, obj, "variant");
  fill_from(rc.train, obj, "train");
  fill_from(rc.validation, obj, "validation");
  fill_from(rc.test, obj, "test");
  fill_from(rc.input, obj, "input");
  fill_from(rc.embeddings, obj, "embeddings");
  fill_from(rc.model, obj, "model");
  fill_from(rc.predictions, obj, "predictions");
  fill_from(rc.out, obj, "out");
  fill_from(rc.out_dir, obj, "out_dir");
  fill_from(rc.topics, obj, "topics");
  fill_from(rc.k, obj, "k");
  fill_from(rc.lda_iterations, obj, "lda_iterations");
  fill_from(rc.n_neighbors, obj, "n_neighbors");
  fill_from(rc.min_dist, obj, "min_dist");
  fill_from(rc.umap_dim, obj, "umap_dim");
  fill_from(rc.epochs, obj, "epochs");
  fill_from(rc.min_cluster_size, obj, "min_cluster_size");
  fill_from(rc.min_samples, obj, "min_samples");
  fill_from(rc.kernel, obj, "kernel");
  fill_from(rc.nu, obj, "nu");
  fill_from(rc.gamma, obj, "gamma");
  fill_from(rc.tune_nu, obj, "tune_nu");
  fill_from(rc.npmi_window, obj, "npmi_window");
  fill_from(rc.cv_window, obj, "cv_window");
  fill_from(rc.top_n, obj, "top_n");
  fill_from(rc.dim, obj, "dim");
  fill_from(rc.seed, obj, "seed");
  fill_from(rc.threads, obj, "threads");
}

PipelineConfig to_pipeline_config(const RunConfig& rc) {
  PipelineConfig pc;
  const auto variant = parse_variant(rc.variant.value_or(""));
  if (!variant) {
    throw UsageError(fmt::format("--variant must be one of bertdetect, lda, chabada, gcata, ocsvm-only (got '{}')",
                                 rc.variant.value_or("")));
  }
  pc.variant = *variant;
  pc.seed = rc.seed.value_or(0);
  pc.threads = rc.threads.value_or(0);
  if (rc.topics) pc.lda.topics = *rc.topics;
  if (rc.lda_iterations) pc.lda.iterations = *rc.lda_iterations;
  if (rc.k) pc.kmeans_k = *rc.k;
  if (rc.n_neighbors) pc.umap.n_neighbors = *rc.n_neighbors;
  if (rc.min_dist) pc.umap.min_dist = *rc.min_dist;
  if (rc.umap_dim) pc.umap.dim = *rc.umap_dim;
  if (rc.epochs) pc.umap.epochs = *rc.epochs;
  if (rc.min_cluster_size) pc.hdbscan.min_cluster_size = *rc.min_cluster_size;
  if (rc.min_samples) pc.hdbscan.min_samples = *rc.min_samples;
  if (rc.kernel) {
    if (*rc.kernel == "rbf") {
      pc.kernel = KernelType::kRbf;
    } else if (*rc.kernel == "linear") {
      pc.kernel = KernelType::kLinear;
    } else {
      throw UsageError(fmt::format("--kernel must be rbf or linear (got '{}')", *rc.kernel));
    }
  }
  if (rc.nu) {
    if (!(*rc.nu > 0.0 && *rc.nu <= 1.0)) throw UsageError("--nu must lie in (0, 1]");
    pc.nu = *rc.nu;
  }
  if (rc.gamma) {
    if (!(*rc.gamma > 0.0)) throw UsageError("--gamma must be positive");
    pc.gamma = *rc.gamma;
  }
  if (rc.npmi_window) pc.npmi_window = *rc.npmi_window;
  if (rc.cv_window) pc.cv_window = *rc.cv_window;
  if (rc.top_n) pc.top_n = *rc.top_n;
  return pc;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topic-aware Android malware detection"};
  app.name("apptopic");
  app.require_subcommand(1);

  RunConfig rc;
  std::optional<std::filesystem::path> config_path;

  auto* train_cmd = app.add_subcommand("train", "fit a detector and write the model JSON");
  add_common(train_cmd, rc, config_path);
  add_hyperparameters(train_cmd, rc);
  train_cmd->add_option("--train", rc.train, "benign training dataset (JSONL)");
  train_cmd->add_option("--validation", rc.validation, "labelled validation dataset for --tune-nu");
  train_cmd->add_option("--embeddings", rc.embeddings, "EMB1 embedding file");
  train_cmd->add_option("--out", rc.out, "model JSON path");

  auto* infer_cmd = app.add_subcommand("infer", "score apps with a trained model");
  add_common(infer_cmd, rc, config_path);
  infer_cmd->add_option("--model", rc.model, "model JSON");
  infer_cmd->add_option("--test", rc.test, "apps to score (JSONL)");
  infer_cmd->add_option("--embeddings", rc.embeddings, "EMB1 file holding training and scored apps");
  infer_cmd->add_option("--out", rc.out, "predictions CSV (stdout if omitted)");

  auto* eval_cmd = app.add_subcommand("evaluate", "confusion counts and report bundle for a predictions CSV");
  add_common(eval_cmd, rc, config_path);
  eval_cmd->add_option("--predictions", rc.predictions, "predictions CSV");
  eval_cmd->add_option("--test", rc.test, "labelled dataset (JSONL)");
  eval_cmd->add_option("--model", rc.model, "model JSON for per-topic sections");
  eval_cmd->add_option("--out-dir", rc.out_dir, "report bundle directory");

  auto* coh_cmd = app.add_subcommand("coherence", "NPMI and Cv for every topic");
  add_common(coh_cmd, rc, config_path);
  coh_cmd->add_option("--model", rc.model, "model JSON");
  coh_cmd->add_option("--train", rc.train, "reference corpus (JSONL)");
  coh_cmd->add_option("--out", rc.out, "coherence CSV");
  coh_cmd->add_option("--out-dir", rc.out_dir, "directory for coherence.csv and CCDF CSVs");

  auto* emb_cmd = app.add_subcommand("write-embeddings", "write fallback embeddings as EMB1");
  add_common(emb_cmd, rc, config_path);
  emb_cmd->add_option("--input", rc.input, "dataset (JSONL)");
  emb_cmd->add_option("--out", rc.out, "EMB1 output path");
  emb_cmd->add_option("--dim", rc.dim, "vector dimension (default 64)");

  auto* report_cmd = app.add_subcommand("report", "full report bundle with coherence and affinity sections");
  add_common(report_cmd, rc, config_path);
  report_cmd->add_option("--model", rc.model, "model JSON");
  report_cmd->add_option("--predictions", rc.predictions, "predictions CSV");
  report_cmd->add_option("--test", rc.test, "labelled dataset (JSONL)");
  report_cmd->add_option("--train", rc.train, "reference corpus for coherence (JSONL)");
  report_cmd->add_option("--out-dir", rc.out_dir, "report bundle directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (config_path) merge_config_file(rc, *config_path);
    if (train_cmd->parsed()) return cmd_train(rc, out, err);
    if (infer_cmd->parsed()) return cmd_infer(rc, out, err);
    if (eval_cmd->parsed()) return cmd_evaluate(rc, out, err, false);
    if (coh_cmd->parsed()) return cmd_coherence(rc, out, err);
    if (emb_cmd->parsed()) return cmd_write_embeddings(rc, out, err);
    if (report_cmd->parsed()) return cmd_evaluate(rc, out, err, true);
    err << "error: no command given\n";
    return 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace apptopic

#include "apptopic/pipeline.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "apptopic/coherence.hpp"
#include "apptopic/errors.hpp"
#include "parallel.hpp"

namespace apptopic {
namespace {

Matrix gather_embeddings(const EmbeddingMatrix& embeddings, const std::vector<std::string>& ids) {
  Matrix out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(embeddings.at(id));
  return out;
}

std::vector<Vector> api_vectors(const std::vector<AppRecord>& records, const ApiVocabulary& vocab) {
  std::vector<Vector> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(vectorize_api_calls(r, vocab).bits);
  return out;
}

std::uint64_t fold_in_seed(std::uint64_t seed, std::string_view app_id) { return mix64(seed ^ fnv1a(app_id)); }

std::vector<TopicSummary> ctfidf_summaries(const std::vector<TokenizedDoc>& docs, const std::vector<int>& topics,
                                           std::size_t topic_count, std::size_t top_n) {
  ClassTokens by_topic;
  std::map<int, std::size_t> doc_counts;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto& bucket = by_topic[topics[i]];
    bucket.insert(bucket.end(), docs[i].tokens.begin(), docs[i].tokens.end());
    ++doc_counts[topics[i]];
  }
  CtfidfMatrix weights = ctfidf(by_topic);
  for (int c : weights.classes) weights.doc_counts.push_back(doc_counts[c]);
  std::vector<TopicSummary> out;
  for (std::size_t t = 0; t < topic_count; ++t) {
    const int id = static_cast<int>(t);
    if (!by_topic.contains(id)) continue;
    out.push_back(top_terms(weights, id, top_n));
  }
  return out;
}

std::vector<TopicSummary> lda_summaries(const LdaModel& lda, const std::vector<int>& topics, std::size_t top_n) {
  std::vector<TopicSummary> out;
  const double vbeta = static_cast<double>(lda.vocab.size()) * lda.beta;
  for (std::size_t k = 0; k < lda.topics; ++k) {
    TopicSummary s;
    s.topic_id = static_cast<int>(k);
    s.doc_count = static_cast<std::size_t>(std::count(topics.begin(), topics.end(), s.topic_id));
    for (const auto& word : lda_top_words(lda, k, top_n)) {
      const std::size_t w = lda.word_index.at(word);
      s.top_terms.emplace_back(word, (lda.topic_word[k][w] + lda.beta) / (static_cast<double>(lda.topic_totals[k]) + vbeta));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Vector> lda_training_affinities(const LdaModel& lda, std::size_t docs) {
  std::vector<Vector> out;
  out.reserve(docs);
  for (std::size_t d = 0; d < docs; ++d) out.push_back(training_doc_affinity(lda, d));
  return out;
}

std::size_t clamp_k(std::size_t requested, std::size_t n, std::vector<std::string>& warnings) {
  if (requested <= n) return requested;
  warnings.push_back(fmt::format("k-means k={} clamped to the {} training apps", requested, n));
  return n;
}

// Everything except the OC-SVMs.
TrainedDetector fit_topic_stage(const PipelineConfig& config, const DatasetSplit& train_split,
                                const EmbeddingMatrix* embeddings) {
  if (train_split.records.empty()) throw DataError("training split is empty");
  require_benign(train_split);
  if (needs_embeddings(config.variant) && embeddings == nullptr) {
    throw UsageError(fmt::format("--embeddings is required for variant {}", to_string(config.variant)));
  }

  TrainedDetector det;
  det.config = config;
  det.vocab = build_api_vocabulary(train_split);
  for (const auto& r : train_split.records) det.train_ids.push_back(r.app_id);
  det.manifest.seed = config.seed;
  det.manifest.dataset_hash = dataset_hash(train_split);
  det.manifest.train_count = train_split.records.size();
  det.manifest.warnings = train_split.warnings;

  const auto docs = tokenize_split(train_split, default_stopwords());
  const std::size_t n = docs.size();

  switch (config.variant) {
    case Variant::kBertDetect: {
      const Matrix x = gather_embeddings(*embeddings, det.train_ids);
      LayoutParams lp = config.umap;
      lp.seed = config.seed;
      UmapTopicStage stage;
      stage.layout = fit_umap(x, lp);
      stage.train_ids = det.train_ids;
      stage.embedding_hash = embedding_content_hash(*embeddings, det.train_ids);
      const ClusterAssignment clusters = hdbscan(stage.layout.points, config.hdbscan);
      const auto affinities = soft_membership(stage.layout.points, clusters, det.train_ids);
      stage.cluster_labels = clusters.labels;
      stage.exemplars = clusters.exemplars;
      stage.stability = clusters.stability;
      stage.centroids = exemplar_centroids(stage.layout.points, clusters);
      stage.temperature = affinity_temperature(stage.centroids);
      det.topic_count = clusters.cluster_count;
      for (const auto& a : affinities) {
        det.train_topics.push_back(a.assigned_topic);
        det.train_affinities.push_back(a.affinities);
      }
      det.manifest.embedding_hash = stage.embedding_hash;
      det.umap = std::move(stage);
      det.summaries = ctfidf_summaries(docs, det.train_topics, det.topic_count, config.top_n);
      break;
    }
    case Variant::kLdaOnly:
    case Variant::kChabada: {
      LdaParams lp = config.lda;
      lp.seed = config.seed;
      det.lda = fit_gibbs(docs, lp);
      det.train_affinities = lda_training_affinities(*det.lda, n);
      if (config.variant == Variant::kLdaOnly) {
        for (const auto& a : det.train_affinities) det.train_topics.push_back(argmax(a));
        det.topic_count = det.lda->topics;
        det.summaries = lda_summaries(*det.lda, det.train_topics, config.top_n);
      } else {
        const std::size_t k = clamp_k(config.kmeans_k, n, det.manifest.warnings);
        det.kmeans = kmeans_fit(det.train_affinities, k, config.kmeans_max_iter, config.seed);
        for (const auto& a : det.train_affinities) {
          det.train_topics.push_back(static_cast<int>(kmeans_assign(*det.kmeans, a)));
        }
        det.topic_count = k;
        det.summaries = ctfidf_summaries(docs, det.train_topics, det.topic_count, config.top_n);
      }
      break;
    }
    case Variant::kGCata: {
      const Matrix x = gather_embeddings(*embeddings, det.train_ids);
      const std::size_t k = clamp_k(config.kmeans_k, n, det.manifest.warnings);
      det.kmeans = kmeans_fit(x, k, config.kmeans_max_iter, config.seed);
      for (const auto& v : x) det.train_topics.push_back(static_cast<int>(kmeans_assign(*det.kmeans, v)));
      det.topic_count = k;
      det.manifest.embedding_hash = embedding_content_hash(*embeddings, det.train_ids);
      det.summaries = ctfidf_summaries(docs, det.train_topics, det.topic_count, config.top_n);
      break;
    }
    case Variant::kOcsvmOnly:
      det.train_topics.assign(n, -1);
      break;
  }
  return det;
}

void fit_detectors(TrainedDetector& det, const std::vector<Vector>& features, double nu) {
  const PipelineConfig& config = det.config;
  OcSvmParams params;
  params.nu = nu;
  params.kernel.type = config.kernel;
  params.kernel.gamma = config.gamma.value_or(1.0 / static_cast<double>(det.vocab.size()));
  det.manifest.nu = nu;
  det.manifest.gamma = params.kernel.gamma;

  if (features.size() < 2) throw DataError("at least 2 benign training apps are needed for the OC-SVM");
  det.global_model = ocsvm_fit(features, params);

  std::vector<Matrix> members(det.topic_count);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (det.train_topics[i] >= 0) members[static_cast<std::size_t>(det.train_topics[i])].push_back(features[i]);
  }
  std::vector<std::optional<OcSvmModel>> models(det.topic_count);
  detail::parallel_for(det.topic_count, config.threads, [&](std::size_t t) {
    if (members[t].size() >= config.min_topic_members) models[t] = ocsvm_fit(members[t], params);
  });
  det.topic_models.clear();
  for (std::size_t t = 0; t < det.topic_count; ++t) {
    if (models[t]) det.topic_models.emplace(static_cast<int>(t), std::move(*models[t]));
  }
}

Matrix training_vectors_for(const TrainedDetector& det, const EmbeddingMatrix& embeddings) {
  const auto& stage = *det.umap;
  for (const auto& id : stage.train_ids) {
    if (!embeddings.contains(id)) {
      throw DataError(fmt::format("embedding file lacks training app '{}' needed to place new apps", id));
    }
  }
  if (embedding_content_hash(embeddings, stage.train_ids) != stage.embedding_hash) {
    throw DataError("embedding file does not match the embeddings the model was trained on");
  }
  return gather_embeddings(embeddings, stage.train_ids);
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kBertDetect: return "bertdetect";
    case Variant::kLdaOnly: return "lda";
    case Variant::kChabada: return "chabada";
    case Variant::kGCata: return "gcata";
    case Variant::kOcsvmOnly: return "ocsvm-only";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view text) {
  for (Variant v : {Variant::kBertDetect, Variant::kLdaOnly, Variant::kChabada, Variant::kGCata, Variant::kOcsvmOnly}) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

bool needs_embeddings(Variant v) { return v == Variant::kBertDetect || v == Variant::kGCata; }

bool has_topic_stage(Variant v) { return v != Variant::kOcsvmOnly; }

std::size_t TrainedDetector::members_of(int topic) const {
  return static_cast<std::size_t>(std::count(train_topics.begin(), train_topics.end(), topic));
}

std::string dataset_hash(const DatasetSplit& split) {
  Fnv1a h;
  for (const auto& r : split.records) {
    h.update(serialize_record(r));
    h.update("\n");
  }
  return h.hex();
}

TrainedDetector train(const PipelineConfig& config, const DatasetSplit& train_split, const EmbeddingMatrix* embeddings) {
  TrainedDetector det = fit_topic_stage(config, train_split, embeddings);
  fit_detectors(det, api_vectors(train_split.records, det.vocab), config.nu);
  return det;
}

std::vector<double> default_nu_grid() { return {0.01, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5}; }

TrainedDetector train_with_nu_search(const PipelineConfig& config, const DatasetSplit& train_split,
                                     const DatasetSplit& validation, const EmbeddingMatrix* embeddings,
                                     const std::vector<double>& nu_grid) {
  if (nu_grid.empty()) throw UsageError("nu grid is empty");
  TrainedDetector det = fit_topic_stage(config, train_split, embeddings);
  const auto features = api_vectors(train_split.records, det.vocab);

  std::vector<std::pair<double, double>> curve;
  double best_nu = nu_grid.front();
  double best_f1 = -1.0;
  for (double nu : nu_grid) {
    fit_detectors(det, features, nu);
    const double f1 = evaluate(infer(det, validation.records, embeddings), validation.records).counts.f1();
    curve.emplace_back(nu, f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_nu = nu;
    }
  }
  fit_detectors(det, features, best_nu);
  det.config.nu = best_nu;
  det.manifest.nu_tuned = true;
  det.manifest.tuning_curve = std::move(curve);
  return det;
}

int assign_topic(const TrainedDetector& det, const AppRecord& app, const EmbeddingMatrix* embeddings,
                 const Matrix* training_vectors) {
  const auto doc = [&] { return tokenize_record(app, default_stopwords()); };
  switch (det.config.variant) {
    case Variant::kBertDetect: {
      const auto& stage = *det.umap;
      const Vector& x = embeddings->at(app.app_id);
      if (x.size() != training_vectors->front().size()) throw DataError("embedding dimension differs from training");
      const Vector low = transform_point(*training_vectors, stage.layout.points, x, stage.layout.params.n_neighbors);
      return argmax(centroid_affinity(low, stage.centroids, stage.temperature));
    }
    case Variant::kLdaOnly:
      return argmax(doc_topic_affinity(*det.lda, doc(), det.config.lda.fold_in_iterations,
                                       fold_in_seed(det.config.seed, app.app_id)));
    case Variant::kChabada: {
      const Vector a = doc_topic_affinity(*det.lda, doc(), det.config.lda.fold_in_iterations,
                                          fold_in_seed(det.config.seed, app.app_id));
      return static_cast<int>(kmeans_assign(*det.kmeans, a));
    }
    case Variant::kGCata: {
      const Vector& x = embeddings->at(app.app_id);
      if (x.size() != det.kmeans->centroids.front().size()) throw DataError("embedding dimension differs from training");
      return static_cast<int>(kmeans_assign(*det.kmeans, x));
    }
    case Variant::kOcsvmOnly:
      return -1;
  }
  return -1;
}

std::vector<Prediction> infer(const TrainedDetector& det, const std::vector<AppRecord>& apps,
                              const EmbeddingMatrix* embeddings) {
  if (apps.empty()) return {};
  if (needs_embeddings(det.config.variant)) {
    if (embeddings == nullptr) {
      throw UsageError(fmt::format("--embeddings is required for variant {}", to_string(det.config.variant)));
    }
    for (const auto& a : apps) {
      if (!embeddings->contains(a.app_id)) throw DataError(fmt::format("no embedding for app '{}'", a.app_id));
    }
  }
  Matrix training_vectors;
  if (det.umap) training_vectors = training_vectors_for(det, *embeddings);

  std::vector<Prediction> out(apps.size());
  detail::parallel_for(apps.size(), det.config.threads, [&](std::size_t i) {
    const AppRecord& app = apps[i];
    Prediction p;
    p.app_id = app.app_id;
    p.assigned_topic = assign_topic(det, app, embeddings, &training_vectors);
    const OcSvmModel* model = &det.global_model;
    if (auto it = det.topic_models.find(p.assigned_topic); it != det.topic_models.end()) model = &it->second;
    p.score = ocsvm_decision(*model, vectorize_api_calls(app, det.vocab).bits);
    p.verdict = p.score < 0.0 ? Label::kMalicious : Label::kBenign;
    out[i] = std::move(p);
  });
  return out;
}

DetectionReport evaluate(const std::vector<Prediction>& predictions, const std::vector<AppRecord>& labelled) {
  std::map<std::string, Label, std::less<>> truth;
  for (const auto& r : labelled) {
    if (!r.label) throw DataError(fmt::format("app '{}' has no label", r.app_id));
    truth.emplace(r.app_id, *r.label);
  }
  if (predictions.size() != labelled.size()) {
    throw DataError(fmt::format("{} predictions but {} labelled apps", predictions.size(), labelled.size()));
  }
  DetectionReport report;
  std::map<int, ConfusionCounts> by_topic;
  std::set<std::string, std::less<>> seen;
  for (const auto& p : predictions) {
    auto it = truth.find(p.app_id);
    if (it == truth.end()) throw DataError(fmt::format("prediction for '{}' has no ground truth", p.app_id));
    if (!seen.insert(p.app_id).second) throw DataError(fmt::format("duplicate prediction for '{}'", p.app_id));
    const bool actual = it->second == Label::kMalicious;
    const bool flagged = p.verdict == Label::kMalicious;
    auto bump = [&](ConfusionCounts& c) {
      if (actual && flagged) ++c.tp;
      else if (actual) ++c.fn;
      else if (flagged) ++c.fp;
      else ++c.tn;
    };
    bump(report.counts);
    if (p.assigned_topic >= 0) bump(by_topic[p.assigned_topic]);
  }
  for (const auto& [topic, counts] : by_topic) report.per_topic.push_back({topic, counts});
  return report;
}

std::vector<CoherenceScore> topic_coherence(const TrainedDetector& det, const std::vector<TokenizedDoc>& reference) {
  std::set<std::string> targets;
  std::vector<TopicWordSet> topics;
  for (const auto& s : det.summaries) {
    TopicWordSet t{s.topic_id, {}};
    for (const auto& [term, _] : s.top_terms) t.words.push_back(term);
    if (t.words.size() < 2) continue;
    targets.insert(t.words.begin(), t.words.end());
    topics.push_back(std::move(t));
  }
  const auto npmi_table = count_cooccurrences(reference, det.config.npmi_window, &targets);
  const auto cv_table = count_cooccurrences(reference, det.config.cv_window, &targets);
  std::vector<CoherenceScore> out;
  for (const auto& t : topics) out.push_back({t.topic_id, npmi_topic(t, npmi_table), cv_topic(t, cv_table)});
  return out;
}

}  // namespace apptopic

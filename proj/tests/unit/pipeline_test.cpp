#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "apptopic/errors.hpp"
#include "apptopic/pipeline.hpp"
#include "apptopic/synthetic.hpp"

using namespace apptopic;

namespace {

AppRecord app(std::string id, std::string description, std::set<std::string> apis,
              std::optional<Label> label = Label::kBenign) {
  return {std::move(id), std::move(description), std::move(apis), label};
}

DatasetSplit small_train(std::size_t n) {
  DatasetSplit s;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::string> apis{"android.net.Http", "android.os.Bundle"};
    if (i % 2 == 0) apis.insert("android.location.Gps");
    if (i % 3 == 0) apis.insert("android.media.Audio");
    s.records.push_back(app("app" + std::to_string(i), "weather forecast radar map rain number " + std::to_string(i % 4),
                            std::move(apis)));
  }
  return s;
}

SyntheticConfig small_synthetic() {
  SyntheticConfig c;
  c.themes = 4;
  c.train_per_theme = 40;
  c.holdout_benign_per_theme = 10;
  c.malicious = 20;
  return c;
}

PipelineConfig quick_config(Variant v) {
  PipelineConfig c;
  c.variant = v;
  c.seed = 3;
  c.umap.epochs = 100;
  c.lda.topics = 4;
  c.lda.iterations = 60;
  c.lda.fold_in_iterations = 20;
  c.kmeans_k = 4;
  return c;
}

EmbeddingMatrix embed_all(const SyntheticCorpus& corpus) {
  std::vector<AppRecord> all = corpus.train.records;
  all.insert(all.end(), corpus.test.records.begin(), corpus.test.records.end());
  return fallback_embed_records(all, 64, 7, default_stopwords());
}

}  // namespace

TEST(Pipeline, VariantNamesRoundTrip) {
  for (Variant v : {Variant::kBertDetect, Variant::kLdaOnly, Variant::kChabada, Variant::kGCata, Variant::kOcsvmOnly}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_FALSE(parse_variant("bert").has_value());
  EXPECT_TRUE(needs_embeddings(Variant::kGCata));
  EXPECT_FALSE(needs_embeddings(Variant::kChabada));
  EXPECT_FALSE(has_topic_stage(Variant::kOcsvmOnly));
}

TEST(Pipeline, OcsvmOnlyTrainsOneGlobalModel) {
  const auto det = train(quick_config(Variant::kOcsvmOnly), small_train(10), nullptr);
  EXPECT_EQ(det.topic_count, 0u);
  EXPECT_TRUE(det.topic_models.empty());
  EXPECT_FALSE(det.umap || det.lda || det.kmeans);
  EXPECT_EQ(det.global_model.n_train, 10u);
  EXPECT_TRUE(std::all_of(det.train_topics.begin(), det.train_topics.end(), [](int t) { return t == -1; }));
}

TEST(Pipeline, MissingEmbeddingsIsUsageError) {
  EXPECT_THROW(train(quick_config(Variant::kBertDetect), small_train(10), nullptr), UsageError);
  EXPECT_THROW(train(quick_config(Variant::kGCata), small_train(10), nullptr), UsageError);
}

TEST(Pipeline, MaliciousTrainingAppIsRejected) {
  auto s = small_train(6);
  s.records[2].label = Label::kMalicious;
  EXPECT_THROW(train(quick_config(Variant::kOcsvmOnly), s, nullptr), DataError);
}

TEST(Pipeline, BertDetectFindsTopicsAndModels) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  const auto emb = embed_all(corpus);
  const auto det = train(quick_config(Variant::kBertDetect), corpus.train, &emb);
  ASSERT_GE(det.topic_count, 2u);
  ASSERT_TRUE(det.umap.has_value());
  EXPECT_EQ(det.train_topics.size(), corpus.train.records.size());
  for (std::size_t t = 0; t < det.topic_count; ++t) {
    const int topic = static_cast<int>(t);
    EXPECT_EQ(det.topic_models.count(topic) == 1, det.members_of(topic) >= det.config.min_topic_members) << t;
  }
  for (const auto& a : det.train_affinities) {
    ASSERT_EQ(a.size(), det.topic_count);
    double sum = 0.0;
    for (double v : a) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Pipeline, ChabadaClampsKToTrainingSize) {
  auto c = quick_config(Variant::kChabada);
  c.kmeans_k = 50;
  const auto det = train(c, small_train(30), nullptr);
  EXPECT_EQ(det.topic_count, 30u);
  ASSERT_FALSE(det.manifest.warnings.empty());
  EXPECT_NE(det.manifest.warnings.back().find("clamped"), std::string::npos);
}

TEST(Pipeline, LdaOnlyTopicCountIsK) {
  const auto det = train(quick_config(Variant::kLdaOnly), small_train(20), nullptr);
  EXPECT_EQ(det.topic_count, 4u);
  for (int t : det.train_topics) EXPECT_TRUE(t >= 0 && t < 4);
}

TEST(Pipeline, CloneOfTrainingInlierIsBenign) {
  const auto s = small_train(20);
  const auto det = train(quick_config(Variant::kOcsvmOnly), s, nullptr);
  const auto scored = infer(det, s.records, nullptr);
  const auto best = std::max_element(scored.begin(), scored.end(),
                                     [](const Prediction& a, const Prediction& b) { return a.score < b.score; });
  ASSERT_GE(best->score, 0.0);
  AppRecord clone = *s.find(best->app_id);
  clone.app_id = "clone";
  const auto preds = infer(det, {clone}, nullptr);
  ASSERT_EQ(preds.size(), 1u);
  EXPECT_EQ(preds[0].verdict, Label::kBenign);
  EXPECT_DOUBLE_EQ(preds[0].score, best->score);
}

TEST(Pipeline, EmptyInferenceListGivesEmptyPredictions) {
  const auto det = train(quick_config(Variant::kOcsvmOnly), small_train(10), nullptr);
  EXPECT_TRUE(infer(det, {}, nullptr).empty());
}

TEST(Pipeline, MissingEmbeddingNamesTheApp) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  const auto emb = fallback_embed_records(corpus.train.records, 64, 7, default_stopwords());
  const auto det = train(quick_config(Variant::kGCata), corpus.train, &emb);
  try {
    infer(det, {app("ghost.app", "anything", {"android.net.Http"})}, &emb);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost.app"), std::string::npos);
  }
}

TEST(Pipeline, VerdictFollowsScoreSign) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  const auto emb = embed_all(corpus);
  for (Variant v : {Variant::kBertDetect, Variant::kChabada, Variant::kGCata, Variant::kOcsvmOnly}) {
    const auto det = train(quick_config(v), corpus.train, &emb);
    const auto preds = infer(det, corpus.test.records, &emb);
    ASSERT_EQ(preds.size(), corpus.test.records.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      EXPECT_EQ(preds[i].app_id, corpus.test.records[i].app_id);
      EXPECT_EQ(preds[i].verdict, preds[i].score < 0.0 ? Label::kMalicious : Label::kBenign);
      if (has_topic_stage(v)) {
        EXPECT_GE(preds[i].assigned_topic, 0);
        EXPECT_LT(preds[i].assigned_topic, static_cast<int>(det.topic_count));
      } else {
        EXPECT_EQ(preds[i].assigned_topic, -1);
      }
    }
  }
}

TEST(Pipeline, EvaluateConservesCounts) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  const auto emb = embed_all(corpus);
  const auto det = train(quick_config(Variant::kBertDetect), corpus.train, &emb);
  const auto preds = infer(det, corpus.test.records, &emb);
  const auto report = evaluate(preds, corpus.test.records);
  EXPECT_EQ(report.counts.total(), corpus.test.records.size());
  std::size_t malicious = 0;
  for (const auto& r : corpus.test.records) malicious += r.label == Label::kMalicious;
  EXPECT_EQ(report.counts.tp + report.counts.fn, malicious);

  ConfusionCounts sum;
  for (const auto& t : report.per_topic) {
    sum.tp += t.counts.tp;
    sum.fp += t.counts.fp;
    sum.tn += t.counts.tn;
    sum.fn += t.counts.fn;
    const auto n = static_cast<std::size_t>(std::count_if(
        preds.begin(), preds.end(), [&](const Prediction& p) { return p.assigned_topic == t.topic_id; }));
    EXPECT_EQ(t.counts.total(), n);
  }
  EXPECT_EQ(sum.tp, report.counts.tp);
  EXPECT_EQ(sum.fp, report.counts.fp);
  EXPECT_EQ(sum.tn, report.counts.tn);
  EXPECT_EQ(sum.fn, report.counts.fn);
}

TEST(Pipeline, EvaluateHandCounts) {
  const std::vector<AppRecord> truth{app("a", "", {}, Label::kMalicious), app("b", "", {}, Label::kMalicious),
                                     app("c", "", {}, Label::kBenign), app("d", "", {}, Label::kBenign)};
  const std::vector<Prediction> preds{{"a", 0, -1.0, Label::kMalicious},
                                      {"b", 1, 0.5, Label::kBenign},
                                      {"c", 0, -0.2, Label::kMalicious},
                                      {"d", 1, 0.1, Label::kBenign}};
  const auto r = evaluate(preds, truth);
  EXPECT_EQ(r.counts.tp, 1u);
  EXPECT_EQ(r.counts.fn, 1u);
  EXPECT_EQ(r.counts.fp, 1u);
  EXPECT_EQ(r.counts.tn, 1u);
  ASSERT_EQ(r.per_topic.size(), 2u);
  EXPECT_EQ(r.per_topic[0].counts.tp, 1u);
  EXPECT_EQ(r.per_topic[0].counts.fp, 1u);
  EXPECT_EQ(r.per_topic[1].counts.fn, 1u);
  EXPECT_EQ(r.per_topic[1].counts.tn, 1u);
}

TEST(Pipeline, EvaluateRejectsMismatches) {
  const std::vector<AppRecord> truth{app("a", "", {}, Label::kMalicious), app("b", "", {}, Label::kBenign)};
  EXPECT_THROW(evaluate({{"a", -1, 1.0, Label::kBenign}}, truth), DataError);
  EXPECT_THROW(evaluate({{"a", -1, 1.0, Label::kBenign}, {"zzz", -1, 1.0, Label::kBenign}}, truth), DataError);
  EXPECT_THROW(evaluate({{"a", -1, 1.0, Label::kBenign}, {"a", -1, 1.0, Label::kBenign}}, truth), DataError);
  const std::vector<AppRecord> unlabelled{app("a", "", {}, std::nullopt)};
  EXPECT_THROW(evaluate({{"a", -1, 1.0, Label::kBenign}}, unlabelled), DataError);
}

TEST(Pipeline, OcsvmOnlyIgnoresDescriptions) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  auto scrambled_train = corpus.train;
  for (auto& r : scrambled_train.records) r.description = "completely different words here";
  auto scrambled_test = corpus.test.records;
  for (auto& r : scrambled_test) r.description.clear();

  const auto a = infer(train(quick_config(Variant::kOcsvmOnly), corpus.train, nullptr), corpus.test.records, nullptr);
  const auto b = infer(train(quick_config(Variant::kOcsvmOnly), scrambled_train, nullptr), scrambled_test, nullptr);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].score, b[i].score);
    EXPECT_EQ(a[i].verdict, b[i].verdict);
  }
}

TEST(Pipeline, TrainingIsDeterministicAndThreadIndependent) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  const auto emb = embed_all(corpus);
  auto c = quick_config(Variant::kBertDetect);
  const auto a = train(c, corpus.train, &emb);
  c.threads = 3;
  const auto b = train(c, corpus.train, &emb);
  EXPECT_EQ(a.train_topics, b.train_topics);
  EXPECT_EQ(a.umap->layout.points, b.umap->layout.points);
  const auto pa = infer(a, corpus.test.records, &emb);
  const auto pb = infer(b, corpus.test.records, &emb);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].score, pb[i].score);
    EXPECT_EQ(pa[i].assigned_topic, pb[i].assigned_topic);
  }
}

TEST(Pipeline, EmbeddingsMustCoverTrainingApps) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  const auto emb = embed_all(corpus);
  const auto det = train(quick_config(Variant::kBertDetect), corpus.train, &emb);
  const auto test_only = fallback_embed_records(corpus.test.records, 64, 7, default_stopwords());
  EXPECT_THROW(infer(det, corpus.test.records, &test_only), DataError);
}

TEST(Pipeline, NuSearchRecordsCurve) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  const std::vector<double> grid{0.05, 0.2};
  const auto det = train_with_nu_search(quick_config(Variant::kOcsvmOnly), corpus.train, corpus.validation, nullptr, grid);
  EXPECT_TRUE(det.manifest.nu_tuned);
  ASSERT_EQ(det.manifest.tuning_curve.size(), 2u);
  const auto best = std::max_element(det.manifest.tuning_curve.begin(), det.manifest.tuning_curve.end(),
                                     [](const auto& x, const auto& y) { return x.second < y.second; });
  EXPECT_EQ(det.config.nu, best->first);
}

TEST(Pipeline, CoherenceCoversTopicsWithTerms) {
  const auto corpus = make_synthetic_corpus(small_synthetic());
  const auto emb = embed_all(corpus);
  const auto det = train(quick_config(Variant::kBertDetect), corpus.train, &emb);
  const auto scores = topic_coherence(det, tokenize_split(corpus.train, default_stopwords()));
  EXPECT_FALSE(scores.empty());
  for (const auto& s : scores) {
    EXPECT_GE(s.npmi, -1.0);
    EXPECT_LE(s.npmi, 1.0);
    EXPECT_GE(s.cv, 0.0);
    EXPECT_LE(s.cv, 1.0);
  }
}

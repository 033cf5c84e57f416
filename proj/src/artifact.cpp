#include "apptopic/artifact.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "apptopic/errors.hpp"

namespace apptopic {

using nlohmann::json;

namespace {

json ocsvm_to_json(const OcSvmModel& m) {
  json support = json::array();
  for (const auto& sv : m.support) {
    json bits = json::array();
    for (std::size_t i = 0; i < sv.x.size(); ++i) {
      if (sv.x[i] == 1.0) {
        bits.push_back(i);
      } else if (sv.x[i] != 0.0) {
        throw DataError("support vector is not binary; cannot store sparsely");
      }
    }
    support.push_back({{"alpha", sv.alpha}, {"bits", bits}});
  }
  return {{"kernel", std::string(to_string(m.kernel.type))}, {"gamma", m.kernel.gamma}, {"nu", m.nu},
          {"rho", m.rho},  {"n_train", m.n_train},  {"support", support}};
}

OcSvmModel ocsvm_from_json(const json& j, std::size_t dim) {
  OcSvmModel m;
  m.kernel.type = j.at("kernel").get<std::string>() == "linear" ? KernelType::kLinear : KernelType::kRbf;
  m.kernel.gamma = j.at("gamma").get<double>();
  m.nu = j.at("nu").get<double>();
  m.rho = j.at("rho").get<double>();
  m.n_train = j.at("n_train").get<std::size_t>();
  for (const auto& sv : j.at("support")) {
    SupportVector s{Vector(dim, 0.0), sv.at("alpha").get<double>()};
    for (const auto& b : sv.at("bits")) {
      const auto idx = b.get<std::size_t>();
      if (idx >= dim) throw DataError("support vector bit index exceeds the API vocabulary");
      s.x[idx] = 1.0;
    }
    m.support.push_back(std::move(s));
  }
  return m;
}

json summaries_to_json(const std::vector<TopicSummary>& summaries) {
  json out = json::array();
  for (const auto& s : summaries) {
    json terms = json::array();
    for (const auto& [term, weight] : s.top_terms) terms.push_back({term, weight});
    out.push_back({{"topic_id", s.topic_id}, {"doc_count", s.doc_count}, {"top_terms", terms}});
  }
  return out;
}

std::vector<TopicSummary> summaries_from_json(const json& j) {
  std::vector<TopicSummary> out;
  for (const auto& s : j) {
    TopicSummary t;
    t.topic_id = s.at("topic_id").get<int>();
    t.doc_count = s.at("doc_count").get<std::size_t>();
    for (const auto& pair : s.at("top_terms")) t.top_terms.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<double>());
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

json config_to_json(const PipelineConfig& c) {
  json j = {{"variant", std::string(to_string(c.variant))},
            {"seed", c.seed},
            {"kernel", std::string(to_string(c.kernel))},
            {"nu", c.nu},
            {"min_topic_members", c.min_topic_members},
            {"top_n", c.top_n},
            {"npmi_window", c.npmi_window},
            {"cv_window", c.cv_window}};
  if (c.gamma) j["gamma"] = *c.gamma;
  switch (c.variant) {
    case Variant::kBertDetect:
      j["umap"] = {{"n_neighbors", c.umap.n_neighbors}, {"dim", c.umap.dim},         {"epochs", c.umap.epochs},
                   {"min_dist", c.umap.min_dist},       {"negative_samples", c.umap.negative_samples}};
      j["hdbscan"] = {{"min_cluster_size", c.hdbscan.min_cluster_size}, {"min_samples", c.hdbscan.min_samples}};
      break;
    case Variant::kChabada:
      j["kmeans"] = {{"k", c.kmeans_k}, {"max_iter", c.kmeans_max_iter}};
      [[fallthrough]];
    case Variant::kLdaOnly:
      j["lda"] = {{"topics", c.lda.topics},
                  {"alpha", c.lda.effective_alpha()},
                  {"beta", c.lda.beta},
                  {"iterations", c.lda.iterations},
                  {"fold_in_iterations", c.lda.fold_in_iterations}};
      break;
    case Variant::kGCata:
      j["kmeans"] = {{"k", c.kmeans_k}, {"max_iter", c.kmeans_max_iter}};
      break;
    case Variant::kOcsvmOnly:
      break;
  }
  return j;
}

namespace {

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  const auto variant = parse_variant(j.at("variant").get<std::string>());
  if (!variant) throw DataError("artifact names an unknown variant");
  c.variant = *variant;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.kernel = j.at("kernel").get<std::string>() == "linear" ? KernelType::kLinear : KernelType::kRbf;
  c.nu = j.at("nu").get<double>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  c.min_topic_members = j.at("min_topic_members").get<std::size_t>();
  c.top_n = j.at("top_n").get<std::size_t>();
  c.npmi_window = j.at("npmi_window").get<std::size_t>();
  c.cv_window = j.at("cv_window").get<std::size_t>();
  if (j.contains("umap")) {
    const auto& u = j.at("umap");
    c.umap.n_neighbors = u.at("n_neighbors").get<std::size_t>();
    c.umap.dim = u.at("dim").get<std::size_t>();
    c.umap.epochs = u.at("epochs").get<std::size_t>();
    c.umap.min_dist = u.at("min_dist").get<double>();
    c.umap.negative_samples = u.at("negative_samples").get<std::size_t>();
    c.umap.seed = c.seed;
  }
  if (j.contains("hdbscan")) {
    c.hdbscan.min_cluster_size = j.at("hdbscan").at("min_cluster_size").get<std::size_t>();
    c.hdbscan.min_samples = j.at("hdbscan").at("min_samples").get<std::size_t>();
  }
  if (j.contains("lda")) {
    const auto& l = j.at("lda");
    c.lda.topics = l.at("topics").get<std::size_t>();
    c.lda.alpha = l.at("alpha").get<double>();
    c.lda.beta = l.at("beta").get<double>();
    c.lda.iterations = l.at("iterations").get<std::size_t>();
    c.lda.fold_in_iterations = l.at("fold_in_iterations").get<std::size_t>();
    c.lda.seed = c.seed;
  }
  if (j.contains("kmeans")) {
    c.kmeans_k = j.at("kmeans").at("k").get<std::size_t>();
    c.kmeans_max_iter = j.at("kmeans").at("max_iter").get<std::size_t>();
  }
  return c;
}

}  // namespace

json detector_to_json(const TrainedDetector& d) {
  json j;
  j["schema_version"] = kArtifactSchemaVersion;
  j["config"] = config_to_json(d.config);
  j["api_vocabulary"] = d.vocab.entries();
  j["topic_count"] = d.topic_count;
  j["train_ids"] = d.train_ids;
  j["train_topics"] = d.train_topics;

  if (d.umap) {
    const auto& s = *d.umap;
    j["reducer"] = {{"curve", {{"a", s.layout.curve.a}, {"b", s.layout.curve.b}}},
                    {"layout", s.layout.points},
                    {"embedding_hash", s.embedding_hash}};
    j["density"] = {{"labels", s.cluster_labels},
                    {"exemplars", s.exemplars},
                    {"stability", s.stability},
                    {"centroids", s.centroids},
                    {"temperature", s.temperature}};
  }
  if (d.lda) {
    const auto& l = *d.lda;
    json triples = json::array();
    for (std::size_t k = 0; k < l.topics; ++k) {
      for (std::size_t w = 0; w < l.vocab.size(); ++w) {
        if (l.topic_word[k][w] != 0) triples.push_back({k, w, l.topic_word[k][w]});
      }
    }
    j["lda_model"] = {{"vocab", l.vocab}, {"topic_word", triples}, {"skipped_docs", l.skipped_docs}};
  }
  if (d.kmeans) {
    j["kmeans_model"] = {{"centroids", d.kmeans->centroids},
                         {"inertia", d.kmeans->inertia},
                         {"iterations_run", d.kmeans->iterations_run}};
  }
  if (!d.train_affinities.empty()) {
    std::vector<Vector> top_two;
    for (const auto& a : d.train_affinities) {
      Vector sorted = a;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      sorted.resize(std::min<std::size_t>(2, sorted.size()));
      top_two.push_back(std::move(sorted));
    }
    j["train_affinity_top2"] = top_two;
  }

  json models = json::object();
  for (const auto& [topic, m] : d.topic_models) models[std::to_string(topic)] = ocsvm_to_json(m);
  j["topic_models"] = models;
  j["global_model"] = ocsvm_to_json(d.global_model);
  j["topics"] = summaries_to_json(d.summaries);

  const auto& m = d.manifest;
  json curve = json::array();
  for (const auto& [nu, f1] : m.tuning_curve) curve.push_back({nu, f1});
  j["manifest"] = {{"seed", m.seed},       {"dataset_hash", m.dataset_hash}, {"embedding_hash", m.embedding_hash},
                   {"train_count", m.train_count}, {"nu", m.nu},            {"gamma", m.gamma},
                   {"nu_tuned", m.nu_tuned}, {"tuning_curve", curve},       {"warnings", m.warnings}};
  return j;
}

TrainedDetector detector_from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kArtifactSchemaVersion) {
      throw DataError(fmt::format("model schema_version {} is not supported (expected {})", version, kArtifactSchemaVersion));
    }
    TrainedDetector d;
    d.config = config_from_json(j.at("config"));
    d.vocab = ApiVocabulary(j.at("api_vocabulary").get<std::vector<std::string>>());
    d.topic_count = j.at("topic_count").get<std::size_t>();
    d.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    d.train_topics = j.at("train_topics").get<std::vector<int>>();

    if (j.contains("reducer")) {
      UmapTopicStage s;
      const auto& r = j.at("reducer");
      s.layout.params = d.config.umap;
      s.layout.curve = {r.at("curve").at("a").get<double>(), r.at("curve").at("b").get<double>()};
      s.layout.points = r.at("layout").get<Matrix>();
      s.embedding_hash = r.at("embedding_hash").get<std::string>();
      s.train_ids = d.train_ids;
      const auto& den = j.at("density");
      s.cluster_labels = den.at("labels").get<std::vector<int>>();
      s.exemplars = den.at("exemplars").get<std::vector<std::vector<std::size_t>>>();
      s.stability = den.at("stability").get<std::vector<double>>();
      s.centroids = den.at("centroids").get<Matrix>();
      s.temperature = den.at("temperature").get<double>();
      d.umap = std::move(s);
    }
    if (j.contains("lda_model")) {
      const auto& lj = j.at("lda_model");
      LdaModel l;
      l.topics = d.config.lda.topics;
      l.alpha = d.config.lda.effective_alpha();
      l.beta = d.config.lda.beta;
      l.iterations = d.config.lda.iterations;
      l.seed = d.config.seed;
      l.vocab = lj.at("vocab").get<std::vector<std::string>>();
      l.rebuild_index();
      l.skipped_docs = lj.at("skipped_docs").get<std::vector<std::size_t>>();
      l.topic_word.assign(l.topics, std::vector<std::uint32_t>(l.vocab.size(), 0));
      l.topic_totals.assign(l.topics, 0);
      for (const auto& t : lj.at("topic_word")) {
        const auto k = t.at(0).get<std::size_t>();
        const auto w = t.at(1).get<std::size_t>();
        const auto c = t.at(2).get<std::uint32_t>();
        if (k >= l.topics || w >= l.vocab.size()) throw DataError("LDA count triple out of range");
        l.topic_word[k][w] = c;
        l.topic_totals[k] += c;
      }
      d.lda = std::move(l);
    }
    if (j.contains("kmeans_model")) {
      KMeansModel k;
      k.centroids = j.at("kmeans_model").at("centroids").get<Matrix>();
      k.k = k.centroids.size();
      k.inertia = j.at("kmeans_model").at("inertia").get<double>();
      k.iterations_run = j.at("kmeans_model").at("iterations_run").get<std::size_t>();
      k.seed = d.config.seed;
      d.kmeans = std::move(k);
    }
    if (j.contains("train_affinity_top2")) d.train_affinities = j.at("train_affinity_top2").get<std::vector<Vector>>();

    for (const auto& [key, value] : j.at("topic_models").items()) {
      d.topic_models.emplace(std::stoi(key), ocsvm_from_json(value, d.vocab.size()));
    }
    d.global_model = ocsvm_from_json(j.at("global_model"), d.vocab.size());
    d.summaries = summaries_from_json(j.at("topics"));

    const auto& m = j.at("manifest");
    d.manifest.seed = m.at("seed").get<std::uint64_t>();
    d.manifest.dataset_hash = m.at("dataset_hash").get<std::string>();
    d.manifest.embedding_hash = m.at("embedding_hash").get<std::string>();
    d.manifest.train_count = m.at("train_count").get<std::size_t>();
    d.manifest.nu = m.at("nu").get<double>();
    d.manifest.gamma = m.at("gamma").get<double>();
    d.manifest.nu_tuned = m.at("nu_tuned").get<bool>();
    for (const auto& p : m.at("tuning_curve")) d.manifest.tuning_curve.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    d.manifest.warnings = m.at("warnings").get<std::vector<std::string>>();
    return d;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("malformed model artifact: {}", e.what()));
  }
}

void save_detector(const TrainedDetector& detector, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write model '{}'", path.string()));
  out << detector_to_json(detector).dump(1) << '\n';
}

TrainedDetector load_detector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open model '{}'", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("model '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return detector_from_json(j);
}

}  // namespace apptopic

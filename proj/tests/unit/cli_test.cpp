#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <sstream>

#include "apptopic/cli.hpp"
#include "apptopic/errors.hpp"
#include "apptopic/report.hpp"
#include "apptopic/synthetic.hpp"

using namespace apptopic;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("apptopic_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SyntheticConfig c;
    c.themes = 3;
    c.train_per_theme = 20;
    c.holdout_benign_per_theme = 4;
    c.malicious = 6;
    corpus_ = make_synthetic_corpus(c);
    write_text_file(path("train.jsonl"), to_jsonl(corpus_.train));
    write_text_file(path("test.jsonl"), to_jsonl(corpus_.test));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  SyntheticCorpus corpus_;
};

std::string repeated_predictions(std::size_t tp, std::size_t fn, std::size_t tn, std::size_t fp,
                                 std::string* labelled) {
  std::vector<Prediction> preds;
  std::string jsonl;
  std::size_t id = 0;
  auto add = [&](std::size_t n, Label truth, Label verdict) {
    for (std::size_t i = 0; i < n; ++i, ++id) {
      const std::string name = "app" + std::to_string(id);
      preds.push_back({name, -1, verdict == Label::kMalicious ? -1.0 : 1.0, verdict});
      jsonl += R"({"app_id":")" + name + R"(","description":"x","api_calls":[],"label":")" +
               std::string(to_string(truth)) + "\"}\n";
    }
  };
  add(tp, Label::kMalicious, Label::kMalicious);
  add(fn, Label::kMalicious, Label::kBenign);
  add(tn, Label::kBenign, Label::kBenign);
  add(fp, Label::kBenign, Label::kMalicious);
  *labelled = jsonl;
  return predictions_csv(preds);
}

}  // namespace

TEST_F(CliTest, NoCommandIsUsageError) { EXPECT_EQ(run({}).code, 1); }

TEST_F(CliTest, HelpSucceeds) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST_F(CliTest, UnknownFlagIsUsageError) { EXPECT_EQ(run({"train", "--bogus", "1"}).code, 1); }

TEST_F(CliTest, MissingEmbeddingsNamesTheFlag) {
  const auto r = run({"train", "--variant", "bertdetect", "--train", path("train.jsonl"), "--out", path("m.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--embeddings"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownVariantIsUsageError) {
  EXPECT_EQ(run({"train", "--variant", "bert", "--train", path("train.jsonl"), "--out", path("m.json")}).code, 1);
}

TEST_F(CliTest, MissingTrainingFileIsDataError) {
  EXPECT_EQ(run({"train", "--variant", "ocsvm-only", "--train", path("nope.jsonl"), "--out", path("m.json")}).code, 2);
}

TEST_F(CliTest, TrainInferEvaluateEndToEnd) {
  ASSERT_EQ(run({"write-embeddings", "--input", path("train.jsonl"), "--out", path("train.emb")}).code, 0);
  auto all = corpus_.train;
  all.records.insert(all.records.end(), corpus_.test.records.begin(), corpus_.test.records.end());
  write_text_file(path("all.jsonl"), to_jsonl(all));
  ASSERT_EQ(run({"write-embeddings", "--input", path("all.jsonl"), "--out", path("all.emb")}).code, 0);

  const auto t = run({"train", "--variant", "gcata", "--k", "3", "--train", path("train.jsonl"), "--embeddings",
                      path("all.emb"), "--out", path("m.json"), "--seed", "4"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("3 topic(s)"), std::string::npos) << t.out;

  const auto i = run({"infer", "--model", path("m.json"), "--test", path("test.jsonl"), "--embeddings",
                      path("all.emb"), "--out", path("p.csv")});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_EQ(load_predictions(path("p.csv")).size(), corpus_.test.records.size());

  const auto e = run({"evaluate", "--predictions", path("p.csv"), "--test", path("test.jsonl"), "--model",
                      path("m.json"), "--out-dir", path("rep")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("F1 "), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "rep" / "report.json"));
  EXPECT_TRUE(fs::exists(dir_ / "rep" / "run_info.json"));

  const auto r = run({"report", "--predictions", path("p.csv"), "--test", path("test.jsonl"), "--model",
                      path("m.json"), "--train", path("train.jsonl"), "--out-dir", path("rep2")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::json::parse(read_text_file(dir_ / "rep2" / "report.json"));
  EXPECT_TRUE(rep.at("coherence").is_object());

  const auto c = run({"coherence", "--model", path("m.json"), "--train", path("train.jsonl"), "--out", path("c.csv")});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(read_text_file(path("c.csv")).substr(0, 16), "topic_id,npmi,cv");
}

TEST_F(CliTest, InferWritesOneRowPerApp) {
  ASSERT_EQ(run({"train", "--variant", "ocsvm-only", "--train", path("train.jsonl"), "--out", path("m.json")}).code, 0);
  DatasetSplit three;
  three.records.assign(corpus_.test.records.begin(), corpus_.test.records.begin() + 3);
  write_text_file(path("three.jsonl"), to_jsonl(three));
  const auto r = run({"infer", "--model", path("m.json"), "--test", path("three.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1][0], three.records[0].app_id);

  write_text_file(path("empty.jsonl"), "");
  const auto e = run({"infer", "--model", path("m.json"), "--test", path("empty.jsonl"), "--out", path("e.csv")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(read_text_file(path("e.csv")), "app_id,assigned_topic,score,verdict\n");
}

TEST_F(CliTest, SchemaMismatchExitsTwo) {
  ASSERT_EQ(run({"train", "--variant", "ocsvm-only", "--train", path("train.jsonl"), "--out", path("m.json")}).code, 0);
  auto j = nlohmann::json::parse(read_text_file(path("m.json")));
  j["schema_version"] = 999;
  write_text_file(path("bad.json"), j.dump());
  const auto r = run({"infer", "--model", path("bad.json"), "--test", path("test.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("schema"), std::string::npos) << r.err;
}

TEST_F(CliTest, EvaluateLengthMismatchExitsTwo) {
  write_text_file(path("p.csv"), predictions_csv({{corpus_.test.records[0].app_id, -1, 1.0, Label::kBenign}}));
  EXPECT_EQ(run({"evaluate", "--predictions", path("p.csv"), "--test", path("test.jsonl"), "--out-dir", path("r")}).code,
            2);
}

TEST_F(CliTest, CoherenceOnOcsvmOnlyIsUsageError) {
  ASSERT_EQ(run({"train", "--variant", "ocsvm-only", "--train", path("train.jsonl"), "--out", path("m.json")}).code, 0);
  EXPECT_EQ(run({"coherence", "--model", path("m.json"), "--train", path("train.jsonl")}).code, 1);
}

TEST_F(CliTest, WriteEmbeddingsIsDeterministic) {
  DatasetSplit ten;
  ten.records.assign(corpus_.train.records.begin(), corpus_.train.records.begin() + 10);
  write_text_file(path("ten.jsonl"), to_jsonl(ten));
  ASSERT_EQ(run({"write-embeddings", "--input", path("ten.jsonl"), "--out", path("a.emb")}).code, 0);
  ASSERT_EQ(run({"write-embeddings", "--input", path("ten.jsonl"), "--out", path("b.emb")}).code, 0);
  const auto m = load_embeddings(path("a.emb"));
  EXPECT_EQ(m.size(), 10u);
  EXPECT_EQ(m.dim(), 64u);
  EXPECT_EQ(read_text_file(path("a.emb")), read_text_file(path("b.emb")));
}

TEST_F(CliTest, TrainingOutputIsByteIdentical) {
  for (const char* name : {"a.json", "b.json"}) {
    ASSERT_EQ(run({"train", "--variant", "chabada", "--topics", "3", "--k", "3", "--lda-iterations", "30", "--train",
                   path("train.jsonl"), "--out", path(name), "--seed", "9"})
                  .code,
              0);
  }
  EXPECT_EQ(read_text_file(path("a.json")), read_text_file(path("b.json")));
}

TEST_F(CliTest, EvaluateReproducesReferenceF1) {
  std::string labelled;
  write_text_file(path("p.csv"), repeated_predictions(114, 110, 412, 88, &labelled));
  write_text_file(path("t.jsonl"), labelled);
  auto r = run({"evaluate", "--predictions", path("p.csv"), "--test", path("t.jsonl"), "--out-dir", path("r1")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("(0.54)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("TPR 50.89%"), std::string::npos) << r.out;

  write_text_file(path("p.csv"), repeated_predictions(158, 66, 278, 222, &labelled));
  write_text_file(path("t.jsonl"), labelled);
  r = run({"evaluate", "--predictions", path("p.csv"), "--test", path("t.jsonl"), "--out-dir", path("r2")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("(0.52)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("FNR 29.46%"), std::string::npos) << r.out;
  const auto rep = nlohmann::json::parse(read_text_file(dir_ / "r2" / "report.json"));
  EXPECT_EQ(rep.at("coherence"), "not applicable");
}

TEST_F(CliTest, ConfigFileFillsUnsetFlags) {
  write_text_file(path("cfg.json"), R"({"variant": "ocsvm-only", "nu": 0.3, "seed": 5})");
  ASSERT_EQ(run({"train", "--config", path("cfg.json"), "--train", path("train.jsonl"), "--out", path("m.json")}).code,
            0);
  auto j = nlohmann::json::parse(read_text_file(path("m.json")));
  EXPECT_EQ(j.at("config").at("variant"), "ocsvm-only");
  EXPECT_DOUBLE_EQ(j.at("config").at("nu").get<double>(), 0.3);

  ASSERT_EQ(run({"train", "--config", path("cfg.json"), "--nu", "0.1", "--train", path("train.jsonl"), "--out",
                 path("m2.json")})
                .code,
            0);
  j = nlohmann::json::parse(read_text_file(path("m2.json")));
  EXPECT_DOUBLE_EQ(j.at("config").at("nu").get<double>(), 0.1);

  write_text_file(path("bad.json"), R"({"no_such_key": 1})");
  EXPECT_EQ(run({"train", "--config", path("bad.json"), "--train", path("train.jsonl"), "--out", path("m3.json")}).code,
            1);
}

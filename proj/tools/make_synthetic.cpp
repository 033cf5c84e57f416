// Writes the planted-theme corpus (train/validation/test JSONL plus theme
// labels) into a directory.
#include <filesystem>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "apptopic/errors.hpp"
#include "apptopic/report.hpp"
#include "apptopic/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the planted-theme synthetic corpus"};
  std::filesystem::path out_dir = "synthetic";
  apptopic::SyntheticConfig cfg;
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--seed", cfg.seed, "generator seed");
  app.add_option("--themes", cfg.themes, "number of planted themes");
  app.add_option("--per-theme", cfg.train_per_theme, "benign training apps per theme");
  app.add_option("--malicious", cfg.malicious, "malicious apps per held-out split");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = apptopic::make_synthetic_corpus(cfg);
    std::filesystem::create_directories(out_dir);
    apptopic::write_text_file(out_dir / "train.jsonl", apptopic::to_jsonl(corpus.train));
    apptopic::write_text_file(out_dir / "validation.jsonl", apptopic::to_jsonl(corpus.validation));
    apptopic::write_text_file(out_dir / "test.jsonl", apptopic::to_jsonl(corpus.test));
    std::string themes = "app_id,theme\n";
    const auto emit = [&](const apptopic::DatasetSplit& s, const std::vector<int>& t) {
      for (std::size_t i = 0; i < s.records.size(); ++i) themes += fmt::format("{},{}\n", s.records[i].app_id, t[i]);
    };
    emit(corpus.train, corpus.train_themes);
    emit(corpus.validation, corpus.validation_themes);
    emit(corpus.test, corpus.test_themes);
    apptopic::write_text_file(out_dir / "themes.csv", themes);
    std::cout << fmt::format("wrote {} train, {} validation, {} test apps to {}\n", corpus.train.records.size(),
                             corpus.validation.records.size(), corpus.test.records.size(), out_dir.string());
  } catch (const apptopic::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

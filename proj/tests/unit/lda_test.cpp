#include <gtest/gtest.h>

#include <numeric>

#include "apptopic/errors.hpp"
#include "apptopic/lda.hpp"

using namespace apptopic;

namespace {

std::vector<TokenizedDoc> two_disjoint_docs() {
  TokenizedDoc a{"a", {}}, b{"b", {}};
  for (int i = 0; i < 6; ++i) {
    for (const char* w : {"pizza", "order", "delivery"}) a.tokens.push_back(w);
    for (const char* w : {"weather", "radar", "forecast"}) b.tokens.push_back(w);
  }
  return {a, b};
}

LdaParams sharp(std::size_t k, std::uint64_t seed) {
  LdaParams p;
  p.topics = k;
  p.alpha = 0.1;
  p.iterations = 200;
  p.fold_in_iterations = 50;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(Lda, DisjointDocsSeparate) {
  const auto docs = two_disjoint_docs();
  const auto m = fit_gibbs(docs, sharp(2, 1));
  EXPECT_NE(argmax(training_doc_affinity(m, 0)), argmax(training_doc_affinity(m, 1)));
}

TEST(Lda, SingleWordCounts) {
  LdaParams p;
  p.topics = 2;
  p.iterations = 10;
  const auto m = fit_gibbs({{"x", {"solo"}}}, p);
  EXPECT_EQ(m.topic_totals[0] + m.topic_totals[1], 1u);
}

TEST(Lda, Deterministic) {
  const auto docs = two_disjoint_docs();
  const auto a = fit_gibbs(docs, sharp(3, 9));
  const auto b = fit_gibbs(docs, sharp(3, 9));
  EXPECT_EQ(a.topic_word, b.topic_word);
  EXPECT_EQ(a.doc_topic, b.doc_topic);
}

TEST(Lda, CountConservationAndConditionals) {
  auto docs = two_disjoint_docs();
  docs.push_back({"empty", {}});
  docs.push_back({"mix", {"pizza", "radar", "order"}});
  auto p = sharp(3, 4);
  p.iterations = 30;
  p.check_conditionals = true;
  std::size_t sweeps = 0;
  const auto m = fit_gibbs(docs, p, [&](const LdaModel& s) {
    ++sweeps;
    const auto total = std::accumulate(s.topic_totals.begin(), s.topic_totals.end(), std::uint64_t{0});
    EXPECT_EQ(total, 18u + 18u + 3u);
    for (std::size_t k = 0; k < s.topics; ++k) {
      const auto row = std::accumulate(s.topic_word[k].begin(), s.topic_word[k].end(), std::uint64_t{0});
      EXPECT_EQ(row, s.topic_totals[k]);
    }
  });
  EXPECT_EQ(sweeps, 30u);
  EXPECT_EQ(m.skipped_docs, std::vector<std::size_t>{2});
}

TEST(Lda, EmptyCorpusThrows) {
  EXPECT_THROW(fit_gibbs({{"e", {}}}, sharp(2, 0)), DataError);
  EXPECT_THROW(fit_gibbs({}, sharp(2, 0)), DataError);
}

TEST(FoldIn, EmptyDocUniform) {
  const auto m = fit_gibbs(two_disjoint_docs(), sharp(4, 2));
  for (double x : doc_topic_affinity(m, {"e", {}}, 20, 1)) EXPECT_DOUBLE_EQ(x, 0.25);
}

TEST(FoldIn, ExclusiveWordsFollowTopic) {
  const auto docs = two_disjoint_docs();
  const auto m = fit_gibbs(docs, sharp(2, 1));
  const auto fresh = doc_topic_affinity(m, {"n", {"pizza", "delivery", "pizza", "unseenword"}}, 50, 3);
  EXPECT_EQ(argmax(fresh), argmax(training_doc_affinity(m, 0)));
  EXPECT_NEAR(std::accumulate(fresh.begin(), fresh.end(), 0.0), 1.0, 1e-9);
}

TEST(TopWords, HandSortedFixture) {
  LdaModel m;
  m.topics = 2;
  m.beta = 0.01;
  m.vocab = {"apple", "bread", "cheese", "dates"};
  m.rebuild_index();
  m.topic_word = {{5, 2, 5, 0}, {0, 0, 0, 9}};
  m.topic_totals = {12, 9};
  EXPECT_EQ(lda_top_words(m, 0, 3), (std::vector<std::string>{"apple", "cheese", "bread"}));
  EXPECT_EQ(lda_top_words(m, 1, 1), (std::vector<std::string>{"dates"}));
  EXPECT_TRUE(lda_top_words(m, 0, 0).empty());
  EXPECT_THROW(lda_top_words(m, 2, 1), std::out_of_range);
}

TEST(TopWords, SoleWordOnTop) {
  const auto m = fit_gibbs({{"x", {"pizza", "pizza", "pizza"}}, {"y", {"radar", "radar", "radar"}}}, sharp(2, 5));
  const auto t = argmax(training_doc_affinity(m, 0));
  EXPECT_EQ(lda_top_words(m, static_cast<std::size_t>(t), 1).front(), "pizza");
}

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "apptopic/embedding.hpp"
#include "apptopic/synthetic.hpp"

using namespace apptopic;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

// Hand-assembled file independent of the encoder.
std::vector<std::uint8_t> hand_file(std::uint32_t declared, const std::vector<std::pair<std::string, std::vector<float>>>& rows,
                                    std::uint32_t dim, const char* magic = "EMB1") {
  std::vector<std::uint8_t> out(magic, magic + 4);
  put_u32(out, declared);
  put_u32(out, dim);
  for (const auto& [id, v] : rows) {
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.insert(out.end(), id.begin(), id.end());
    for (float f : v) put_f32(out, f);
  }
  return out;
}

EmbeddingErrorKind kind_of(const std::vector<std::uint8_t>& bytes) {
  try {
    read_embeddings(bytes);
  } catch (const EmbeddingFormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected EmbeddingFormatError";
  return EmbeddingErrorKind::kIo;
}

}  // namespace

TEST(Emb1, ParsesHandFile) {
  const auto m = read_embeddings(hand_file(2, {{"a", {1, 2, 3}}, {"b", {4, 5, 6}}}, 3));
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.dim(), 3u);
  EXPECT_EQ(m.at("b"), (Vector{4, 5, 6}));
}

TEST(Emb1, DistinctErrors) {
  EXPECT_EQ(kind_of(hand_file(1, {{"a", {1}}}, 1, "XXXX")), EmbeddingErrorKind::kBadMagic);
  EXPECT_EQ(kind_of(hand_file(5, {{"a", {1}}, {"b", {2}}, {"c", {3}}}, 1)), EmbeddingErrorKind::kTruncated);
  EXPECT_EQ(kind_of(hand_file(1, {{"a", {std::nanf("")}}}, 1)), EmbeddingErrorKind::kNonFinite);
  EXPECT_EQ(kind_of(hand_file(2, {{"a", {1}}, {"a", {2}}}, 1)), EmbeddingErrorKind::kDuplicateId);
}

TEST(Emb1, EncoderMatchesHandLayout) {
  EmbeddingMatrix m(2);
  m.add("x", {0.5, -1.25});
  m.add("yy", {3.0, 0.0});
  EXPECT_EQ(encode_embeddings(m), hand_file(2, {{"x", {0.5f, -1.25f}}, {"yy", {3.0f, 0.0f}}}, 2));
}

TEST(Emb1, FileRoundTrip) {
  EmbeddingMatrix m(4);
  for (int i = 0; i < 10; ++i) m.add("app" + std::to_string(i), {0.25 * i, -1.0, 2.0, 0.125});
  const auto path = std::filesystem::temp_directory_path() / "apptopic_emb_roundtrip.bin";
  write_embeddings(m, path);
  EXPECT_EQ(load_embeddings(path), m);
  std::filesystem::remove(path);
}

TEST(FallbackEmbed, Deterministic) {
  const TokenizedDoc d{"a", {"pizza", "order", "delivery"}};
  EXPECT_EQ(fallback_embed(d, 64, 7), fallback_embed(d, 64, 7));
}

TEST(FallbackEmbed, EmptyDocIsZero) {
  const auto v = fallback_embed({"a", {}}, 32, 1);
  for (double x : v) EXPECT_EQ(x, 0.0);
}

TEST(FallbackEmbed, UnitNormAndOrderInvariant) {
  const TokenizedDoc a{"a", {"stream", "music", "offline", "music"}};
  const TokenizedDoc b{"b", {"music", "offline", "music", "stream"}};
  const auto va = fallback_embed(a, 100, 3);
  double norm = 0.0;
  for (double x : va) norm += x * x;
  EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
  EXPECT_EQ(va, fallback_embed(b, 100, 3));
}

TEST(FallbackEmbed, SeedChangesVectors) {
  const TokenizedDoc d{"a", {"weather", "forecast", "radar"}};
  EXPECT_NE(fallback_embed(d, 64, 1), fallback_embed(d, 64, 2));
}

TEST(FallbackEmbed, RejectsSmallDim) { EXPECT_THROW(fallback_embed({"a", {"x"}}, 4, 0), UsageError); }

TEST(FallbackEmbed, WithinThemeCosineExceedsCrossTheme) {
  SyntheticConfig cfg;
  cfg.themes = 2;
  cfg.train_per_theme = 20;
  cfg.theme_word_share = 1.0;
  const auto corpus = make_synthetic_corpus(cfg);
  const auto m = fallback_embed_records(corpus.train.records, 64, 7, default_stopwords());
  double within = 0.0, cross = 0.0;
  std::size_t nw = 0, nc = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = i + 1; j < 40; ++j) {
      const double c = cosine_similarity(m.at(m.ids()[i]), m.at(m.ids()[j]));
      if (corpus.train_themes[i] == corpus.train_themes[j]) {
        within += c;
        ++nw;
      } else {
        cross += c;
        ++nc;
      }
    }
  }
  EXPECT_GT(within / nw, cross / nc);
}

TEST(Cosine, ClosedForms) {
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector{1, 0}, Vector{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector{1, 0}, Vector{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(Vector{1, 1}, Vector{1, 0}), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(cosine_similarity(Vector{0, 0}, Vector{1, 0}), 0.0);
  EXPECT_THROW(cosine_similarity(Vector{1}, Vector{1, 0}), std::invalid_argument);
}

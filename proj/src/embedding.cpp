#include "apptopic/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include <fmt/format.h>

namespace apptopic {
namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (!has(n)) {
      throw EmbeddingFormatError(EmbeddingErrorKind::kTruncated,
                                 fmt::format("embedding file truncated while reading {} at byte {}", what, pos_));
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffU));
}

}  // namespace

void EmbeddingMatrix::add(std::string app_id, Vector values) {
  if (values.size() != dim_) {
    throw EmbeddingFormatError(EmbeddingErrorKind::kTruncated,
                               fmt::format("vector for '{}' has length {}, expected {}", app_id, values.size(), dim_));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw EmbeddingFormatError(EmbeddingErrorKind::kNonFinite, fmt::format("non-finite value in vector for '{}'", app_id));
    }
  }
  if (index_.contains(app_id)) {
    throw EmbeddingFormatError(EmbeddingErrorKind::kDuplicateId, fmt::format("duplicate embedding id '{}'", app_id));
  }
  index_.emplace(app_id, ids_.size());
  ids_.push_back(std::move(app_id));
  vectors_.push_back(std::move(values));
}

const Vector& EmbeddingMatrix::at(std::string_view app_id) const {
  auto it = index_.find(app_id);
  if (it == index_.end()) throw DataError(fmt::format("no embedding for app '{}'", app_id));
  return vectors_[it->second];
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& other) const {
  return dim_ == other.dim_ && ids_ == other.ids_ && vectors_ == other.vectors_;
}

EmbeddingMatrix read_embeddings(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) {
    throw EmbeddingFormatError(EmbeddingErrorKind::kBadMagic, "embedding file does not start with magic 'EMB1'");
  }
  Reader in(bytes.subspan(4));
  const std::uint32_t count = in.u32("count");
  const std::uint32_t dim = in.u32("dim");
  if (dim == 0) throw EmbeddingFormatError(EmbeddingErrorKind::kTruncated, "embedding dim must be at least 1");
  EmbeddingMatrix m(dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint32_t id_len = in.u32("id length");
    std::string id = in.str(id_len, "app id");
    Vector v(dim);
    for (std::uint32_t j = 0; j < dim; ++j) v[j] = static_cast<double>(in.f32("vector"));
    m.add(std::move(id), std::move(v));
  }
  return m;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingFormatError(EmbeddingErrorKind::kIo, fmt::format("cannot open embedding file '{}'", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_embeddings(bytes);
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix) {
  std::vector<std::uint8_t> out(kEmbeddingMagic, kEmbeddingMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(matrix.size()));
  put_u32(out, static_cast<std::uint32_t>(matrix.dim()));
  for (const auto& id : matrix.ids()) {
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.insert(out.end(), id.begin(), id.end());
    for (double v : matrix.at(id)) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  const auto bytes = encode_embeddings(matrix);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EmbeddingFormatError(EmbeddingErrorKind::kIo, fmt::format("cannot write embedding file '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Vector fallback_embed(const TokenizedDoc& doc, std::size_t dim, std::uint64_t seed) {
  if (dim < kMinFallbackDim) throw UsageError(fmt::format("fallback embedding dim must be >= {}", kMinFallbackDim));
  Vector out(dim, 0.0);
  if (doc.tokens.empty()) return out;

  std::map<std::string_view, int> counts;
  for (const auto& t : doc.tokens) ++counts[t];

  const std::uint64_t seed_mix = mix64(seed ^ 0x5bd1e995ULL);
  for (const auto& [token, count] : counts) {
    const std::uint64_t token_hash = fnv1a(token) ^ seed_mix;
    // One 64-bit draw supplies signs for 64 coordinates.
    for (std::size_t block = 0; block * 64 < dim; ++block) {
      const std::uint64_t signs = mix64(token_hash + mix64(block + 1));
      const std::size_t end = std::min(dim, (block + 1) * 64);
      for (std::size_t j = block * 64; j < end; ++j) {
        out[j] += ((signs >> (j - block * 64)) & 1U) ? count : -count;
      }
    }
  }
  double norm = 0.0;
  for (double v : out) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& v : out) v /= norm;
  }
  return out;
}

EmbeddingMatrix fallback_embed_records(const std::vector<AppRecord>& records, std::size_t dim, std::uint64_t seed,
                                       const StopwordSet& stopwords) {
  EmbeddingMatrix out(dim);
  for (const auto& r : records) out.add(r.app_id, fallback_embed(tokenize_record(r, stopwords), dim, seed));
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(fmt::format("cosine_similarity: length mismatch ({} vs {})", a.size(), b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string embedding_content_hash(const EmbeddingMatrix& matrix, const std::vector<std::string>& ids) {
  Fnv1a h;
  h.update_u64(matrix.dim());
  for (const auto& id : ids) {
    h.update(id);
    h.update_u64(id.size());
    // Hash the float32 form so a reloaded file hashes like the original.
    for (double v : matrix.at(id)) h.update_u64(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return h.hex();
}

}  // namespace apptopic

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apptopic/corpus.hpp"
#include "apptopic/errors.hpp"
#include "apptopic/util.hpp"

namespace apptopic {

inline constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', '1'};

enum class EmbeddingErrorKind { kBadMagic, kTruncated, kNonFinite, kDuplicateId, kIo };

class EmbeddingFormatError : public DataError {
 public:
  EmbeddingFormatError(EmbeddingErrorKind kind, const std::string& what) : DataError(what), kind_(kind) {}
  EmbeddingErrorKind kind() const { return kind_; }

 private:
  EmbeddingErrorKind kind_;
};

// Dense document vectors keyed by app id; file order is kept in ids().
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dim = 1) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  // Throws EmbeddingFormatError on a duplicate id, wrong length or non-finite value.
  void add(std::string app_id, Vector values);
  bool contains(std::string_view app_id) const { return index_.find(app_id) != index_.end(); }
  // Throws DataError naming the id when absent.
  const Vector& at(std::string_view app_id) const;

  bool operator==(const EmbeddingMatrix& other) const;

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<Vector> vectors_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Binary layout: "EMB1" | count u32 LE | dim u32 LE | count x (id_len u32 LE |
// id bytes | dim x float32 LE).
EmbeddingMatrix read_embeddings(std::span<const std::uint8_t> bytes);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix);
void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);

// Hashed random-projection bag-of-words embedder. Each (token, coordinate) pair
// hashes to a +-1 entry of an implicit projection matrix; the projected count
// vector is L2-normalised. Empty documents map to the zero vector.
Vector fallback_embed(const TokenizedDoc& doc, std::size_t dim, std::uint64_t seed);

inline constexpr std::size_t kMinFallbackDim = 8;

// Fallback vectors for every record, in record order, from tokenized descriptions.
EmbeddingMatrix fallback_embed_records(const std::vector<AppRecord>& records, std::size_t dim, std::uint64_t seed,
                                       const StopwordSet& stopwords);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Order-sensitive content hash of the listed ids and their vectors.
std::string embedding_content_hash(const EmbeddingMatrix& matrix, const std::vector<std::string>& ids);

}  // namespace apptopic

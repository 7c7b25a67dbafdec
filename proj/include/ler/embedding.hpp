#ifndef LER_EMBEDDING_HPP
#define LER_EMBEDDING_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ler::skills {

using Embedding = std::vector<double>;

/// Text -> unit-length vector of fixed dimension.
class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const noexcept = 0;
  /// Stable identifier, folded into the pipeline policy digest.
  virtual std::string id() const = 0;
  virtual Embedding embed(std::string_view text) const = 0;
};

double dot(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const double> a, std::span<const double> b);
/// In place; throws Error(InvalidArgument) for a zero vector.
void l2_normalize(Embedding& v);

/// Lowercased word tokens with stop words removed; '+', '#' stay inside tokens (c++, c#).
std::vector<std::string> tokenize(std::string_view text);

/// Deterministic reference backend: signed feature hashing of word unigrams and
/// bigrams into `dimension` buckets, then L2 normalization.
class HashingEmbedding final : public EmbeddingProvider {
public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashingEmbedding(std::size_t dimension = kDefaultDimension);

  std::size_t dimension() const noexcept override { return dimension_; }
  std::string id() const override;
  /// Throws Error(NoEvidence) for text without any token.
  Embedding embed(std::string_view text) const override;

private:
  std::size_t dimension_;
};

/// Client for an external embedding service:
///   POST <path> {"text": "..."}  ->  {"embedding": [...]}
/// Any transport or format failure raises Error(ProviderUnavailable).
class RemoteEmbedding final : public EmbeddingProvider {
public:
  RemoteEmbedding(std::string host, int port, std::size_t dimension, std::string path = "/embed",
                  int timeout_seconds = 10);

  std::size_t dimension() const noexcept override { return dimension_; }
  std::string id() const override;
  Embedding embed(std::string_view text) const override;

private:
  std::string host_;
  int port_;
  std::size_t dimension_;
  std::string path_;
  int timeout_seconds_;
};

} // namespace ler::skills

#endif // LER_EMBEDDING_HPP

#include "ler/crypto.hpp"
#include "ler/embedding.hpp"
#include "ler/error.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <set>

namespace ler::skills {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::InvalidArgument, "embedding dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) throw Error(Errc::InvalidArgument, "cosine of a zero vector");
  return dot(a, b) / (na * nb);
}

void l2_normalize(Embedding& v) {
  const double n = std::sqrt(dot(v, v));
  if (n == 0.0) throw Error(Errc::InvalidArgument, "cannot normalize a zero vector");
  for (auto& x : v) x /= n;
}

namespace {

const std::set<std::string, std::less<>>& stop_words() {
  static const std::set<std::string, std::less<>> words{
      "a",    "an",   "and",  "are",  "as",   "at",   "be",    "by",   "for",  "from", "in",
      "into", "is",   "it",   "its",  "of",   "on",   "or",    "that", "the",  "their", "this",
      "to",   "was",  "were", "will", "with", "they", "these", "those", "such", "using"};
  return words;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

constexpr std::array<std::uint8_t, 16> kFeatureKey{'l', 'e', 'r', '-', 'f', 'e', 'a', 't',
                                                   'u', 'r', 'e', '-', 'h', 'a', 's', 'h'};

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stop_words().contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if ((c == '+' || c == '#') && !current.empty()) {
      current.push_back(ch);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

HashingEmbedding::HashingEmbedding(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(Errc::InvalidArgument, "embedding dimension must be positive");
}

std::string HashingEmbedding::id() const { return "hashing-v1-d" + std::to_string(dimension_); }

Embedding HashingEmbedding::embed(std::string_view text) const {
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw Error(Errc::NoEvidence, "text has no tokens");
  Embedding v(dimension_, 0.0);
  auto add = [&](const std::string& feature) {
    const std::uint64_t h = short_hash(feature, kFeatureKey);
    const double sign = ((h >> 63) & 1U) ? -1.0 : 1.0;
    v[h % dimension_] += sign;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add("u:" + tokens[i]);
    if (i + 1 < tokens.size()) add("b:" + tokens[i] + " " + tokens[i + 1]);
  }
  // Every feature cancelled out against another: fall back to the unigram of the first token.
  bool all_zero = true;
  for (double x : v) all_zero = all_zero && x == 0.0;
  if (all_zero) add("u:" + tokens.front());
  l2_normalize(v);
  return v;
}

} // namespace ler::skills

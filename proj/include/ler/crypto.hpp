#ifndef LER_CRYPTO_HPP
#define LER_CRYPTO_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ler {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kSaltSize = 16;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kSecretKeySize = 64;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::string_view kSignatureAlgorithm = "Ed25519";

Bytes to_bytes(std::string_view text);
Bytes to_bytes(const Digest& digest);
std::string to_hex(std::span<const std::uint8_t> data);
/// Throws Error(ParseError) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);
Digest digest_from_hex(std::string_view hex);

std::string base64url_encode(std::span<const std::uint8_t> data);
Bytes base64url_decode(std::string_view text);

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

/// Append-only byte builder for the `a || b || c` concatenations fed to hashes and signatures.
class ByteWriter {
public:
  ByteWriter& put(std::string_view text);
  ByteWriter& put(std::span<const std::uint8_t> data);
  ByteWriter& put(const Digest& digest) { return put(std::span<const std::uint8_t>(digest)); }
  /// 8-byte big-endian two's complement.
  ByteWriter& put_i64(std::int64_t value);

  const Bytes& bytes() const noexcept { return buffer_; }
  Bytes take() && { return std::move(buffer_); }

private:
  Bytes buffer_;
};

/// Source of random octets. Swappable so tests can pin salts and ids.
class RandomSource {
public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Bytes bytes(std::size_t n);
  std::string hex_id(std::size_t n_bytes = 16);
};

class SystemRandom final : public RandomSource {
public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible stream: block i = ChaCha20 keystream seeded by SHA-256(seed || i).
class DeterministicRandom final : public RandomSource {
public:
  explicit DeterministicRandom(std::string_view seed);
  void fill(std::span<std::uint8_t> out) override;

private:
  Digest seed_;
  std::uint64_t counter_ = 0;
};

std::shared_ptr<RandomSource> system_random();

namespace ed25519 {

struct RawKeyPair {
  Bytes public_key;
  Bytes secret_key;
};

RawKeyPair generate();
RawKeyPair from_seed(std::span<const std::uint8_t> seed32);
/// Rejects wrong lengths, small-order points and non-canonical encodings.
bool is_valid_public_key(std::span<const std::uint8_t> public_key) noexcept;
Bytes sign(std::span<const std::uint8_t> secret_key, std::span<const std::uint8_t> message);
bool verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
            std::span<const std::uint8_t> signature) noexcept;

} // namespace ed25519

namespace secretbox {

inline constexpr std::size_t kKeySize = 32;

Bytes seal(std::span<const std::uint8_t> key, std::span<const std::uint8_t> plaintext,
           RandomSource& rng);
/// Throws Error(UnsealFailed) when authentication fails.
Bytes open(std::span<const std::uint8_t> key, std::span<const std::uint8_t> sealed);

} // namespace secretbox

/// Keyed 64-bit SipHash-2-4, used for feature hashing.
std::uint64_t short_hash(std::string_view data, const std::array<std::uint8_t, 16>& key);

} // namespace ler

#endif // LER_CRYPTO_HPP

#include "ler/crypto.hpp"

#include "ler/error.hpp"

#include <sodium.h>

namespace ler {

namespace {

struct SodiumInit {
  SodiumInit() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  }
};

void ensure_sodium() {
  static const SodiumInit init;
  (void)init;
}

} // namespace

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

Bytes to_bytes(const Digest& digest) { return Bytes(digest.begin(), digest.end()); }

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::ParseError, "hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::ParseError, "invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  Bytes raw = from_hex(hex);
  if (raw.size() != 32) throw Error(Errc::ParseError, "digest must be 32 octets");
  Digest d{};
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

std::string base64url_encode(std::span<const std::uint8_t> data) {
  ensure_sodium();
  constexpr int variant = sodium_base64_VARIANT_URLSAFE_NO_PADDING;
  std::string out(sodium_base64_ENCODED_LEN(data.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), data.data(), data.size(), variant);
  out.resize(std::char_traits<char>::length(out.c_str()));
  return out;
}

Bytes base64url_decode(std::string_view text) {
  ensure_sodium();
  Bytes out(text.size());
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                        sodium_base64_VARIANT_URLSAFE_NO_PADDING) != 0 ||
      end != text.data() + text.size()) {
    throw Error(Errc::ParseError, "invalid base64url text");
  }
  out.resize(len);
  return out;
}

Digest sha256(std::span<const std::uint8_t> data) {
  ensure_sodium();
  Digest d{};
  crypto_hash_sha256(d.data(), data.data(), data.size());
  return d;
}

Digest sha256(std::string_view data) {
  return sha256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(data.data()),
                                              data.size()));
}

ByteWriter& ByteWriter::put(std::string_view text) {
  buffer_.insert(buffer_.end(), text.begin(), text.end());
  return *this;
}

ByteWriter& ByteWriter::put(std::span<const std::uint8_t> data) {
  buffer_.insert(buffer_.end(), data.begin(), data.end());
  return *this;
}

ByteWriter& ByteWriter::put_i64(std::int64_t value) {
  auto u = static_cast<std::uint64_t>(value);
  for (int shift = 56; shift >= 0; shift -= 8) buffer_.push_back(static_cast<std::uint8_t>(u >> shift));
  return *this;
}

Bytes RandomSource::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::string RandomSource::hex_id(std::size_t n_bytes) { return to_hex(bytes(n_bytes)); }

void SystemRandom::fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  randombytes_buf(out.data(), out.size());
}

DeterministicRandom::DeterministicRandom(std::string_view seed) : seed_(sha256(seed)) {}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  Digest block_seed = sha256(ByteWriter().put(seed_).put_i64(static_cast<std::int64_t>(counter_++)).bytes());
  randombytes_buf_deterministic(out.data(), out.size(), block_seed.data());
}

std::shared_ptr<RandomSource> system_random() {
  static auto instance = std::make_shared<SystemRandom>();
  return instance;
}

namespace ed25519 {

RawKeyPair generate() {
  ensure_sodium();
  RawKeyPair kp{Bytes(crypto_sign_PUBLICKEYBYTES), Bytes(crypto_sign_SECRETKEYBYTES)};
  crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
  return kp;
}

RawKeyPair from_seed(std::span<const std::uint8_t> seed32) {
  ensure_sodium();
  if (seed32.size() != crypto_sign_SEEDBYTES) throw Error(Errc::InvalidKey, "seed must be 32 octets");
  RawKeyPair kp{Bytes(crypto_sign_PUBLICKEYBYTES), Bytes(crypto_sign_SECRETKEYBYTES)};
  crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed32.data());
  return kp;
}

bool is_valid_public_key(std::span<const std::uint8_t> public_key) noexcept {
  ensure_sodium();
  return public_key.size() == crypto_sign_PUBLICKEYBYTES &&
         crypto_core_ed25519_is_valid_point(public_key.data()) == 1;
}

Bytes sign(std::span<const std::uint8_t> secret_key, std::span<const std::uint8_t> message) {
  ensure_sodium();
  if (secret_key.size() != crypto_sign_SECRETKEYBYTES) {
    throw Error(Errc::SigningError, "secret key must be 64 octets");
  }
  Bytes sig(crypto_sign_BYTES);
  if (crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_key.data()) != 0) {
    throw Error(Errc::SigningError, "crypto_sign_detached failed");
  }
  return sig;
}

bool verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
            std::span<const std::uint8_t> signature) noexcept {
  ensure_sodium();
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), public_key.data()) == 0;
}

} // namespace ed25519

namespace secretbox {

Bytes seal(std::span<const std::uint8_t> key, std::span<const std::uint8_t> plaintext, RandomSource& rng) {
  ensure_sodium();
  if (key.size() != crypto_secretbox_KEYBYTES) throw Error(Errc::InvalidArgument, "sealing key must be 32 octets");
  Bytes out(crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES + plaintext.size());
  rng.fill(std::span(out.data(), crypto_secretbox_NONCEBYTES));
  crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(), plaintext.size(),
                        out.data(), key.data());
  return out;
}

Bytes open(std::span<const std::uint8_t> key, std::span<const std::uint8_t> sealed) {
  ensure_sodium();
  if (key.size() != crypto_secretbox_KEYBYTES) throw Error(Errc::InvalidArgument, "sealing key must be 32 octets");
  if (sealed.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES) {
    throw Error(Errc::UnsealFailed, "sealed blob too short");
  }
  Bytes out(sealed.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES);
  if (crypto_secretbox_open_easy(out.data(), sealed.data() + crypto_secretbox_NONCEBYTES,
                                 sealed.size() - crypto_secretbox_NONCEBYTES, sealed.data(),
                                 key.data()) != 0) {
    throw Error(Errc::UnsealFailed, "authentication failed");
  }
  return out;
}

} // namespace secretbox

std::uint64_t short_hash(std::string_view data, const std::array<std::uint8_t, 16>& key) {
  ensure_sodium();
  static_assert(crypto_shorthash_BYTES == 8 && crypto_shorthash_KEYBYTES == 16);
  std::array<std::uint8_t, 8> out{};
  crypto_shorthash(out.data(), reinterpret_cast<const unsigned char*>(data.data()), data.size(), key.data());
  std::uint64_t h = 0;
  for (int i = 7; i >= 0; --i) h = (h << 8) | out[static_cast<std::size_t>(i)];
  return h;
}

} // namespace ler

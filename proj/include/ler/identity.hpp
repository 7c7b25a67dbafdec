#ifndef LER_IDENTITY_HPP
#define LER_IDENTITY_HPP

#include "ler/canonical.hpp"
#include "ler/crypto.hpp"

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace ler::identity {

/// Signing key material. Immutable after creation.
struct KeyPair {
  Bytes public_key;
  Bytes private_key;
  std::string algorithm_id{kSignatureAlgorithm};

  static KeyPair generate();
  static KeyPair from_seed(std::span<const std::uint8_t> seed32);

  Bytes sign(std::span<const std::uint8_t> message) const;
  Bytes sign(std::string_view message) const;

  /// Includes the private key. Use public_json() for anything leaving the owner.
  Json to_json() const;
  Json public_json() const;
  static KeyPair from_json(const Json& j);
};

bool verify_signature(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature,
                      std::string_view algorithm_id = kSignatureAlgorithm) noexcept;

/// `did:<method>:<identifier>`; the identifier is base64url(SHA-256(public key)).
struct Did {
  std::string method;
  std::string identifier;

  std::string str() const;
  /// Throws Error(ParseError) for anything but `did:<lowercase alnum>:<43 base64url chars>`.
  static Did parse(std::string_view text);

  auto operator<=>(const Did&) const = default;
  bool operator==(const Did&) const = default;
};

struct VerificationMethod {
  std::string key_id;
  Bytes public_key;
  std::string algorithm{kSignatureAlgorithm};

  bool operator==(const VerificationMethod&) const = default;
};

struct ServiceEndpoint {
  std::string name;
  std::string locator;

  bool operator==(const ServiceEndpoint&) const = default;
};

/// Opaque "meta" carried with the document.
using Metadata = std::map<std::string, std::string>;

struct DidDocument {
  Did did;
  std::vector<VerificationMethod> verification_methods;
  std::vector<ServiceEndpoint> service_endpoints;
  Metadata metadata;
  std::uint64_t version = 1;

  const VerificationMethod* find_method(std::string_view key_id) const noexcept;
  const VerificationMethod* find_key(std::span<const std::uint8_t> public_key) const noexcept;

  /// Throws Error(InvalidArgument) when there is no verification method or key ids repeat.
  void validate() const;

  Json to_json() const;
  static DidDocument from_json(const Json& j);

  bool operator==(const DidDocument&) const = default;
};

struct GeneratedDid {
  Did did;
  DidDocument document;
};

inline constexpr std::string_view kDefaultMethod = "ler";

std::string did_identifier(std::span<const std::uint8_t> public_key);

/// Pure in (public_key, method, metadata). Throws Error(InvalidKey).
GeneratedDid gen_did(std::span<const std::uint8_t> public_key, std::string_view method = kDefaultMethod,
                     const Metadata& metadata = {});

/// Signature over the challenge. Throws Error(InvalidArgument) for an empty challenge.
Bytes prove_control(const KeyPair& keys, std::span<const std::uint8_t> challenge);

/// True when `signature` verifies under any of the document's verification methods.
bool verify_control(const DidDocument& doc, std::span<const std::uint8_t> challenge,
                    std::span<const std::uint8_t> signature) noexcept;

/// New document version whose only verification method is `new_public_key`.
DidDocument rotate_key(const DidDocument& doc, std::span<const std::uint8_t> new_public_key);

/// Document store standing in for DID resolution. With a directory, each
/// document is persisted canonically as <dir>/<method>/<identifier>.json.
/// Concurrent reads, serialized writes.
class DidRegistry {
public:
  DidRegistry() = default;
  explicit DidRegistry(std::filesystem::path directory);

  /// Throws Error(InvalidArgument) if the DID is already registered.
  void register_document(const DidDocument& doc);
  /// Requires doc.version greater than the stored one (Error(StaleVersion)).
  void update_document(const DidDocument& doc);
  /// Throws Error(NotFound).
  DidDocument resolve(const Did& did) const;
  bool contains(const Did& did) const;
  std::vector<Did> list() const;

private:
  std::optional<DidDocument> load(const Did& did) const;
  void store(const DidDocument& doc);
  std::filesystem::path path_for(const Did& did) const;

  std::optional<std::filesystem::path> directory_;
  std::map<std::string, DidDocument> documents_;
  mutable std::shared_mutex mutex_;
};

} // namespace ler::identity

#endif // LER_IDENTITY_HPP

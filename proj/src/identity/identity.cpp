#include "ler/identity.hpp"

#include "ler/error.hpp"

#include <algorithm>
#include <set>

namespace ler::identity {

KeyPair KeyPair::generate() {
  auto raw = ed25519::generate();
  return KeyPair{std::move(raw.public_key), std::move(raw.secret_key)};
}

KeyPair KeyPair::from_seed(std::span<const std::uint8_t> seed32) {
  auto raw = ed25519::from_seed(seed32);
  return KeyPair{std::move(raw.public_key), std::move(raw.secret_key)};
}

Bytes KeyPair::sign(std::span<const std::uint8_t> message) const {
  if (algorithm_id != kSignatureAlgorithm) throw Error(Errc::SigningError, "unsupported algorithm " + algorithm_id);
  return ed25519::sign(private_key, message);
}

Bytes KeyPair::sign(std::string_view message) const { return sign(to_bytes(message)); }

Json KeyPair::to_json() const {
  Json j = public_json();
  j["private_key"] = to_hex(private_key);
  return j;
}

Json KeyPair::public_json() const {
  return Json{{"algorithm_id", algorithm_id}, {"public_key", to_hex(public_key)}};
}

KeyPair KeyPair::from_json(const Json& j) {
  KeyPair kp{require_hex(j, "public_key"), require_hex(j, "private_key"), require_string(j, "algorithm_id")};
  if (kp.algorithm_id != kSignatureAlgorithm || !ed25519::is_valid_public_key(kp.public_key) ||
      kp.private_key.size() != kSecretKeySize) {
    throw Error(Errc::InvalidKey, "malformed key pair");
  }
  return kp;
}

bool verify_signature(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature, std::string_view algorithm_id) noexcept {
  if (algorithm_id != kSignatureAlgorithm) return false;
  return ed25519::verify(public_key, message, signature);
}

std::string Did::str() const { return "did:" + method + ":" + identifier; }

namespace {

bool valid_method(std::string_view method) {
  return !method.empty() && std::all_of(method.begin(), method.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
  });
}

} // namespace

Did Did::parse(std::string_view text) {
  constexpr std::string_view prefix = "did:";
  if (!text.starts_with(prefix)) throw Error(Errc::ParseError, "DID must start with 'did:'");
  text.remove_prefix(prefix.size());
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(Errc::ParseError, "DID lacks method separator");
  Did did{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
  if (!valid_method(did.method)) throw Error(Errc::ParseError, "invalid DID method");
  if (base64url_decode(did.identifier).size() != 32) throw Error(Errc::ParseError, "DID identifier is not a 32-octet digest");
  return did;
}

const VerificationMethod* DidDocument::find_method(std::string_view key_id) const noexcept {
  for (const auto& m : verification_methods)
    if (m.key_id == key_id) return &m;
  return nullptr;
}

const VerificationMethod* DidDocument::find_key(std::span<const std::uint8_t> public_key) const noexcept {
  for (const auto& m : verification_methods)
    if (std::ranges::equal(m.public_key, public_key)) return &m;
  return nullptr;
}

void DidDocument::validate() const {
  if (verification_methods.empty()) throw Error(Errc::InvalidArgument, "DID document has no verification method");
  std::set<std::string> ids;
  for (const auto& m : verification_methods) {
    if (!ids.insert(m.key_id).second) throw Error(Errc::InvalidArgument, "duplicate key id " + m.key_id);
  }
}

Json DidDocument::to_json() const {
  Json methods = Json::array();
  for (const auto& m : verification_methods) {
    methods.push_back({{"algorithm", m.algorithm}, {"key_id", m.key_id}, {"public_key", to_hex(m.public_key)}});
  }
  Json services = Json::array();
  for (const auto& s : service_endpoints) services.push_back({{"locator", s.locator}, {"name", s.name}});
  return Json{{"did", did.str()},
              {"metadata", metadata},
              {"service_endpoints", services},
              {"verification_methods", methods},
              {"version", version}};
}

DidDocument DidDocument::from_json(const Json& j) {
  DidDocument doc;
  doc.did = Did::parse(require_string(j, "did"));
  for (const auto& m : require(j, "verification_methods")) {
    doc.verification_methods.push_back(
        {require_string(m, "key_id"), require_hex(m, "public_key"), require_string(m, "algorithm")});
  }
  for (const auto& s : require(j, "service_endpoints")) {
    doc.service_endpoints.push_back({require_string(s, "name"), require_string(s, "locator")});
  }
  for (const auto& [k, v] : require(j, "metadata").items()) {
    if (!v.is_string()) throw Error(Errc::ParseError, "metadata values must be strings");
    doc.metadata[k] = v.get<std::string>();
  }
  doc.version = static_cast<std::uint64_t>(require_int(j, "version"));
  doc.validate();
  return doc;
}

std::string did_identifier(std::span<const std::uint8_t> public_key) {
  return base64url_encode(sha256(public_key));
}

GeneratedDid gen_did(std::span<const std::uint8_t> public_key, std::string_view method, const Metadata& metadata) {
  if (!ed25519::is_valid_public_key(public_key)) throw Error(Errc::InvalidKey, "not an Ed25519 public key");
  if (!valid_method(method)) throw Error(Errc::InvalidArgument, "invalid DID method");
  Did did{std::string(method), did_identifier(public_key)};
  DidDocument doc;
  doc.did = did;
  doc.verification_methods.push_back({did.str() + "#key-1", Bytes(public_key.begin(), public_key.end()),
                                      std::string(kSignatureAlgorithm)});
  doc.metadata = metadata;
  return {did, doc};
}

Bytes prove_control(const KeyPair& keys, std::span<const std::uint8_t> challenge) {
  if (challenge.empty()) throw Error(Errc::InvalidArgument, "challenge must be nonempty");
  return keys.sign(challenge);
}

bool verify_control(const DidDocument& doc, std::span<const std::uint8_t> challenge,
                    std::span<const std::uint8_t> signature) noexcept {
  return std::ranges::any_of(doc.verification_methods, [&](const VerificationMethod& m) {
    return verify_signature(m.public_key, challenge, signature, m.algorithm);
  });
}

DidDocument rotate_key(const DidDocument& doc, std::span<const std::uint8_t> new_public_key) {
  if (!ed25519::is_valid_public_key(new_public_key)) throw Error(Errc::InvalidKey, "not an Ed25519 public key");
  DidDocument next = doc;
  next.version = doc.version + 1;
  next.verification_methods = {{doc.did.str() + "#key-" + std::to_string(next.version),
                                Bytes(new_public_key.begin(), new_public_key.end()),
                                std::string(kSignatureAlgorithm)}};
  return next;
}

} // namespace ler::identity

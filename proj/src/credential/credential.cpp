#include "ler/credential.hpp"
#include "ler/error.hpp"

#include <algorithm>
#include <set>

namespace ler::credential {

std::string_view to_string(CredentialClass c) noexcept {
  switch (c) {
  case CredentialClass::Institutional: return "institutional";
  case CredentialClass::SelfIssued: return "self_issued";
  case CredentialClass::Derivative: return "derivative";
  }
  return "?";
}

CredentialClass credential_class_from_string(std::string_view text) {
  for (auto c : {CredentialClass::Institutional, CredentialClass::SelfIssued, CredentialClass::Derivative}) {
    if (to_string(c) == text) return c;
  }
  throw Error(Errc::ParseError, "unknown credential class '" + std::string(text) + "'");
}

Json VerifiableCredential::signed_fields() const {
  Json digests = Json::array();
  for (const auto& d : claim_digests) digests.push_back(to_hex(d));
  Json j{{"claim_digests", digests},
         {"credential_class", to_string(credential_class)},
         {"id", id},
         {"issued_at", issued_at},
         {"issuer_did", issuer_did.str()},
         {"issuer_key_id", issuer_key_id},
         {"status_ref", {{"index", status_ref.index}, {"locator", status_ref.locator}}},
         {"subject_did", subject_did.str()}};
  if (expires_at) j["expires_at"] = *expires_at;
  if (provenance) j["provenance"] = provenance->to_json();
  return j;
}

Json VerifiableCredential::to_json() const {
  Json j = signed_fields();
  Json cs = Json::array();
  for (const auto& c : claims) cs.push_back(c.to_json());
  j["claims"] = cs;
  j["signature"] = to_hex(signature);
  return j;
}

VerifiableCredential VerifiableCredential::from_json(const Json& j) {
  VerifiableCredential vc;
  vc.id = require_string(j, "id");
  vc.credential_class = credential_class_from_string(require_string(j, "credential_class"));
  vc.issuer_did = Did::parse(require_string(j, "issuer_did"));
  vc.issuer_key_id = require_string(j, "issuer_key_id");
  vc.subject_did = Did::parse(require_string(j, "subject_did"));
  for (const auto& c : require(j, "claims")) vc.claims.push_back(Claim::from_json(c));
  for (const auto& d : require(j, "claim_digests")) {
    if (!d.is_string()) throw Error(Errc::ParseError, "claim digests must be hex strings");
    vc.claim_digests.push_back(digest_from_hex(d.get<std::string>()));
  }
  vc.issued_at = require_int(j, "issued_at");
  if (j.contains("expires_at")) vc.expires_at = require_int(j, "expires_at");
  const Json& sr = require(j, "status_ref");
  vc.status_ref = {require_string(sr, "locator"), require_int(sr, "index")};
  if (j.contains("provenance")) vc.provenance = enclave::Provenance::from_json(j.at("provenance"));
  vc.signature = require_hex(j, "signature");
  return vc;
}

VerifiableCredential VerifiableCredential::redacted() const {
  VerifiableCredential copy = *this;
  copy.claims.clear();
  return copy;
}

const Claim* VerifiableCredential::find_claim(std::string_view key) const noexcept {
  for (const auto& c : claims)
    if (c.key == key) return &c;
  return nullptr;
}

VerifiableCredential issue(const KeyPair& issuer_keys, const Did& issuer_did, const Did& subject_did,
                           const std::vector<ClaimInput>& claims, CredentialClass credential_class,
                           std::optional<enclave::Provenance> provenance, std::optional<Seconds> lifetime,
                           const IssueOptions& options) {
  if (credential_class == CredentialClass::Derivative && !provenance) throw Error(Errc::MissingProvenance);
  if (credential_class == CredentialClass::Institutional && provenance) {
    throw Error(Errc::InvalidArgument, "institutional credentials carry no provenance");
  }
  if (claims.empty()) throw Error(Errc::EmptyClaims);
  if (lifetime && *lifetime <= 0) throw Error(Errc::InvalidArgument, "lifetime must be positive");

  RandomSource& rng = options.rng ? *options.rng : *system_random();
  VerifiableCredential vc;
  vc.id = options.id.value_or("urn:ler:vc:" + rng.hex_id());
  vc.credential_class = credential_class;
  vc.issuer_did = issuer_did;
  vc.issuer_key_id = options.key_id.empty() ? issuer_did.str() + "#key-1" : options.key_id;
  vc.subject_did = subject_did;
  vc.issued_at = options.now.value_or(SystemClock().now());
  if (lifetime) vc.expires_at = vc.issued_at + *lifetime;
  vc.status_ref = options.status_ref;
  vc.provenance = std::move(provenance);

  std::set<std::string> keys;
  std::set<Bytes> salts;
  for (const auto& input : claims) {
    if (!keys.insert(input.key).second) throw Error(Errc::InvalidArgument, "duplicate claim key " + input.key);
    Bytes salt;
    do {
      salt = rng.bytes(kSaltSize);
    } while (!salts.insert(salt).second);
    Claim c{input.key, input.value, std::move(salt)};
    vc.claim_digests.push_back(c.digest());
    vc.claims.push_back(std::move(c));
  }
  vc.signature = issuer_keys.sign(canonical_serialize(vc.signed_fields()));
  return vc;
}

bool verify_issuer_signature(const VerifiableCredential& vc, const DidDocument& issuer_doc) noexcept {
  try {
    if (issuer_doc.did != vc.issuer_did) return false;
    if ((vc.credential_class == CredentialClass::Derivative) != vc.provenance.has_value()) return false;
    const auto* method = issuer_doc.find_method(vc.issuer_key_id);
    if (method == nullptr) return false;
    return identity::verify_signature(method->public_key, to_bytes(canonical_serialize(vc.signed_fields())),
                                      vc.signature, method->algorithm);
  } catch (...) {
    return false;
  }
}

bool verify_claim_digests(const VerifiableCredential& vc) noexcept {
  if (vc.claims.size() != vc.claim_digests.size()) return false;
  for (std::size_t i = 0; i < vc.claims.size(); ++i) {
    if (vc.claims[i].salt.size() != kSaltSize || vc.claims[i].digest() != vc.claim_digests[i]) return false;
  }
  return true;
}

} // namespace ler::credential

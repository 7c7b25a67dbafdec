#ifndef LER_CREDENTIAL_HPP
#define LER_CREDENTIAL_HPP

#include "ler/attestation.hpp"
#include "ler/canonical.hpp"
#include "ler/clock.hpp"
#include "ler/crypto.hpp"
#include "ler/identity.hpp"
#include "ler/verdict.hpp"
#include "ler/verifier_policy.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ler::credential {

using identity::Did;
using identity::DidDocument;
using identity::KeyPair;

using ClaimValue = std::variant<std::string, std::int64_t, double>;

Json claim_value_to_json(const ClaimValue& value);
ClaimValue claim_value_from_json(const Json& j);
std::optional<double> numeric_value(const ClaimValue& value) noexcept;

/// SHA-256(salt || json(key) || json(value)).
Digest claim_digest(std::span<const std::uint8_t> salt, std::string_view key, const ClaimValue& value);

struct Claim {
  std::string key;
  ClaimValue value;
  Bytes salt;  ///< 16 octets, unique within the credential

  Digest digest() const { return claim_digest(salt, key, value); }

  Json to_json() const;
  static Claim from_json(const Json& j);

  bool operator==(const Claim&) const = default;
};

enum class CredentialClass { Institutional, SelfIssued, Derivative };

std::string_view to_string(CredentialClass c) noexcept;
CredentialClass credential_class_from_string(std::string_view text);

struct StatusRef {
  std::string locator;
  std::int64_t index = 0;

  bool operator==(const StatusRef&) const = default;
};

struct VerifiableCredential {
  std::string id;
  CredentialClass credential_class = CredentialClass::Institutional;
  Did issuer_did;
  std::string issuer_key_id;
  Did subject_did;
  std::vector<Claim> claims;
  std::vector<Digest> claim_digests;
  Timestamp issued_at = 0;
  std::optional<Timestamp> expires_at;
  StatusRef status_ref;
  std::optional<enclave::Provenance> provenance;
  Bytes signature;

  /// Every field except claims and signature; this is what the issuer signs.
  Json signed_fields() const;
  Json to_json() const;
  static VerifiableCredential from_json(const Json& j);

  /// Same credential with the claim values stripped (digests stay).
  VerifiableCredential redacted() const;
  const Claim* find_claim(std::string_view key) const noexcept;
  bool expired_at(Timestamp now) const noexcept { return expires_at && now > *expires_at; }

  bool operator==(const VerifiableCredential&) const = default;
};

struct ClaimInput {
  std::string key;
  ClaimValue value;
};

struct IssueOptions {
  /// Defaults to "<issuer_did>#key-1".
  std::string key_id;
  StatusRef status_ref;
  std::optional<Timestamp> now;
  std::optional<std::string> id;
  RandomSource* rng = nullptr;
};

/// Throws Error(MissingProvenance), Error(EmptyClaims), Error(InvalidArgument)
/// for duplicate keys or provenance on an institutional credential.
VerifiableCredential issue(const KeyPair& issuer_keys, const Did& issuer_did, const Did& subject_did,
                           const std::vector<ClaimInput>& claims, CredentialClass credential_class,
                           std::optional<enclave::Provenance> provenance = std::nullopt,
                           std::optional<Seconds> lifetime = std::nullopt, const IssueOptions& options = {});

/// Issuer signature under the document's method named by issuer_key_id.
bool verify_issuer_signature(const VerifiableCredential& vc, const DidDocument& issuer_doc) noexcept;
/// Every claim recomputes to its digest at the same index.
bool verify_claim_digests(const VerifiableCredential& vc) noexcept;

// ---------------------------------------------------------------------------
// Disclosure
// ---------------------------------------------------------------------------

enum class Comparator { Lt, Le, Eq, Ne, Ge, Gt };

std::string_view to_string(Comparator c) noexcept;
Comparator comparator_from_string(std::string_view text);

struct Predicate {
  std::string key;
  Comparator op = Comparator::Ge;
  double bound = 0.0;

  bool evaluate(const ClaimValue& value) const;
  Json to_json() const;
  static Predicate from_json(const Json& j);

  auto operator<=>(const Predicate&) const = default;
};

struct PredicateResult {
  Predicate predicate;
  bool result = false;

  bool operator==(const PredicateResult&) const = default;
};

struct DisclosurePolicy {
  std::string policy_id;
  std::set<std::string> allowed_claims;
  std::vector<Predicate> allowed_predicates;
  bool default_deny = true;

  bool allows_claim(std::string_view key) const;
  bool allows_predicate(const Predicate& p) const;

  Json to_json() const;
  static DisclosurePolicy from_json(const Json& j);

  bool operator==(const DisclosurePolicy&) const = default;
};

struct DisclosureRequest {
  std::set<std::string> claims;
  std::vector<Predicate> predicates;

  Json to_json() const;
  static DisclosureRequest from_json(const Json& j);
};

// ---------------------------------------------------------------------------
// Status lists
// ---------------------------------------------------------------------------

enum class ListKind { Institutional, Derivative };
enum class EntryState { Valid, Revoked };
enum class CredentialStatus { Valid, Revoked, RevokedUnknown };

std::string_view to_string(ListKind k) noexcept;
std::string_view to_string(CredentialStatus s) noexcept;

struct StatusList {
  Did owner_did;
  Bytes owner_key;  ///< public key that signs this list
  ListKind list_kind = ListKind::Institutional;
  std::string locator;
  std::map<std::string, EntryState> entries;
  Timestamp issued_at = 0;
  Bytes signature;

  Json signed_fields() const;
  Json to_json() const;
  static StatusList from_json(const Json& j);
  /// Signature verifies under owner_key.
  bool signature_valid() const noexcept;

  bool operator==(const StatusList&) const = default;
};

StatusList create_status_list(const KeyPair& owner_keys, const Did& owner_did, ListKind kind,
                              std::string locator, Timestamp now);

/// Throws Error(BadListSig). Unknown ids read as valid on institutional lists
/// and as revoked-unknown on derivative lists.
CredentialStatus status(const StatusList& list, std::string_view credential_id);
/// Also requires owner_key to be a verification method of owner_doc.
CredentialStatus status(const StatusList& list, const DidDocument& owner_doc, std::string_view credential_id);

/// Adds a valid entry (a revoked entry stays revoked). Throws Error(Unauthorized).
StatusList register_entry(const StatusList& list, std::string_view credential_id, const KeyPair& owner_keys,
                          Timestamp now);
/// Marks revoked, re-signs, refreshes issued_at. Idempotent. Throws Error(Unauthorized).
StatusList revoke(const StatusList& list, std::string_view credential_id, const KeyPair& owner_keys, Timestamp now);

/// Owner-signed status of one credential, stapled to presentations.
struct StatusSnippet {
  Did owner_did;
  Bytes owner_key;
  ListKind list_kind = ListKind::Institutional;
  std::string credential_id;
  CredentialStatus status = CredentialStatus::Valid;
  Timestamp issued_at = 0;
  Bytes signature;

  Json signed_fields() const;
  Json to_json() const;
  static StatusSnippet from_json(const Json& j);
  bool signature_valid() const noexcept;

  bool operator==(const StatusSnippet&) const = default;
};

/// Throws Error(BadListSig) or Error(Unauthorized).
StatusSnippet staple(const StatusList& list, std::string_view credential_id, const KeyPair& owner_keys,
                     Timestamp now);

// ---------------------------------------------------------------------------
// Presentations
// ---------------------------------------------------------------------------

struct VerifiablePresentation {
  VerifiableCredential credential;  ///< redacted: claim values removed
  std::vector<Claim> revealed;
  std::vector<PredicateResult> predicate_results;
  Bytes nonce;
  Timestamp created_at = 0;
  StatusSnippet stapled_status;
  std::optional<enclave::AttestationEvidence> attestation;
  /// Salt of the derivation's input commitment, so H_inputs and H_prov recompute.
  std::optional<Bytes> input_salt;
  std::string holder_key_id;
  Bytes holder_signature;

  Json signed_fields() const;
  Json to_json() const;
  static VerifiablePresentation from_json(const Json& j);

  bool operator==(const VerifiablePresentation&) const = default;
};

struct PresentOptions {
  Timestamp now = 0;
  /// Defaults to "<subject_did>#key-1".
  std::string holder_key_id;
  std::optional<enclave::AttestationEvidence> attestation;
  std::optional<Bytes> input_salt;
};

/// Reveals exactly request ∩ policy. Throws Error(Expired), Error(EmptyDisclosure),
/// Error(PolicyViolation) when default_deny is off and the request exceeds the policy.
VerifiablePresentation present(const VerifiableCredential& credential, const DisclosurePolicy& policy,
                               const DisclosureRequest& requested, const KeyPair& holder_keys,
                               std::span<const std::uint8_t> nonce, const StatusSnippet& status,
                               const PresentOptions& options);

struct VerifyContext {
  const DidDocument& issuer_doc;
  const DidDocument& holder_doc;
  const protocol::VerifierPolicy& policy;
  std::span<const std::uint8_t> expected_nonce;
  Timestamp now = 0;
};

/// Accepts iff every acceptance check passes; the first failing check names the reason.
Verdict verify(const VerifiablePresentation& presentation, const VerifyContext& context);

} // namespace ler::credential

#endif // LER_CREDENTIAL_HPP

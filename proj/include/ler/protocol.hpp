#ifndef LER_PROTOCOL_HPP
#define LER_PROTOCOL_HPP

#include "ler/credential.hpp"
#include "ler/enclave.hpp"
#include "ler/identity.hpp"
#include "ler/matching.hpp"
#include "ler/policy.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace ler::protocol {

// ---------------------------------------------------------------------------
// Messaging
// ---------------------------------------------------------------------------

struct Envelope {
  std::string session_id;
  int step = 1;
  Json payload;
  std::string sender_did;

  Json to_json() const;
  static Envelope from_json(const Json& j);

  bool operator==(const Envelope&) const = default;
};

/// Rewrites one message in flight. Returning zero envelopes drops it, two replays it.
using FaultHook = std::function<std::vector<Envelope>(const Envelope&)>;

FaultHook drop_fault();
FaultHook replay_fault();
FaultHook mutate_fault(std::function<void(Json&)> mutate);

/// Message channel between actors. Every message crosses as canonical text.
class Transport {
public:
  virtual ~Transport() = default;
  virtual std::vector<Envelope> send(const Envelope& message) = 0;
};

class InProcessTransport final : public Transport {
public:
  std::vector<Envelope> send(const Envelope& message) override;

  void set_fault(FaultHook hook);
  void clear_fault();
  /// Canonical text of every message as delivered.
  std::vector<std::string> log() const;

private:
  FaultHook fault_;
  std::vector<std::string> log_;
  mutable std::mutex mutex_;
};

/// Single-use verifier challenges with a time-to-live. Serialized access.
class NonceRegistry {
public:
  explicit NonceRegistry(Seconds ttl = 600, std::shared_ptr<RandomSource> rng = system_random());

  Bytes issue(const std::string& session_id, Timestamp now);
  /// The nonce outstanding for a session, if any.
  std::optional<Bytes> outstanding(const std::string& session_id) const;
  /// True once per issued nonce, and only within the ttl.
  bool consume(const std::string& session_id, std::span<const std::uint8_t> nonce, Timestamp now);

private:
  struct Entry {
    Bytes nonce;
    Timestamp issued_at = 0;
    bool used = false;
  };
  Seconds ttl_;
  std::shared_ptr<RandomSource> rng_;
  std::map<std::string, Entry> entries_;
  mutable std::mutex mutex_;
};

/// Six-step exchange state. Steps only move forward.
class Session {
public:
  explicit Session(std::string id) : id_(std::move(id)) {}

  const std::string& id() const noexcept { return id_; }
  int step() const noexcept { return step_; }
  /// Throws Error(SessionState) unless 1 <= step <= 6 and step >= the current one.
  void advance(int step);
  void record(const Envelope& message);
  const std::vector<Envelope>& transcript() const noexcept { return transcript_; }

private:
  std::string id_;
  int step_ = 1;
  std::vector<Envelope> transcript_;
};

// ---------------------------------------------------------------------------
// Wallet
// ---------------------------------------------------------------------------

/// What the holder keeps from a derivation to present it later.
struct DerivationRecord {
  std::string credential_id;
  Bytes input_salt;
  enclave::AttestationEvidence evidence;
  /// Enclave session that can re-attest with a verifier's nonce.
  std::string enclave_session;
  /// Enclave::export_session blob, for re-attestation from another process.
  Bytes sealed_session;

  Json to_json() const;
  static DerivationRecord from_json(const Json& j);
  bool operator==(const DerivationRecord&) const = default;
};

/// A verifier's disclosure request waiting for the holder's decision.
struct PendingRequest {
  std::string request_id;
  std::string verifier_did;
  std::string session_id;
  Bytes nonce;
  credential::DisclosureRequest request;
  std::string job_id;
  Timestamp received_at = 0;

  Json to_json() const;
  static PendingRequest from_json(const Json& j);
};

struct Wallet {
  std::map<std::string, credential::VerifiableCredential> credentials;
  /// By credential id; "*" applies to credentials without their own policy.
  std::map<std::string, credential::DisclosurePolicy> policies;
  std::map<std::string, PendingRequest> pending;
  std::map<std::string, DerivationRecord> derivations;
  std::optional<credential::StatusList> derivative_status;
  /// Presentations built on approval, by request id.
  std::map<std::string, credential::VerifiablePresentation> presentations;

  /// False when a credential with that id is already held.
  bool add(const credential::VerifiableCredential& vc);
  const credential::DisclosurePolicy* policy_for(const std::string& credential_id) const;

  Json to_json() const;
  static Wallet from_json(const Json& j);
};

// ---------------------------------------------------------------------------
// Actors
// ---------------------------------------------------------------------------

class Issuer {
public:
  Issuer(identity::KeyPair keys, std::shared_ptr<Clock> clock, std::shared_ptr<RandomSource> rng = system_random(),
         std::string status_locator = "status/institutional");

  const identity::Did& did() const noexcept { return did_; }
  const identity::DidDocument& document() const noexcept { return document_; }
  const credential::StatusList& status_list() const noexcept { return status_list_; }
  /// Continue a persisted list. Throws Error(Unauthorized) for another owner's list.
  void adopt_status_list(credential::StatusList list);

  /// Transcript as an institutional credential: one claim per field.
  credential::VerifiableCredential issue_transcript(const identity::Did& subject, const skills::Transcript& record);
  credential::StatusSnippet staple(const std::string& credential_id) const;
  void revoke(const std::string& credential_id);

private:
  identity::KeyPair keys_;
  identity::Did did_;
  identity::DidDocument document_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<RandomSource> rng_;
  credential::StatusList status_list_;
};

/// Claims "institution", "student_name", "student_id", "course.<id>.{title,level,grade}".
std::vector<credential::ClaimInput> transcript_claims(const skills::Transcript& record);
/// Inverse of transcript_claims. Throws Error(ParseError).
skills::Transcript transcript_from_claims(const credential::VerifiableCredential& vc);

class Holder {
public:
  Holder(identity::KeyPair keys, std::shared_ptr<Clock> clock, std::shared_ptr<RandomSource> rng = system_random(),
         std::string status_locator = "status/derivative");

  const identity::Did& did() const noexcept { return did_; }
  const identity::DidDocument& document() const noexcept { return document_; }
  const identity::KeyPair& keys() const noexcept { return keys_; }
  Wallet& wallet() noexcept { return wallet_; }
  const Wallet& wallet() const noexcept { return wallet_; }

  /// Verifies the delivered credential against the issuer document and stores it.
  /// Returns the reject reason when it does not verify.
  Verdict receive(const credential::VerifiableCredential& vc, const identity::DidDocument& issuer_doc);

  /// Builds a presentation for a pending request from `credential_id`,
  /// re-attesting derivative credentials with the request's nonce. Without
  /// `status`, derivative credentials are stapled from the holder's own list.
  credential::VerifiablePresentation present(const PendingRequest& request, const std::string& credential_id,
                                             const std::set<std::string>& approved_claims,
                                             enclave::Enclave* enclave = nullptr,
                                             const credential::StatusSnippet* status = nullptr) const;

private:
  identity::KeyPair keys_;
  identity::Did did_;
  identity::DidDocument document_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<RandomSource> rng_;
  Wallet wallet_;
};

enum class Release { DecisionOnly, DecisionAndScore, Full };

std::string_view to_string(Release r) noexcept;
Release release_from_string(std::string_view text);

struct VerificationResponse {
  Verdict verdict;
  std::optional<matching::MatchResult> match;
  /// What leaves the verifier enclave, shaped by the release mode.
  Json released;
};

class Verifier {
public:
  Verifier(identity::KeyPair keys, VerifierPolicy policy, enclave::Enclave& verifier_enclave,
           std::shared_ptr<Clock> clock, std::shared_ptr<RandomSource> rng = system_random());

  const identity::Did& did() const noexcept { return did_; }
  const VerifierPolicy& policy() const noexcept { return policy_; }
  NonceRegistry& nonces() noexcept { return nonces_; }
  const enclave::EnclaveMeasurement& measurement() const noexcept { return enclave_->measurement(); }

  /// New session id and nonce.
  std::pair<std::string, Bytes> challenge();

  /// Nonce consumption, presentation checks, then skills-only matching.
  VerificationResponse evaluate(const std::string& session_id, const credential::VerifiablePresentation& vp,
                                const identity::DidRegistry& registry, const matching::JobRequirement& job,
                                const skills::SkillTaxonomy& taxonomy, const matching::AliasTable& aliases,
                                Release release);

private:
  identity::KeyPair keys_;
  identity::Did did_;
  VerifierPolicy policy_;
  enclave::Enclave* enclave_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<RandomSource> rng_;
  NonceRegistry nonces_;
};

// ---------------------------------------------------------------------------
// Workflow
// ---------------------------------------------------------------------------

struct IssuanceOutcome {
  Verdict verdict;
  std::string credential_id;
  std::size_t wallet_size = 0;
};

/// Step 1: issuer signs the record and delivers it over `transport`.
IssuanceOutcome run_issuance(Issuer& issuer, Holder& holder, const skills::Transcript& record, Transport& transport,
                             const identity::DidRegistry& registry);

struct DerivationInputs {
  std::string transcript_credential_id;
  std::vector<skills::SyllabusDocument> syllabi;
  const skills::SkillTaxonomy* taxonomy = nullptr;
  PipelinePolicy policy;
  Bytes nonce;
};

/// Steps 2-3: the enclave checks the institutional credential, derives the
/// skill credential, and the holder stores it. Throws Error(Rejected) when the
/// transcript credential does not verify.
enclave::DerivationResult run_derivation(Holder& holder, enclave::Enclave& enclave, const DerivationInputs& inputs,
                                         const identity::DidRegistry& registry);

struct VerificationRequest {
  credential::DisclosureRequest disclosure;
  matching::JobRequirement job;
  Release release = Release::DecisionOnly;
};

/// Steps 4-6: challenge, holder presentation, verification and matching.
VerificationResponse run_verification(Holder& holder, enclave::Enclave& holder_enclave, Verifier& verifier,
                                      const std::string& credential_id, const VerificationRequest& request,
                                      Transport& transport, const identity::DidRegistry& registry,
                                      const skills::SkillTaxonomy& taxonomy, const matching::AliasTable& aliases);

} // namespace ler::protocol

#endif // LER_PROTOCOL_HPP

#ifndef LER_ENCLAVE_HPP
#define LER_ENCLAVE_HPP

#include "ler/attestation.hpp"
#include "ler/clock.hpp"
#include "ler/credential.hpp"
#include "ler/identity.hpp"
#include "ler/policy.hpp"
#include "ler/skills.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace ler::enclave {

/// Code and model the enclave runs; measure() over these is m_e.
struct ModelBundle {
  std::string code_id;
  Bytes model;
  std::string version;

  EnclaveMeasurement measurement() const { return measure(code_id, model, version); }
};

/// Label -> authenticated ciphertext under one instance key. Serialized access.
class SealedStore {
public:
  SealedStore(Bytes key, std::shared_ptr<RandomSource> rng);

  void seal(const std::string& label, std::span<const std::uint8_t> plaintext);
  /// Throws Error(NotFound) or Error(UnsealFailed).
  Bytes unseal(const std::string& label) const;
  bool contains(const std::string& label) const;
  void erase(const std::string& label);

  /// Ciphertext as stored (nonce || box). Throws Error(NotFound).
  Bytes export_blob(const std::string& label) const;
  /// Accepts any blob; unseal() fails unless it was sealed under this store's key.
  void import_blob(const std::string& label, Bytes blob);

private:
  Bytes key_;
  std::shared_ptr<RandomSource> rng_;
  std::map<std::string, Bytes> blobs_;
  mutable std::mutex mutex_;
};

/// Long-lived instance secrets: the attestation key (its public half is the
/// trust anchor) and the sealing key.
struct EnclaveIdentity {
  identity::KeyPair attestation_keys;
  Bytes sealing_key;

  static EnclaveIdentity generate(RandomSource& rng);
  Json to_json() const;
  static EnclaveIdentity from_json(const Json& j);
};

struct DerivationRequest {
  skills::Transcript transcript;
  std::vector<skills::SyllabusDocument> syllabi;
  const skills::SkillTaxonomy* taxonomy = nullptr;
  identity::Did holder_did;
  Bytes verifier_nonce;
  /// Holder-owned derivative status list; the new credential is registered on it.
  std::optional<credential::StatusList> status_list;
  Seconds lifetime = 7 * 24 * 3600;
  /// Fixed commitment salt; random when absent.
  std::optional<Bytes> salt;
};

struct DerivationResult {
  credential::VerifiableCredential credential;
  AttestationEvidence evidence;
  Bytes input_salt;
  std::optional<credential::StatusList> status_list;
};

using SessionId = std::string;

/// Simulated trusted execution environment. Raw inputs stay inside a session;
/// everything leaving passes egress(), which refuses any output carrying an
/// 8-byte window of a confined input.
class Enclave {
public:
  static constexpr std::size_t kEgressWindow = 8;

  Enclave(ModelBundle bundle, const skills::EmbeddingProvider& provider, EnclaveIdentity identity,
          std::shared_ptr<Clock> clock = system_clock(), std::shared_ptr<RandomSource> rng = system_random());
  /// Fresh identity from `rng`.
  Enclave(ModelBundle bundle, const skills::EmbeddingProvider& provider, std::shared_ptr<Clock> clock = system_clock(),
          std::shared_ptr<RandomSource> rng = system_random());

  const EnclaveMeasurement& measurement() const noexcept { return measurement_; }
  const Bytes& attestation_public_key() const noexcept { return identity_.attestation_keys.public_key; }
  const skills::EmbeddingProvider& provider() const noexcept { return *provider_; }
  SealedStore& sealed_store() noexcept { return store_; }

  /// Throws Error(InvalidArgument) if the policy names a different embedding backend.
  SessionId open_session(const protocol::PipelinePolicy& policy);
  void close_session(const SessionId& id);
  /// Holder signing key, kept sealed for the session's lifetime.
  void provision_holder_keys(const SessionId& id, const identity::KeyPair& keys);

  /// Confines the documents and returns the salted commitment.
  InputCommitment commit(const SessionId& id, const skills::Transcript& transcript,
                         const std::vector<skills::SyllabusDocument>& syllabi,
                         std::optional<Bytes> salt = std::nullopt);
  /// Throws Error(SessionNotReady) before commit().
  AttestationEvidence attest(const SessionId& id, std::span<const std::uint8_t> verifier_nonce, Timestamp now);

  /// Commit, attest, run the skill pipeline and issue the derivative credential
  /// under the provisioned holder key. Throws Error(SessionNotReady) without
  /// holder keys, Error(EmptyTaxonomy), Error(NoEvidence).
  DerivationResult derive_skill_credential(const SessionId& id, const DerivationRequest& request);

  bool has_session(const SessionId& id) const;
  /// Session state without raw inputs, sealed under the instance key.
  Bytes export_session(const SessionId& id);
  /// Restores an exported session under its original id. Throws Error(UnsealFailed)
  /// for blobs sealed by another instance.
  SessionId import_session(std::span<const std::uint8_t> blob);

  /// Serialized `output` if it carries no window of any confined input.
  /// Throws Error(ConfidentialityViolation).
  std::string egress(const Json& output) const;

  const EnclaveIdentity& identity() const noexcept { return identity_; }

private:
  struct Session {
    protocol::PipelinePolicy policy;
    Digest policy_digest{};
    std::optional<InputCommitment> commitment;
    Digest transcript_digest{};
    Digest syllabus_digest{};
    std::vector<std::string> confined;
  };

  Session& session(const SessionId& id);
  std::string holder_label(const SessionId& id) const { return "session/" + id + "/holder"; }

  ModelBundle bundle_;
  EnclaveMeasurement measurement_;
  const skills::EmbeddingProvider* provider_;
  EnclaveIdentity identity_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<RandomSource> rng_;
  SealedStore store_;
  std::map<SessionId, Session> sessions_;
  mutable std::mutex sessions_mutex_;
};

/// Corrected derivation for a disputed derivative credential: a new credential
/// over the corrected inputs, and the old id revoked on the holder's list.
/// Throws Error(NotDerivative).
DerivationResult reissue_on_dispute(const credential::VerifiableCredential& old, Enclave& enclave,
                                    const SessionId& session, DerivationRequest corrected,
                                    const identity::KeyPair& holder_keys);

} // namespace ler::enclave

#endif // LER_ENCLAVE_HPP

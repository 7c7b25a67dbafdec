#ifndef LER_ATTESTATION_HPP
#define LER_ATTESTATION_HPP

#include "ler/canonical.hpp"
#include "ler/clock.hpp"
#include "ler/crypto.hpp"
#include "ler/verdict.hpp"

#include <compare>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ler::enclave {

// Domain-separation tags.
inline constexpr std::string_view kInputsTag = "inputs";
inline constexpr std::string_view kAttestTag = "att";
inline constexpr std::string_view kProvenanceTag = "prov";

/// Digest of the code+model bundle an enclave runs.
struct EnclaveMeasurement {
  Digest m_e{};

  std::string hex() const { return to_hex(m_e); }
  static EnclaveMeasurement from_hex(std::string_view hex) { return {digest_from_hex(hex)}; }

  auto operator<=>(const EnclaveMeasurement&) const = default;
};

using MeasurementAllowlist = std::set<EnclaveMeasurement>;

/// SHA-256(code_id || SHA-256(model_bundle) || version).
EnclaveMeasurement measure(std::string_view code_id, std::span<const std::uint8_t> model_bundle,
                           std::string_view version);

/// H(syllabus/LO) over any number of documents: SHA-256 of the concatenated,
/// bytewise-sorted per-document SHA-256 digests.
Digest document_set_digest(const std::vector<std::string>& documents);

struct InputCommitment {
  Bytes salt;
  Digest h_inputs{};
};

/// H("inputs" || salt || transcript_digest || syllabus_digest). Throws Error(BadSalt).
InputCommitment commit_digests(std::span<const std::uint8_t> salt, const Digest& transcript_digest,
                               const Digest& syllabus_digest);

/// commit_digests over SHA-256 of each document.
InputCommitment commit_inputs(std::span<const std::uint8_t> transcript, std::span<const std::uint8_t> syllabus,
                              std::span<const std::uint8_t> salt);

struct AttestationEvidence {
  EnclaveMeasurement m_e;
  Digest h_inputs{};
  Digest h_policy{};
  Bytes n_v;
  Timestamp t = 0;
  Bytes sigma_tee;

  /// "att" || m_e || h_inputs || h_policy || n_v || t
  Bytes signed_payload() const;

  Json to_json() const;
  static AttestationEvidence from_json(const Json& j);

  bool operator==(const AttestationEvidence&) const = default;
};

/// H("prov" || m_e || h_inputs || h_policy || t)
Digest provenance_digest(const EnclaveMeasurement& m_e, const Digest& h_inputs, const Digest& h_policy,
                         Timestamp t);

struct Provenance {
  Digest transcript_digest{};
  Digest syllabus_digest{};
  EnclaveMeasurement code;
  Digest policy{};
  Timestamp time = 0;
  std::string derivation_id;
  Digest h_prov{};

  /// True when h_prov recomputes from these fields and the derivation's h_inputs.
  bool consistent_with(const Digest& h_inputs) const;

  Json to_json() const;
  static Provenance from_json(const Json& j);

  bool operator==(const Provenance&) const = default;
};

struct AttestationCheck {
  std::span<const Bytes> trust_anchors;  ///< enclave attestation public keys
  std::span<const std::uint8_t> expected_nonce;
  const MeasurementAllowlist* allowlist = nullptr;
  Digest expected_policy_digest{};
  Timestamp now = 0;
  Seconds max_age = 300;
};

/// Accepts iff the signature verifies under one trust anchor, the nonce matches,
/// m_e is allowlisted, the policy digest is the expected one and now - t <= max_age.
Verdict verify_attestation(const AttestationEvidence& evidence, const AttestationCheck& check);

/// Single-anchor convenience form.
Verdict verify_attestation(const AttestationEvidence& evidence, std::span<const std::uint8_t> enclave_public_key,
                           std::span<const std::uint8_t> expected_nonce, const MeasurementAllowlist& allowlist,
                           const Digest& expected_policy_digest, Timestamp now, Seconds max_age);

} // namespace ler::enclave

#endif // LER_ATTESTATION_HPP

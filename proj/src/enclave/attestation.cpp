#include "ler/attestation.hpp"

#include "ler/error.hpp"
#include "ler/identity.hpp"

#include <algorithm>

namespace ler::enclave {

EnclaveMeasurement measure(std::string_view code_id, std::span<const std::uint8_t> model_bundle,
                           std::string_view version) {
  return {sha256(ByteWriter().put(code_id).put(sha256(model_bundle)).put(version).bytes())};
}

Digest document_set_digest(const std::vector<std::string>& documents) {
  std::vector<Digest> digests;
  digests.reserve(documents.size());
  for (const auto& doc : documents) digests.push_back(sha256(doc));
  std::sort(digests.begin(), digests.end());
  ByteWriter w;
  for (const auto& d : digests) w.put(d);
  return sha256(w.bytes());
}

InputCommitment commit_digests(std::span<const std::uint8_t> salt, const Digest& transcript_digest,
                               const Digest& syllabus_digest) {
  if (salt.size() != kSaltSize) throw Error(Errc::BadSalt, "salt must be exactly 16 octets");
  ByteWriter w;
  w.put(kInputsTag).put(salt).put(transcript_digest).put(syllabus_digest);
  return {Bytes(salt.begin(), salt.end()), sha256(w.bytes())};
}

InputCommitment commit_inputs(std::span<const std::uint8_t> transcript, std::span<const std::uint8_t> syllabus,
                              std::span<const std::uint8_t> salt) {
  return commit_digests(salt, sha256(transcript), sha256(syllabus));
}

Bytes AttestationEvidence::signed_payload() const {
  ByteWriter w;
  w.put(kAttestTag).put(m_e.m_e).put(h_inputs).put(h_policy).put(n_v).put_i64(t);
  return std::move(w).take();
}

Json AttestationEvidence::to_json() const {
  return Json{{"h_inputs", to_hex(h_inputs)}, {"h_policy", to_hex(h_policy)}, {"m_e", m_e.hex()},
              {"n_v", to_hex(n_v)},           {"sigma_tee", to_hex(sigma_tee)}, {"t", t}};
}

AttestationEvidence AttestationEvidence::from_json(const Json& j) {
  AttestationEvidence e;
  e.m_e = EnclaveMeasurement{require_digest(j, "m_e")};
  e.h_inputs = require_digest(j, "h_inputs");
  e.h_policy = require_digest(j, "h_policy");
  e.n_v = require_hex(j, "n_v");
  e.t = require_int(j, "t");
  e.sigma_tee = require_hex(j, "sigma_tee");
  return e;
}

Digest provenance_digest(const EnclaveMeasurement& m_e, const Digest& h_inputs, const Digest& h_policy,
                         Timestamp t) {
  ByteWriter w;
  w.put(kProvenanceTag).put(m_e.m_e).put(h_inputs).put(h_policy).put_i64(t);
  return sha256(w.bytes());
}

bool Provenance::consistent_with(const Digest& h_inputs) const {
  return provenance_digest(code, h_inputs, policy, time) == h_prov;
}

Json Provenance::to_json() const {
  return Json{{"code", code.hex()},
              {"derivation_id", derivation_id},
              {"h_prov", to_hex(h_prov)},
              {"inputs", Json::array({to_hex(transcript_digest), to_hex(syllabus_digest)})},
              {"policy", to_hex(policy)},
              {"time", time}};
}

Provenance Provenance::from_json(const Json& j) {
  Provenance p;
  const Json& inputs = require(j, "inputs");
  if (!inputs.is_array() || inputs.size() != 2 || !inputs[0].is_string() || !inputs[1].is_string()) {
    throw Error(Errc::ParseError, "provenance inputs must be [H(transcript), H(syllabus)]");
  }
  p.transcript_digest = digest_from_hex(inputs[0].get<std::string>());
  p.syllabus_digest = digest_from_hex(inputs[1].get<std::string>());
  p.code = EnclaveMeasurement{require_digest(j, "code")};
  p.policy = require_digest(j, "policy");
  p.time = require_int(j, "time");
  p.derivation_id = require_string(j, "derivation_id");
  p.h_prov = require_digest(j, "h_prov");
  return p;
}

Verdict verify_attestation(const AttestationEvidence& evidence, const AttestationCheck& check) {
  const Bytes payload = evidence.signed_payload();
  const bool signed_by_anchor = std::ranges::any_of(check.trust_anchors, [&](const Bytes& pk) {
    return identity::verify_signature(pk, payload, evidence.sigma_tee);
  });
  if (!signed_by_anchor) return Verdict::reject(Reason::BadAttestation, "sigma_tee does not verify");
  if (!std::ranges::equal(evidence.n_v, check.expected_nonce)) {
    return Verdict::reject(Reason::BadNonce, "attestation nonce differs from challenge");
  }
  if (check.allowlist == nullptr || !check.allowlist->contains(evidence.m_e)) {
    return Verdict::reject(Reason::MeasurementNotAllowlisted, evidence.m_e.hex());
  }
  if (evidence.h_policy != check.expected_policy_digest) {
    return Verdict::reject(Reason::PolicyMismatch, "h_policy " + to_hex(evidence.h_policy));
  }
  if (check.now - evidence.t > check.max_age || evidence.t > check.now) {
    return Verdict::reject(Reason::StaleAttestation, "attested at " + std::to_string(evidence.t));
  }
  return Verdict::accept();
}

Verdict verify_attestation(const AttestationEvidence& evidence, std::span<const std::uint8_t> enclave_public_key,
                           std::span<const std::uint8_t> expected_nonce, const MeasurementAllowlist& allowlist,
                           const Digest& expected_policy_digest, Timestamp now, Seconds max_age) {
  const Bytes anchor(enclave_public_key.begin(), enclave_public_key.end());
  return verify_attestation(evidence, AttestationCheck{std::span(&anchor, 1), expected_nonce, &allowlist,
                                                       expected_policy_digest, now, max_age});
}

} // namespace ler::enclave

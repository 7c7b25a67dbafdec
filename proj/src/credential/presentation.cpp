#include "ler/credential.hpp"
#include "ler/error.hpp"

#include <algorithm>
#include <set>

namespace ler::credential {

Json VerifiablePresentation::signed_fields() const {
  Json revealed_json = Json::array();
  for (const auto& c : revealed) revealed_json.push_back(c.to_json());
  Json preds = Json::array();
  for (const auto& p : predicate_results) preds.push_back({{"predicate", p.predicate.to_json()}, {"result", p.result}});
  Json j{{"created_at", created_at},
         {"credential", credential.to_json()},
         {"holder_key_id", holder_key_id},
         {"nonce", to_hex(nonce)},
         {"predicate_results", preds},
         {"revealed", revealed_json},
         {"stapled_status", stapled_status.to_json()}};
  if (attestation) j["attestation"] = attestation->to_json();
  if (input_salt) j["input_salt"] = to_hex(*input_salt);
  return j;
}

Json VerifiablePresentation::to_json() const {
  Json j = signed_fields();
  j["holder_signature"] = to_hex(holder_signature);
  return j;
}

VerifiablePresentation VerifiablePresentation::from_json(const Json& j) {
  VerifiablePresentation vp;
  vp.credential = VerifiableCredential::from_json(require(j, "credential"));
  for (const auto& c : require(j, "revealed")) vp.revealed.push_back(Claim::from_json(c));
  for (const auto& p : require(j, "predicate_results")) {
    const Json& r = require(p, "result");
    if (!r.is_boolean()) throw Error(Errc::ParseError, "predicate result must be boolean");
    vp.predicate_results.push_back({Predicate::from_json(require(p, "predicate")), r.get<bool>()});
  }
  vp.nonce = require_hex(j, "nonce");
  vp.created_at = require_int(j, "created_at");
  vp.stapled_status = StatusSnippet::from_json(require(j, "stapled_status"));
  if (j.contains("attestation")) vp.attestation = enclave::AttestationEvidence::from_json(j.at("attestation"));
  if (j.contains("input_salt")) vp.input_salt = require_hex(j, "input_salt");
  vp.holder_key_id = require_string(j, "holder_key_id");
  vp.holder_signature = require_hex(j, "holder_signature");
  return vp;
}

VerifiablePresentation present(const VerifiableCredential& credential, const DisclosurePolicy& policy,
                               const DisclosureRequest& requested, const KeyPair& holder_keys,
                               std::span<const std::uint8_t> nonce, const StatusSnippet& status,
                               const PresentOptions& options) {
  if (credential.expired_at(options.now)) throw Error(Errc::Expired, credential.id);
  if (nonce.empty()) throw Error(Errc::InvalidArgument, "verifier nonce must be nonempty");

  VerifiablePresentation vp;
  for (const auto& key : requested.claims) {
    if (!policy.allows_claim(key)) {
      if (!policy.default_deny) throw Error(Errc::PolicyViolation, "claim '" + key + "' is not permitted");
      continue;
    }
    if (const Claim* c = credential.find_claim(key)) vp.revealed.push_back(*c);
  }
  for (const auto& p : requested.predicates) {
    if (!policy.allows_predicate(p)) {
      if (!policy.default_deny) throw Error(Errc::PolicyViolation, "predicate on '" + p.key + "' is not permitted");
      continue;
    }
    if (const Claim* c = credential.find_claim(p.key)) vp.predicate_results.push_back({p, p.evaluate(c->value)});
  }
  if (vp.revealed.empty() && vp.predicate_results.empty()) throw Error(Errc::EmptyDisclosure);

  vp.credential = credential.redacted();
  vp.nonce.assign(nonce.begin(), nonce.end());
  vp.created_at = options.now;
  vp.stapled_status = status;
  vp.attestation = options.attestation;
  vp.input_salt = options.input_salt;
  vp.holder_key_id = options.holder_key_id.empty() ? credential.subject_did.str() + "#key-1" : options.holder_key_id;
  vp.holder_signature = holder_keys.sign(canonical_serialize(vp.signed_fields()));
  return vp;
}

namespace {

Verdict check_derivation_binding(const VerifiablePresentation& vp, const VerifyContext& ctx) {
  const auto& policy = ctx.policy;
  if (!vp.attestation) return Verdict::reject(Reason::BadAttestation, "derivative credential without attestation");
  const auto& evidence = *vp.attestation;
  Verdict v = enclave::verify_attestation(
      evidence, enclave::AttestationCheck{policy.attestation_roots, ctx.expected_nonce, &policy.measurement_allowlist,
                                          policy.expected_policy_digest, ctx.now, policy.attestation_max_age});
  if (!v.accepted()) return v;

  const auto& prov = *vp.credential.provenance;
  if (!vp.input_salt) return Verdict::reject(Reason::BadAttestation, "input commitment salt not disclosed");
  enclave::InputCommitment commitment;
  try {
    commitment = enclave::commit_digests(*vp.input_salt, prov.transcript_digest, prov.syllabus_digest);
  } catch (const Error&) {
    return Verdict::reject(Reason::BadAttestation, "malformed input salt");
  }
  if (commitment.h_inputs != evidence.h_inputs) {
    return Verdict::reject(Reason::BadAttestation, "H_inputs does not bind the credential's inputs");
  }
  if (prov.code != evidence.m_e) return Verdict::reject(Reason::BadAttestation, "prov.code differs from M_e");
  if (prov.policy != evidence.h_policy) return Verdict::reject(Reason::BadAttestation, "prov.policy differs");
  if (!prov.consistent_with(evidence.h_inputs)) return Verdict::reject(Reason::BadAttestation, "H_prov mismatch");
  return Verdict::accept();
}

} // namespace

Verdict verify(const VerifiablePresentation& vp, const VerifyContext& ctx) {
  const auto& vc = vp.credential;

  if (!verify_issuer_signature(vc, ctx.issuer_doc)) return Verdict::reject(Reason::BadIssuerSig, vc.id);

  std::set<Digest> signed_digests(vc.claim_digests.begin(), vc.claim_digests.end());
  std::set<std::string> seen;
  for (const auto& claim : vp.revealed) {
    if (claim.salt.size() != kSaltSize || !signed_digests.contains(claim.digest()) || !seen.insert(claim.key).second) {
      return Verdict::reject(Reason::DigestMismatch, claim.key);
    }
  }

  const auto* holder_method = ctx.holder_doc.find_method(vp.holder_key_id);
  bool holder_ok = false;
  if (ctx.holder_doc.did == vc.subject_did && holder_method != nullptr) {
    try {
      holder_ok = identity::verify_signature(holder_method->public_key, to_bytes(canonical_serialize(vp.signed_fields())),
                                             vp.holder_signature, holder_method->algorithm);
    } catch (const Error&) {
      holder_ok = false;
    }
  }
  if (!holder_ok) return Verdict::reject(Reason::BadHolderSig, vc.subject_did.str());

  if (ctx.expected_nonce.empty() || !std::ranges::equal(vp.nonce, ctx.expected_nonce)) {
    return Verdict::reject(Reason::BadNonce);
  }

  const auto& snippet = vp.stapled_status;
  if (snippet.owner_did != vc.issuer_did || ctx.issuer_doc.find_key(snippet.owner_key) == nullptr ||
      snippet.credential_id != vc.id || !snippet.signature_valid()) {
    return Verdict::reject(Reason::BadStatusSig, vc.id);
  }
  if (snippet.issued_at > ctx.now || ctx.now - snippet.issued_at > ctx.policy.freshness) {
    return Verdict::reject(Reason::StaleStatus, "status issued at " + std::to_string(snippet.issued_at));
  }
  if (snippet.status != CredentialStatus::Valid) {
    return Verdict::reject(Reason::Revoked, std::string(to_string(snippet.status)));
  }

  if (vc.expired_at(ctx.now)) return Verdict::reject(Reason::Expired, vc.id);

  if (vc.credential_class == CredentialClass::Derivative) return check_derivation_binding(vp, ctx);
  if (vp.attestation) {
    const auto& policy = ctx.policy;
    return enclave::verify_attestation(
        *vp.attestation, enclave::AttestationCheck{policy.attestation_roots, ctx.expected_nonce,
                                                   &policy.measurement_allowlist, policy.expected_policy_digest,
                                                   ctx.now, policy.attestation_max_age});
  }
  return Verdict::accept();
}

} // namespace ler::credential

#include "ler/error.hpp"
#include "ler/protocol.hpp"

namespace ler::protocol {

IssuanceOutcome run_issuance(Issuer& issuer, Holder& holder, const skills::Transcript& record, Transport& transport,
                             const identity::DidRegistry& registry) {
  const auto vc = issuer.issue_transcript(holder.did(), record);
  const Envelope message{"issue-" + vc.id, 1, vc.to_json(), issuer.did().str()};

  IssuanceOutcome out;
  out.credential_id = vc.id;
  out.verdict = Verdict::reject(Reason::Malformed, "credential was not delivered");
  for (const auto& delivered : transport.send(message)) {
    Verdict v;
    try {
      const auto received = credential::VerifiableCredential::from_json(delivered.payload);
      v = holder.receive(received, registry.resolve(received.issuer_did));
    } catch (const Error& e) {
      v = Verdict::reject(Reason::Malformed, e.what());
    }
    // Any accepted copy counts; the wallet deduplicates repeats.
    if (v.accepted() || !out.verdict.accepted()) out.verdict = v;
  }
  out.wallet_size = holder.wallet().credentials.size();
  return out;
}

enclave::DerivationResult run_derivation(Holder& holder, enclave::Enclave& enclave, const DerivationInputs& inputs,
                                         const identity::DidRegistry& registry) {
  auto it = holder.wallet().credentials.find(inputs.transcript_credential_id);
  if (it == holder.wallet().credentials.end()) {
    throw Error(Errc::NotFound, "transcript credential " + inputs.transcript_credential_id);
  }
  const auto& transcript_vc = it->second;
  if (transcript_vc.credential_class != credential::CredentialClass::Institutional) {
    throw Error(Errc::InvalidArgument, "derivation needs an institutional transcript credential");
  }
  const auto issuer_doc = registry.resolve(transcript_vc.issuer_did);
  if (!credential::verify_issuer_signature(transcript_vc, issuer_doc) || !credential::verify_claim_digests(transcript_vc)) {
    throw Error(Errc::Rejected, "transcript credential does not verify");
  }

  const auto session = enclave.open_session(inputs.policy);
  enclave.provision_holder_keys(session, holder.keys());
  enclave::DerivationRequest request;
  request.transcript = transcript_from_claims(transcript_vc);
  request.syllabi = inputs.syllabi;
  request.taxonomy = inputs.taxonomy;
  request.holder_did = holder.did();
  request.verifier_nonce = inputs.nonce;
  request.status_list = holder.wallet().derivative_status;
  auto result = enclave.derive_skill_credential(session, request);

  auto& wallet = holder.wallet();
  wallet.add(result.credential);
  wallet.derivative_status = result.status_list;
  wallet.derivations[result.credential.id] =
      DerivationRecord{result.credential.id, result.input_salt, result.evidence, session, enclave.export_session(session)};
  return result;
}

VerificationResponse run_verification(Holder& holder, enclave::Enclave& holder_enclave, Verifier& verifier,
                                      const std::string& credential_id, const VerificationRequest& request,
                                      Transport& transport, const identity::DidRegistry& registry,
                                      const skills::SkillTaxonomy& taxonomy, const matching::AliasTable& aliases) {
  auto [session_id, nonce] = verifier.challenge();
  Session session(session_id);

  // Step 4: verifier asks, holder decides what to disclose.
  const Envelope ask{session_id, 4,
                     Json{{"job_id", request.job.job_id},
                          {"nonce", to_hex(nonce)},
                          {"request", request.disclosure.to_json()}},
                     verifier.did().str()};
  std::optional<credential::VerifiablePresentation> vp;
  for (const auto& msg : transport.send(ask)) {
    session.record(msg);
    PendingRequest pending;
    pending.request_id = msg.session_id;
    pending.verifier_did = msg.sender_did;
    pending.session_id = msg.session_id;
    pending.nonce = require_hex(msg.payload, "nonce");
    pending.request = credential::DisclosureRequest::from_json(require(msg.payload, "request"));
    pending.job_id = require_string(msg.payload, "job_id");
    const auto* policy = holder.wallet().policy_for(credential_id);
    std::set<std::string> approved;
    for (const auto& key : pending.request.claims)
      if (policy != nullptr && policy->allows_claim(key)) approved.insert(key);
    vp = holder.present(pending, credential_id, approved, &holder_enclave);
  }

  VerificationResponse out;
  if (!vp) {
    out.verdict = Verdict::reject(Reason::Malformed, "disclosure request was not delivered");
    return out;
  }

  // Step 5: presentation travels back; the verifier checks it inside its enclave.
  const Envelope answer{session_id, 5, vp->to_json(), holder.did().str()};
  bool any = false;
  for (const auto& msg : transport.send(answer)) {
    session.record(msg);
    VerificationResponse r;
    try {
      const auto received = credential::VerifiablePresentation::from_json(msg.payload);
      r = verifier.evaluate(msg.session_id, received, registry, request.job, taxonomy, aliases, request.release);
    } catch (const Error& e) {
      r.verdict = Verdict::reject(Reason::Malformed, e.what());
      r.released = Json{{"accepted", false}, {"reason", "Malformed"}, {"session_id", session_id}};
    }
    // The first delivery decides; a replayed copy must not override it.
    if (!any) out = std::move(r);
    any = true;
  }
  if (!any) {
    out.verdict = Verdict::reject(Reason::Malformed, "presentation was not delivered");
    return out;
  }

  // Step 6: release.
  session.record(Envelope{session_id, 6, out.released, verifier.did().str()});
  return out;
}

} // namespace ler::protocol

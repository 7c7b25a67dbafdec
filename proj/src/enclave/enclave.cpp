#include "ler/enclave.hpp"
#include "ler/error.hpp"

#include <algorithm>
#include <string_view>
#include <unordered_set>

namespace ler::enclave {

EnclaveIdentity EnclaveIdentity::generate(RandomSource& rng) {
  const Bytes seed = rng.bytes(32);
  return EnclaveIdentity{identity::KeyPair::from_seed(seed), rng.bytes(secretbox::kKeySize)};
}

Json EnclaveIdentity::to_json() const {
  return Json{{"attestation_keys", attestation_keys.to_json()}, {"sealing_key", to_hex(sealing_key)}};
}

EnclaveIdentity EnclaveIdentity::from_json(const Json& j) {
  EnclaveIdentity id{identity::KeyPair::from_json(require(j, "attestation_keys")), require_hex(j, "sealing_key")};
  if (id.sealing_key.size() != secretbox::kKeySize) throw Error(Errc::InvalidKey, "sealing key must be 32 octets");
  return id;
}

Enclave::Enclave(ModelBundle bundle, const skills::EmbeddingProvider& provider, EnclaveIdentity identity,
                 std::shared_ptr<Clock> clock, std::shared_ptr<RandomSource> rng)
    : bundle_(std::move(bundle)), measurement_(bundle_.measurement()), provider_(&provider),
      identity_(std::move(identity)), clock_(std::move(clock)), rng_(std::move(rng)),
      store_(identity_.sealing_key, rng_) {}

Enclave::Enclave(ModelBundle bundle, const skills::EmbeddingProvider& provider, std::shared_ptr<Clock> clock,
                 std::shared_ptr<RandomSource> rng)
    : Enclave(std::move(bundle), provider, EnclaveIdentity::generate(*rng), std::move(clock), rng) {}

Enclave::Session& Enclave::session(const SessionId& id) {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::NotFound, "session " + id);
  return it->second;
}

SessionId Enclave::open_session(const protocol::PipelinePolicy& policy) {
  policy.validate();
  if (policy.embedding_id != provider_->id()) {
    throw Error(Errc::InvalidArgument, "policy pins embedding '" + policy.embedding_id + "', enclave runs '" +
                                           provider_->id() + "'");
  }
  SessionId id = "sess-" + rng_->hex_id(8);
  std::lock_guard lock(sessions_mutex_);
  sessions_.emplace(id, Session{policy, policy.digest(), std::nullopt, {}, {}, {}});
  return id;
}

void Enclave::close_session(const SessionId& id) {
  store_.erase(holder_label(id));
  std::lock_guard lock(sessions_mutex_);
  sessions_.erase(id);
}

void Enclave::provision_holder_keys(const SessionId& id, const identity::KeyPair& keys) {
  session(id);
  store_.seal(holder_label(id), to_bytes(canonical_serialize(keys.to_json())));
}

InputCommitment Enclave::commit(const SessionId& id, const skills::Transcript& transcript,
                                const std::vector<skills::SyllabusDocument>& syllabi, std::optional<Bytes> salt) {
  Session& s = session(id);
  const std::string transcript_doc = transcript.document();
  std::vector<std::string> syllabus_docs;
  syllabus_docs.reserve(syllabi.size());
  for (const auto& doc : syllabi) syllabus_docs.push_back(doc.text);

  s.transcript_digest = sha256(transcript_doc);
  s.syllabus_digest = document_set_digest(syllabus_docs);
  s.commitment = commit_digests(salt ? *salt : rng_->bytes(kSaltSize), s.transcript_digest, s.syllabus_digest);
  s.confined.clear();
  s.confined.push_back(transcript_doc);
  for (auto& d : syllabus_docs) s.confined.push_back(std::move(d));
  return *s.commitment;
}

AttestationEvidence Enclave::attest(const SessionId& id, std::span<const std::uint8_t> verifier_nonce, Timestamp now) {
  Session& s = session(id);
  if (!s.commitment) throw Error(Errc::SessionNotReady, "no committed inputs");
  if (verifier_nonce.empty()) throw Error(Errc::InvalidArgument, "verifier nonce must be nonempty");
  AttestationEvidence ev;
  ev.m_e = measurement_;
  ev.h_inputs = s.commitment->h_inputs;
  ev.h_policy = s.policy_digest;
  ev.n_v.assign(verifier_nonce.begin(), verifier_nonce.end());
  ev.t = now;
  ev.sigma_tee = identity_.attestation_keys.sign(ev.signed_payload());
  return ev;
}

bool Enclave::has_session(const SessionId& id) const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.contains(id);
}

Bytes Enclave::export_session(const SessionId& id) {
  const Session& s = session(id);
  Json state{{"id", id}, {"policy", s.policy.to_json()}};
  if (s.commitment) {
    state["commitment"] = {{"h_inputs", to_hex(s.commitment->h_inputs)},
                           {"salt", to_hex(s.commitment->salt)},
                           {"syllabus_digest", to_hex(s.syllabus_digest)},
                           {"transcript_digest", to_hex(s.transcript_digest)}};
  }
  if (store_.contains(holder_label(id))) {
    const Bytes keys = store_.unseal(holder_label(id));
    state["holder_keys"] = parse_document(std::string(keys.begin(), keys.end()));
  }
  return secretbox::seal(identity_.sealing_key, to_bytes(canonical_serialize(state)), *rng_);
}

SessionId Enclave::import_session(std::span<const std::uint8_t> blob) {
  const Bytes plain = secretbox::open(identity_.sealing_key, blob);
  const Json state = parse_document(std::string(plain.begin(), plain.end()));
  const SessionId id = require_string(state, "id");
  Session s{protocol::PipelinePolicy::from_json(require(state, "policy")), {}, std::nullopt, {}, {}, {}};
  s.policy_digest = s.policy.digest();
  if (state.contains("commitment")) {
    const Json& c = state.at("commitment");
    s.commitment = InputCommitment{require_hex(c, "salt"), require_digest(c, "h_inputs")};
    s.transcript_digest = require_digest(c, "transcript_digest");
    s.syllabus_digest = require_digest(c, "syllabus_digest");
  }
  if (state.contains("holder_keys")) {
    store_.seal(holder_label(id), to_bytes(canonical_serialize(state.at("holder_keys"))));
  }
  std::lock_guard lock(sessions_mutex_);
  sessions_[id] = std::move(s);
  return id;
}

std::string Enclave::egress(const Json& output) const {
  const std::string text = canonical_serialize(output);
  std::unordered_set<std::string_view> windows;
  std::lock_guard lock(sessions_mutex_);
  for (const auto& [id, s] : sessions_) {
    for (const auto& doc : s.confined) {
      for (std::size_t i = 0; i + kEgressWindow <= doc.size(); ++i) {
        windows.insert(std::string_view(doc).substr(i, kEgressWindow));
      }
    }
  }
  for (std::size_t i = 0; i + kEgressWindow <= text.size(); ++i) {
    if (windows.contains(std::string_view(text).substr(i, kEgressWindow))) {
      throw Error(Errc::ConfidentialityViolation, "output carries confined input bytes at offset " + std::to_string(i));
    }
  }
  return text;
}

DerivationResult Enclave::derive_skill_credential(const SessionId& id, const DerivationRequest& request) {
  if (request.taxonomy == nullptr) throw Error(Errc::EmptyTaxonomy);
  const skills::SkillTaxonomy& taxonomy = *request.taxonomy;
  const protocol::PipelinePolicy policy = session(id).policy;
  if (policy.taxonomy_ref != taxonomy.ref()) {
    throw Error(Errc::InvalidArgument, "taxonomy differs from the one pinned by the session policy");
  }
  if (request.transcript.courses.empty()) throw Error(Errc::NoEvidence, "transcript has no courses");
  if (!store_.contains(holder_label(id))) throw Error(Errc::SessionNotReady, "holder keys not provisioned");
  const Bytes sealed_keys = store_.unseal(holder_label(id));
  const auto holder_keys =
      identity::KeyPair::from_json(parse_document(std::string(sealed_keys.begin(), sealed_keys.end())));

  const Timestamp now = clock_->now();
  DerivationResult result;
  const InputCommitment commitment = commit(id, request.transcript, request.syllabi, request.salt);
  result.input_salt = commitment.salt;
  result.evidence = attest(id, request.verifier_nonce, now);

  const auto courses = skills::attach_syllabi(request.transcript, request.syllabi);
  const skills::EmbeddedTaxonomy embedded(taxonomy, *provider_);
  const skills::SkillVector v = skills::derive_skill_vector(courses, embedded, policy.weights);
  const auto ranked = skills::top_k(v, taxonomy, std::min(policy.top_k, taxonomy.size()));

  std::vector<credential::ClaimInput> claims;
  for (const auto& r : ranked) {
    if (r.score > policy.claim_threshold) claims.push_back({r.skill_id, r.score});
  }
  if (claims.empty()) throw Error(Errc::NoEvidence, "no skill scored above the claim threshold");

  const Session& s = session(id);
  Provenance prov;
  prov.transcript_digest = s.transcript_digest;
  prov.syllabus_digest = s.syllabus_digest;
  prov.code = measurement_;
  prov.policy = s.policy_digest;
  prov.time = now;
  prov.derivation_id = "drv-" + rng_->hex_id();
  prov.h_prov = provenance_digest(measurement_, commitment.h_inputs, s.policy_digest, now);

  credential::IssueOptions options;
  options.now = now;
  options.rng = rng_.get();
  options.id = "urn:ler:vc:" + rng_->hex_id();
  if (request.status_list) {
    options.status_ref = {request.status_list->locator, static_cast<std::int64_t>(request.status_list->entries.size())};
  }
  result.credential = credential::issue(holder_keys, request.holder_did, request.holder_did, claims,
                                        credential::CredentialClass::Derivative, prov, request.lifetime, options);
  if (request.status_list) {
    result.status_list = credential::register_entry(*request.status_list, result.credential.id, holder_keys, now);
  }

  Json out{{"credential", result.credential.to_json()},
           {"evidence", result.evidence.to_json()},
           {"input_salt", to_hex(result.input_salt)}};
  if (result.status_list) out["status_list"] = result.status_list->to_json();
  egress(out);
  return result;
}

DerivationResult reissue_on_dispute(const credential::VerifiableCredential& old, Enclave& enclave,
                                    const SessionId& session, DerivationRequest corrected,
                                    const identity::KeyPair& holder_keys) {
  if (old.credential_class != credential::CredentialClass::Derivative) throw Error(Errc::NotDerivative, old.id);
  if (!corrected.status_list) throw Error(Errc::InvalidArgument, "reissue needs the holder's derivative status list");
  DerivationResult result = enclave.derive_skill_credential(session, corrected);
  result.status_list = credential::revoke(*result.status_list, old.id, holder_keys, result.credential.issued_at);
  return result;
}

} // namespace ler::enclave

#include "ler/error.hpp"
#include "ler/protocol.hpp"

namespace ler::protocol {

// ---------------------------------------------------------------------------
// Wallet
// ---------------------------------------------------------------------------

Json DerivationRecord::to_json() const {
  return Json{{"credential_id", credential_id},
              {"enclave_session", enclave_session},
              {"evidence", evidence.to_json()},
              {"input_salt", to_hex(input_salt)},
              {"sealed_session", to_hex(sealed_session)}};
}

DerivationRecord DerivationRecord::from_json(const Json& j) {
  return DerivationRecord{require_string(j, "credential_id"), require_hex(j, "input_salt"),
                          enclave::AttestationEvidence::from_json(require(j, "evidence")),
                          require_string(j, "enclave_session"), require_hex(j, "sealed_session")};
}

Json PendingRequest::to_json() const {
  return Json{{"job_id", job_id},           {"nonce", to_hex(nonce)},         {"received_at", received_at},
              {"request", request.to_json()}, {"request_id", request_id},      {"session_id", session_id},
              {"verifier_did", verifier_did}};
}

PendingRequest PendingRequest::from_json(const Json& j) {
  PendingRequest r;
  r.request_id = require_string(j, "request_id");
  r.verifier_did = require_string(j, "verifier_did");
  r.session_id = require_string(j, "session_id");
  r.nonce = require_hex(j, "nonce");
  r.request = credential::DisclosureRequest::from_json(require(j, "request"));
  r.job_id = require_string(j, "job_id");
  r.received_at = require_int(j, "received_at");
  return r;
}

bool Wallet::add(const credential::VerifiableCredential& vc) { return credentials.emplace(vc.id, vc).second; }

const credential::DisclosurePolicy* Wallet::policy_for(const std::string& credential_id) const {
  if (auto it = policies.find(credential_id); it != policies.end()) return &it->second;
  if (auto it = policies.find("*"); it != policies.end()) return &it->second;
  return nullptr;
}

Json Wallet::to_json() const {
  Json creds = Json::object();
  for (const auto& [id, vc] : credentials) creds[id] = vc.to_json();
  Json pols = Json::object();
  for (const auto& [id, p] : policies) pols[id] = p.to_json();
  Json pend = Json::object();
  for (const auto& [id, r] : pending) pend[id] = r.to_json();
  Json ders = Json::object();
  for (const auto& [id, d] : derivations) ders[id] = d.to_json();
  Json pres = Json::object();
  for (const auto& [id, vp] : presentations) pres[id] = vp.to_json();
  Json j{{"credentials", creds}, {"derivations", ders}, {"pending", pend}, {"policies", pols}, {"presentations", pres}};
  j["derivative_status"] = derivative_status ? derivative_status->to_json() : Json(nullptr);
  return j;
}

Wallet Wallet::from_json(const Json& j) {
  Wallet w;
  auto object = [&](std::string_view key) -> const Json& {
    const Json& o = require(j, key);
    if (!o.is_object()) throw Error(Errc::ParseError, std::string(key) + " must be an object");
    return o;
  };
  for (const auto& [id, vc] : object("credentials").items()) {
    w.credentials.emplace(id, credential::VerifiableCredential::from_json(vc));
  }
  for (const auto& [id, p] : object("policies").items()) w.policies.emplace(id, credential::DisclosurePolicy::from_json(p));
  for (const auto& [id, r] : object("pending").items()) w.pending.emplace(id, PendingRequest::from_json(r));
  for (const auto& [id, d] : object("derivations").items()) w.derivations.emplace(id, DerivationRecord::from_json(d));
  for (const auto& [id, vp] : object("presentations").items()) {
    w.presentations.emplace(id, credential::VerifiablePresentation::from_json(vp));
  }
  const Json& ds = require(j, "derivative_status");
  if (!ds.is_null()) w.derivative_status = credential::StatusList::from_json(ds);
  return w;
}

// ---------------------------------------------------------------------------
// Transcript <-> claims
// ---------------------------------------------------------------------------

std::vector<credential::ClaimInput> transcript_claims(const skills::Transcript& record) {
  std::vector<credential::ClaimInput> claims{
      {"institution", record.institution}, {"student_id", record.student_id}, {"student_name", record.student_name}};
  for (const auto& c : record.courses) {
    const std::string prefix = "course." + c.course_id + ".";
    claims.push_back({prefix + "title", c.title});
    claims.push_back({prefix + "level", static_cast<std::int64_t>(c.level)});
    claims.push_back({prefix + "grade", c.grade});
  }
  return claims;
}

skills::Transcript transcript_from_claims(const credential::VerifiableCredential& vc) {
  auto text = [&](const std::string& key) {
    const auto* c = vc.find_claim(key);
    if (c == nullptr || !std::holds_alternative<std::string>(c->value)) {
      throw Error(Errc::ParseError, "transcript credential lacks text claim " + key);
    }
    return std::get<std::string>(c->value);
  };
  skills::Transcript t;
  t.institution = text("institution");
  t.student_id = text("student_id");
  t.student_name = text("student_name");
  // Courses in the order their title claims appear.
  for (const auto& claim : vc.claims) {
    const std::string& key = claim.key;
    if (!key.starts_with("course.") || !key.ends_with(".title")) continue;
    const std::string id = key.substr(7, key.size() - 7 - 6);
    skills::CourseRecord course;
    course.course_id = id;
    course.title = text(key);
    const auto* level = vc.find_claim("course." + id + ".level");
    if (level == nullptr || !std::holds_alternative<std::int64_t>(level->value)) {
      throw Error(Errc::ParseError, "course " + id + " lacks an integer level");
    }
    course.level = static_cast<int>(std::get<std::int64_t>(level->value));
    course.grade = text("course." + id + ".grade");
    t.courses.push_back(std::move(course));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Actors
// ---------------------------------------------------------------------------

Issuer::Issuer(identity::KeyPair keys, std::shared_ptr<Clock> clock, std::shared_ptr<RandomSource> rng,
               std::string status_locator)
    : keys_(std::move(keys)), clock_(std::move(clock)), rng_(std::move(rng)) {
  auto generated = identity::gen_did(keys_.public_key, identity::kDefaultMethod, {{"role", "issuer"}});
  did_ = generated.did;
  document_ = std::move(generated.document);
  status_list_ = credential::create_status_list(keys_, did_, credential::ListKind::Institutional,
                                                std::move(status_locator), clock_->now());
}

credential::VerifiableCredential Issuer::issue_transcript(const identity::Did& subject,
                                                          const skills::Transcript& record) {
  credential::IssueOptions options;
  options.now = clock_->now();
  options.rng = rng_.get();
  options.id = "urn:ler:vc:" + rng_->hex_id();
  options.status_ref = {status_list_.locator, static_cast<std::int64_t>(status_list_.entries.size())};
  auto vc = credential::issue(keys_, did_, subject, transcript_claims(record), credential::CredentialClass::Institutional,
                              std::nullopt, std::nullopt, options);
  status_list_ = credential::register_entry(status_list_, vc.id, keys_, clock_->now());
  return vc;
}

void Issuer::adopt_status_list(credential::StatusList list) {
  if (list.owner_key != keys_.public_key || list.owner_did != did_) {
    throw Error(Errc::Unauthorized, "status list belongs to another issuer");
  }
  if (!list.signature_valid()) throw Error(Errc::BadListSig, list.locator);
  status_list_ = std::move(list);
}

credential::StatusSnippet Issuer::staple(const std::string& credential_id) const {
  return credential::staple(status_list_, credential_id, keys_, clock_->now());
}

void Issuer::revoke(const std::string& credential_id) {
  status_list_ = credential::revoke(status_list_, credential_id, keys_, clock_->now());
}

Holder::Holder(identity::KeyPair keys, std::shared_ptr<Clock> clock, std::shared_ptr<RandomSource> rng,
               std::string status_locator)
    : keys_(std::move(keys)), clock_(std::move(clock)), rng_(std::move(rng)) {
  auto generated = identity::gen_did(keys_.public_key, identity::kDefaultMethod, {{"role", "holder"}});
  did_ = generated.did;
  document_ = std::move(generated.document);
  wallet_.derivative_status = credential::create_status_list(keys_, did_, credential::ListKind::Derivative,
                                                             std::move(status_locator), clock_->now());
}

Verdict Holder::receive(const credential::VerifiableCredential& vc, const identity::DidDocument& issuer_doc) {
  if (vc.issuer_did != issuer_doc.did || !credential::verify_issuer_signature(vc, issuer_doc)) {
    return Verdict::reject(Reason::BadIssuerSig, vc.id);
  }
  if (!credential::verify_claim_digests(vc)) return Verdict::reject(Reason::DigestMismatch, vc.id);
  if (vc.subject_did != did_) return Verdict::reject(Reason::Malformed, "credential is for another subject");
  wallet_.add(vc);
  return Verdict::accept();
}

credential::VerifiablePresentation Holder::present(const PendingRequest& request, const std::string& credential_id,
                                                   const std::set<std::string>& approved_claims,
                                                   enclave::Enclave* enclave,
                                                   const credential::StatusSnippet* status) const {
  auto it = wallet_.credentials.find(credential_id);
  if (it == wallet_.credentials.end()) throw Error(Errc::NotFound, "credential " + credential_id);
  const auto& vc = it->second;
  const auto* policy = wallet_.policy_for(credential_id);
  if (policy == nullptr) throw Error(Errc::PolicyViolation, "no disclosure policy for " + credential_id);

  credential::DisclosureRequest chosen;
  for (const auto& key : request.request.claims)
    if (approved_claims.contains(key)) chosen.claims.insert(key);
  chosen.predicates = request.request.predicates;

  const Timestamp now = clock_->now();
  credential::PresentOptions options;
  options.now = now;
  options.holder_key_id = document_.verification_methods.front().key_id;

  credential::StatusSnippet snippet;
  if (status != nullptr) {
    snippet = *status;
  } else if (vc.credential_class == credential::CredentialClass::Derivative && wallet_.derivative_status) {
    snippet = credential::staple(*wallet_.derivative_status, vc.id, keys_, now);
  } else {
    throw Error(Errc::InvalidArgument, "no status snippet for " + credential_id);
  }

  if (vc.credential_class == credential::CredentialClass::Derivative) {
    auto d = wallet_.derivations.find(credential_id);
    if (d == wallet_.derivations.end()) throw Error(Errc::NotFound, "derivation record for " + credential_id);
    options.input_salt = d->second.input_salt;
    if (enclave != nullptr) {
      if (!enclave->has_session(d->second.enclave_session) && !d->second.sealed_session.empty()) {
        enclave->import_session(d->second.sealed_session);
      }
      options.attestation = enclave->attest(d->second.enclave_session, request.nonce, now);
    } else {
      options.attestation = d->second.evidence;
    }
  }
  return credential::present(vc, *policy, chosen, keys_, request.nonce, snippet, options);
}

std::string_view to_string(Release r) noexcept {
  switch (r) {
  case Release::DecisionOnly: return "decision";
  case Release::DecisionAndScore: return "decision+score";
  case Release::Full: return "full";
  }
  return "?";
}

Release release_from_string(std::string_view text) {
  for (auto r : {Release::DecisionOnly, Release::DecisionAndScore, Release::Full})
    if (to_string(r) == text) return r;
  throw Error(Errc::ParseError, "unknown release mode '" + std::string(text) + "'");
}

Verifier::Verifier(identity::KeyPair keys, VerifierPolicy policy, enclave::Enclave& verifier_enclave,
                   std::shared_ptr<Clock> clock, std::shared_ptr<RandomSource> rng)
    : keys_(std::move(keys)), policy_(std::move(policy)), enclave_(&verifier_enclave), clock_(std::move(clock)),
      rng_(std::move(rng)), nonces_(policy_.nonce_ttl, rng_) {
  policy_.validate();
  did_ = identity::gen_did(keys_.public_key, identity::kDefaultMethod, {{"role", "verifier"}}).did;
}

std::pair<std::string, Bytes> Verifier::challenge() {
  std::string session = "vs-" + rng_->hex_id(12);
  Bytes nonce = nonces_.issue(session, clock_->now());
  return {std::move(session), std::move(nonce)};
}

VerificationResponse Verifier::evaluate(const std::string& session_id, const credential::VerifiablePresentation& vp,
                                        const identity::DidRegistry& registry, const matching::JobRequirement& job,
                                        const skills::SkillTaxonomy& taxonomy, const matching::AliasTable& aliases,
                                        Release release) {
  VerificationResponse out;
  auto reject = [&](Verdict v) {
    out.verdict = std::move(v);
    out.released = Json{{"accepted", false},
                        {"reason", std::string(to_string(out.verdict.reason))},
                        {"session_id", session_id}};
    return out;
  };

  const Timestamp now = clock_->now();
  const auto expected = nonces_.outstanding(session_id);
  if (!expected || !nonces_.consume(session_id, vp.nonce, now)) {
    return reject(Verdict::reject(Reason::BadNonce, "nonce not outstanding for session " + session_id));
  }

  std::optional<identity::DidDocument> issuer_doc;
  std::optional<identity::DidDocument> holder_doc;
  try {
    issuer_doc = registry.resolve(vp.credential.issuer_did);
    holder_doc = registry.resolve(vp.credential.subject_did);
  } catch (const Error&) {
    return reject(Verdict::reject(Reason::BadIssuerSig, "unresolvable DID"));
  }

  Verdict verdict = credential::verify(vp, credential::VerifyContext{*issuer_doc, *holder_doc, policy_, *expected, now});
  if (!verdict.accepted()) return reject(std::move(verdict));

  const auto attested = matching::AttestedSkills::from_presentation(vp, verdict, taxonomy);
  matching::JobRequirement pinned = job;
  pinned.tau = policy_.tau;
  matching::MatchResult match;
  try {
    match = matching::decide(attested, pinned, enclave_->provider(), {}, aliases);
  } catch (const Error& e) {
    if (e.code() != Errc::NoCandidateSkills) throw;
    match.job_id = job.job_id;
    match.tau = pinned.tau;
    match.decision = false;
  }

  Json released{{"accepted", true}, {"decision", match.decision}, {"job_id", job.job_id}, {"session_id", session_id}};
  if (release != Release::DecisionOnly) released["score"] = match.score;
  if (release == Release::Full) released["match"] = match.to_json();
  released["verifier_measurement"] = enclave_->measurement().hex();
  out.verdict = Verdict::accept();
  out.released = Json::parse(enclave_->egress(released));
  out.match = std::move(match);
  return out;
}

} // namespace ler::protocol

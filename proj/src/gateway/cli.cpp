#include "ler/error.hpp"
#include "ler/gateway.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace ler::gateway {

namespace {

enum class Format { Text, Canonical };

struct Globals {
  std::string home;
  std::string config;
  std::string format = "text";
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_real(double x) {
  std::ostringstream out;
  out << std::setprecision(12) << x;
  std::string s = out.str();
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string file_name_for(const std::string& id) {
  std::string s = id;
  for (char& c : s)
    if (c == ':' || c == '/') c = '_';
  return s + ".json";
}

/// Lazily opened state under one home directory.
class Context {
public:
  explicit Context(const Globals& g) : format_(g.format == "canonical" ? Format::Canonical : Format::Text) {
    fs::path home = g.home;
    if (home.empty()) {
      const char* env = std::getenv("LER_HOME");
      home = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".ler");
    }
    const auto located = Config::locate(g.config.empty() ? std::nullopt : std::optional<fs::path>(g.config));
    config_ = located ? Config::load(*located) : Config::defaults(home);
    fs::create_directories(config_.home);
  }

  const Config& config() const { return config_; }
  Format format() const { return format_; }

  void emit(const Json& j, const std::string& text = {}) const {
    if (format_ == Format::Canonical || text.empty()) {
      std::cout << (format_ == Format::Canonical ? canonical_serialize(j) : j.dump(2)) << '\n';
    } else {
      std::cout << text << '\n';
    }
  }

  const skills::EmbeddingProvider& provider() const { return provider_; }

  const skills::SkillTaxonomy& taxonomy() {
    if (!taxonomy_) taxonomy_ = skills::SkillTaxonomy::load_tsv(taxonomy_path_.empty() ? config_.taxonomy : taxonomy_path_);
    return *taxonomy_;
  }
  void override_taxonomy(const fs::path& p) { taxonomy_path_ = p; }

  matching::AliasTable aliases() const {
    if (config_.aliases.empty() || !fs::exists(config_.aliases)) return {};
    return matching::AliasTable::load_tsv(config_.aliases);
  }

  identity::DidRegistry& registry() {
    if (!registry_) {
      fs::create_directories(config_.registry);
      registry_.emplace(config_.registry);
    }
    return *registry_;
  }

  fs::path key_path(const std::string& role) const {
    if (role == "issuer") return config_.issuer_key;
    if (role == "holder") return config_.holder_key;
    if (role == "verifier") return config_.verifier_key;
    if (role == "enclave") return enclave_path();
    throw Error(Errc::InvalidArgument, "unknown role '" + role + "'");
  }

  identity::KeyPair keys(const std::string& role) const {
    const auto p = key_path(role);
    if (!fs::exists(p)) throw Error(Errc::NotFound, "no " + role + " key at " + p.string() + " (run keygen)");
    return identity::KeyPair::from_json(read_document(p));
  }

  fs::path enclave_path() const { return config_.home / "enclave.json"; }
  fs::path wallet_path() const { return config_.home / "wallet.json"; }
  fs::path status_path() const { return config_.home / "status" / "institutional.json"; }
  fs::path challenges_path() const { return config_.home / "verifier" / "challenges.json"; }

  enclave::EnclaveIdentity enclave_identity() const {
    if (!fs::exists(enclave_path())) {
      throw Error(Errc::NotFound, "no enclave identity at " + enclave_path().string() + " (run keygen --role enclave)");
    }
    return enclave::EnclaveIdentity::from_json(read_document(enclave_path()));
  }

  enclave::Enclave& derivation_enclave() {
    if (!enclave_) {
      enclave_ = std::make_unique<enclave::Enclave>(reference_bundle(provider_), provider_, enclave_identity(), clock_);
    }
    return *enclave_;
  }

  enclave::Enclave& verifier_enclave() {
    if (!verifier_enclave_) {
      verifier_enclave_ = std::make_unique<enclave::Enclave>(verifier_bundle(provider_), provider_, clock_);
    }
    return *verifier_enclave_;
  }

  protocol::Issuer& issuer() {
    if (!issuer_) {
      issuer_ = std::make_unique<protocol::Issuer>(keys("issuer"), clock_, system_random(),
                                                   config_.institutional_status_locator);
      if (fs::exists(status_path())) {
        issuer_->adopt_status_list(credential::StatusList::from_json(read_document(status_path())));
      }
    }
    return *issuer_;
  }
  void save_issuer() {
    fs::create_directories(status_path().parent_path());
    write_document_atomic(status_path(), issuer().status_list().to_json());
  }

  protocol::Holder& holder() {
    if (!holder_) {
      holder_ = std::make_unique<protocol::Holder>(keys("holder"), clock_, system_random(),
                                                   config_.derivative_status_locator);
      WalletStore store(wallet_path());
      if (store.exists()) {
        auto fresh = holder_->wallet().derivative_status;
        holder_->wallet() = store.load();
        if (!holder_->wallet().derivative_status) holder_->wallet().derivative_status = fresh;
      }
    }
    return *holder_;
  }
  void save_wallet() { WalletStore(wallet_path()).save(holder().wallet()); }

  protocol::VerifierPolicy verifier_policy() {
    protocol::VerifierPolicy p;
    p.measurement_allowlist = load_allowlist(config_.allowlist);
    p.freshness = config_.freshness;
    p.attestation_max_age = config_.freshness;
    p.tau = config_.tau;
    p.expected_policy_digest = config_.pipeline_policy(taxonomy(), provider_).digest();
    p.attestation_roots.push_back(from_hex(trim(read_text_file(config_.trust_anchor))));
    p.validate();
    return p;
  }

  std::shared_ptr<Clock> clock() const { return clock_; }

private:
  Format format_;
  Config config_;
  fs::path taxonomy_path_;
  skills::HashingEmbedding provider_;
  std::shared_ptr<Clock> clock_ = system_clock();
  std::optional<skills::SkillTaxonomy> taxonomy_;
  std::optional<identity::DidRegistry> registry_;
  std::unique_ptr<enclave::Enclave> enclave_;
  std::unique_ptr<enclave::Enclave> verifier_enclave_;
  std::unique_ptr<protocol::Issuer> issuer_;
  std::unique_ptr<protocol::Holder> holder_;
};

identity::GeneratedDid role_did(const identity::KeyPair& keys, const std::string& role) {
  return identity::gen_did(keys.public_key, identity::kDefaultMethod, {{"role", role}});
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_keygen(Context& ctx, const std::string& role, bool force) {
  const auto path = ctx.key_path(role);
  if (fs::exists(path) && !force) throw Error(Errc::InvalidArgument, path.string() + " exists (use --force)");
  fs::create_directories(path.parent_path());
  if (role == "enclave") {
    auto rng = system_random();
    const auto id = enclave::EnclaveIdentity::generate(*rng);
    write_document_atomic(path, id.to_json());
    const auto& cfg = ctx.config();
    write_text_file_atomic(cfg.trust_anchor, to_hex(id.attestation_keys.public_key) + "\n");
    const auto m = reference_bundle(ctx.provider()).measurement();
    write_text_file_atomic(cfg.allowlist, "# reference derivation enclave\n" + m.hex() + "\n");
    ctx.emit(Json{{"measurement", m.hex()}, {"path", path.string()}, {"role", role},
                  {"trust_anchor", to_hex(id.attestation_keys.public_key)}},
             m.hex());
    return;
  }
  const auto keys = identity::KeyPair::generate();
  write_document_atomic(path, keys.to_json());
  const auto did = role_did(keys, role).did.str();
  ctx.emit(Json{{"did", did}, {"path", path.string()}, {"role", role}}, did);
}

void cmd_did_register(Context& ctx, const std::string& role) {
  const auto generated = role_did(ctx.keys(role), role);
  auto& registry = ctx.registry();
  bool created = false;
  if (!registry.contains(generated.did)) {
    registry.register_document(generated.document);
    created = true;
  } else if (registry.resolve(generated.did) != generated.document) {
    throw Error(Errc::InvalidArgument, "a different document is registered for " + generated.did.str());
  }
  ctx.emit(Json{{"created", created}, {"did", generated.did.str()}, {"role", role}}, generated.did.str());
}

void cmd_issue(Context& ctx, const fs::path& transcript_path, const std::string& subject_text, const fs::path& out) {
  const auto record = skills::Transcript::from_json(read_document(transcript_path));
  auto& issuer = ctx.issuer();
  auto& registry = ctx.registry();
  if (!registry.contains(issuer.did())) throw Error(Errc::NotFound, "issuer DID is not registered (run did register)");
  const auto subject = subject_text.empty() ? ctx.holder().did() : identity::Did::parse(subject_text);
  if (!registry.contains(subject)) throw Error(Errc::NotFound, "subject " + subject.str() + " is not registered");

  const auto vc = issuer.issue_transcript(subject, record);
  ctx.save_issuer();
  if (!out.empty()) write_document_atomic(out, vc.to_json());

  bool stored = false;
  if (fs::exists(ctx.config().holder_key) && subject == ctx.holder().did()) {
    const auto verdict = ctx.holder().receive(vc, registry.resolve(issuer.did()));
    if (!verdict.accepted()) throw Error(Errc::Rejected, std::string(to_string(verdict.reason)));
    ctx.save_wallet();
    stored = true;
  }
  ctx.emit(Json{{"credential_id", vc.id}, {"stored_in_wallet", stored}, {"subject_did", subject.str()}}, vc.id);
}

std::string find_transcript_credential(Context& ctx, const fs::path& transcript_path) {
  const Json doc = read_document(transcript_path);
  auto& holder = ctx.holder();
  if (doc.contains("credential_class")) {
    const auto vc = credential::VerifiableCredential::from_json(doc);
    if (!holder.wallet().credentials.contains(vc.id)) {
      const auto verdict = holder.receive(vc, ctx.registry().resolve(vc.issuer_did));
      if (!verdict.accepted()) throw Error(Errc::Rejected, std::string(to_string(verdict.reason)));
    }
    return vc.id;
  }
  const auto record = skills::Transcript::from_json(doc);
  for (const auto& [id, vc] : holder.wallet().credentials) {
    if (vc.credential_class != credential::CredentialClass::Institutional) continue;
    try {
      if (protocol::transcript_from_claims(vc) == record) return id;
    } catch (const Error&) {
    }
  }
  throw Error(Errc::NotFound, "no institutional credential in the wallet matches " + transcript_path.string());
}

void cmd_derive(Context& ctx, const fs::path& transcript_path, const fs::path& syllabi_dir, const fs::path& taxonomy,
                const fs::path& out) {
  if (!taxonomy.empty()) ctx.override_taxonomy(taxonomy);
  const auto credential_id = find_transcript_credential(ctx, transcript_path);
  protocol::DerivationInputs inputs;
  inputs.transcript_credential_id = credential_id;
  inputs.syllabi = load_syllabi(syllabi_dir);
  inputs.taxonomy = &ctx.taxonomy();
  inputs.policy = ctx.config().pipeline_policy(ctx.taxonomy(), ctx.provider());
  inputs.nonce = system_random()->bytes(32);

  const auto result = protocol::run_derivation(ctx.holder(), ctx.derivation_enclave(), inputs, ctx.registry());
  ctx.save_wallet();
  const fs::path target = out.empty() ? ctx.config().home / "credentials" / file_name_for(result.credential.id) : out;
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  write_document_atomic(target, result.credential.to_json());

  Json skills = Json::array();
  std::ostringstream text;
  text << result.credential.id << '\n';
  for (const auto& c : result.credential.claims) {
    const auto* d = ctx.taxonomy().find(c.key);
    const double score = credential::numeric_value(c.value).value_or(0.0);
    skills.push_back({{"name", d ? d->name : c.key}, {"score", score}, {"skill_id", c.key}});
    text << "  " << c.key << "  " << format_real(score) << "  " << (d ? d->name : "") << '\n';
  }
  ctx.emit(Json{{"credential_id", result.credential.id}, {"path", target.string()}, {"skills", skills}},
           trim(text.str()));
}

void cmd_wallet_list(Context& ctx) {
  const auto& wallet = ctx.holder().wallet();
  Json items = Json::array();
  std::ostringstream text;
  for (const auto& [id, vc] : wallet.credentials) {
    items.push_back({{"class", std::string(to_string(vc.credential_class))},
                     {"claims", vc.claims.size()},
                     {"id", id},
                     {"issuer_did", vc.issuer_did.str()}});
    text << id << "  " << to_string(vc.credential_class) << "  " << vc.claims.size() << " claims\n";
  }
  Json policies = Json::object();
  for (const auto& [id, p] : wallet.policies) policies[id] = p.to_json();
  ctx.emit(Json{{"credentials", items},
                {"holder_did", ctx.holder().did().str()},
                {"pending", wallet.pending.size()},
                {"policies", policies}},
           text.str().empty() ? "(empty wallet)" : trim(text.str()));
}

void cmd_wallet_policy_set(Context& ctx, const std::string& credential_id, const std::string& allow, bool all,
                           std::string policy_id) {
  auto& wallet = ctx.holder().wallet();
  credential::DisclosurePolicy policy;
  policy.policy_id = policy_id.empty() ? "pol-" + credential_id : std::move(policy_id);
  for (auto& k : split_list(allow)) policy.allowed_claims.insert(std::move(k));
  if (all) {
    auto it = wallet.credentials.find(credential_id);
    if (it == wallet.credentials.end()) throw Error(Errc::NotFound, "credential " + credential_id);
    for (const auto& c : it->second.claims) policy.allowed_claims.insert(c.key);
  }
  wallet.policies[credential_id] = policy;
  ctx.save_wallet();
  ctx.emit(Json{{"credential_id", credential_id}, {"policy", policy.to_json()}}, policy.policy_id);
}

void cmd_challenge(Context& ctx, const std::string& job_id, const fs::path& out) {
  const auto jobs = load_jobs(ctx.config().jobs);
  if (!jobs.contains(job_id)) throw Error(Errc::NotFound, "job " + job_id);
  auto rng = system_random();
  const std::string session = "vs-" + rng->hex_id(12);
  const Bytes nonce = rng->bytes(32);

  Json store = fs::exists(ctx.challenges_path()) ? read_document(ctx.challenges_path()) : Json::object();
  store[session] = Json{{"issued_at", ctx.clock()->now()}, {"job_id", job_id}, {"nonce", to_hex(nonce)}, {"used", false}};
  fs::create_directories(ctx.challenges_path().parent_path());
  write_document_atomic(ctx.challenges_path(), store);

  credential::DisclosureRequest wanted;
  for (const auto& s : ctx.taxonomy().skills()) wanted.claims.insert(s.skill_id);
  const auto verifier_did = role_did(ctx.keys("verifier"), "verifier").did.str();
  const Json request{{"job_id", job_id},
                     {"nonce", to_hex(nonce)},
                     {"request", wanted.to_json()},
                     {"session_id", session},
                     {"verifier_did", verifier_did}};
  if (!out.empty()) write_document_atomic(out, request);
  ctx.emit(request, session);
}

void cmd_present(Context& ctx, const fs::path& request_path, std::string credential_id, const std::string& approve,
                 const fs::path& out) {
  const Json req = read_document(request_path);
  protocol::PendingRequest pending;
  pending.request_id = require_string(req, "session_id");
  pending.session_id = pending.request_id;
  pending.verifier_did = require_string(req, "verifier_did");
  pending.nonce = require_hex(req, "nonce");
  pending.request = credential::DisclosureRequest::from_json(require(req, "request"));
  pending.job_id = require_string(req, "job_id");
  pending.received_at = ctx.clock()->now();

  auto& holder = ctx.holder();
  const auto& wallet = holder.wallet();
  if (credential_id.empty()) {
    for (const auto& [id, vc] : wallet.credentials) {
      if (vc.credential_class == credential::CredentialClass::Derivative) credential_id = id;
    }
    if (credential_id.empty()) throw Error(Errc::NotFound, "wallet holds no derivative credential");
  }
  const auto* policy = wallet.policy_for(credential_id);
  if (policy == nullptr) throw Error(Errc::PolicyViolation, "no disclosure policy for " + credential_id);
  const auto explicit_keys = split_list(approve);
  std::set<std::string> approved;
  for (const auto& k : pending.request.claims) {
    if (!policy->allows_claim(k)) continue;
    if (!explicit_keys.empty() && std::ranges::find(explicit_keys, k) == explicit_keys.end()) continue;
    approved.insert(k);
  }

  std::optional<credential::StatusSnippet> snippet;
  const auto& vc = wallet.credentials.at(credential_id);
  if (vc.credential_class == credential::CredentialClass::Institutional) snippet = ctx.issuer().staple(credential_id);
  const auto vp = holder.present(pending, credential_id, approved, &ctx.derivation_enclave(),
                                 snippet ? &*snippet : nullptr);
  const Json doc{{"job_id", pending.job_id}, {"presentation", vp.to_json()}, {"session_id", pending.session_id}};
  if (!out.empty()) write_document_atomic(out, doc);
  ctx.emit(doc, out.empty() ? canonical_serialize(doc) : vp.credential.id);
}

struct Checked {
  Verdict verdict;
  std::string job_id;
  std::string session_id;
  credential::VerifiablePresentation vp;
};

Checked check_presentation(Context& ctx, const fs::path& presentation_path, bool consume) {
  const Json doc = read_document(presentation_path);
  Checked out;
  out.session_id = require_string(doc, "session_id");
  out.vp = credential::VerifiablePresentation::from_json(require(doc, "presentation"));

  Json store = fs::exists(ctx.challenges_path()) ? read_document(ctx.challenges_path()) : Json::object();
  const Timestamp now = ctx.clock()->now();
  const auto policy = ctx.verifier_policy();
  if (!store.contains(out.session_id)) {
    out.verdict = Verdict::reject(Reason::BadNonce, "unknown session " + out.session_id);
    return out;
  }
  Json& entry = store[out.session_id];
  out.job_id = require_string(entry, "job_id");
  const Bytes expected = require_hex(entry, "nonce");
  if (entry.at("used").get<bool>() || now - require_int(entry, "issued_at") > policy.nonce_ttl) {
    out.verdict = Verdict::reject(Reason::BadNonce, "nonce already used or expired");
    return out;
  }

  try {
    const auto issuer_doc = ctx.registry().resolve(out.vp.credential.issuer_did);
    const auto holder_doc = ctx.registry().resolve(out.vp.credential.subject_did);
    out.verdict = credential::verify(out.vp, credential::VerifyContext{issuer_doc, holder_doc, policy, expected, now});
  } catch (const Error& e) {
    out.verdict = Verdict::reject(Reason::BadIssuerSig, e.what());
  }
  if (consume) {
    entry["used"] = true;
    write_document_atomic(ctx.challenges_path(), store);
  }
  return out;
}

int cmd_verify(Context& ctx, const fs::path& presentation_path) {
  const auto checked = check_presentation(ctx, presentation_path, false);
  const std::string reason(to_string(checked.verdict.reason));
  ctx.emit(Json{{"accepted", checked.verdict.accepted()},
                {"credential_id", checked.vp.credential.id},
                {"detail", checked.verdict.detail},
                {"reason", reason}},
           checked.verdict.accepted() ? "Accept" : "Reject " + reason);
  return checked.verdict.accepted() ? 0 : 1;
}

int cmd_match(Context& ctx, const fs::path& presentation_path, const std::string& skills_text,
              std::string job_id, const std::string& release_text) {
  const auto jobs = load_jobs(ctx.config().jobs);
  const auto release = protocol::release_from_string(release_text);

  if (presentation_path.empty()) {
    // Evaluation tooling: named skills, unverified.
    if (job_id.empty()) throw Error(Errc::InvalidArgument, "--job is required with --skills");
    auto it = jobs.find(job_id);
    if (it == jobs.end()) throw Error(Errc::NotFound, "job " + job_id);
    std::vector<matching::SkillClaim> claims;
    for (auto& name : split_list(skills_text)) claims.push_back({name, name, 1.0});
    if (claims.empty()) throw Error(Errc::InvalidArgument, "--skills lists no skill");
    auto job = it->second;
    job.tau = ctx.config().tau;
    const auto result = matching::evaluate(claims, job, ctx.provider(), {}, ctx.aliases());
    Json j = result.to_json();
    j["verified"] = false;
    std::ostringstream text;
    text << "overlap " << format_real(result.overlap) << "  semsim " << format_real(result.sem_sim) << "  decision "
         << (result.decision ? "accept" : "reject");
    ctx.emit(j, text.str());
    return 0;
  }

  auto checked = check_presentation(ctx, presentation_path, true);
  if (job_id.empty()) job_id = checked.job_id;
  Json released{{"accepted", false}, {"session_id", checked.session_id}};
  if (!checked.verdict.accepted()) {
    released["reason"] = std::string(to_string(checked.verdict.reason));
    ctx.emit(released, "Reject " + std::string(to_string(checked.verdict.reason)));
    return 1;
  }
  auto it = jobs.find(job_id);
  if (it == jobs.end()) throw Error(Errc::NotFound, "job " + job_id);
  auto job = it->second;
  job.tau = ctx.config().tau;
  const auto attested = matching::AttestedSkills::from_presentation(checked.vp, checked.verdict, ctx.taxonomy());
  const auto result = matching::decide(attested, job, ctx.provider(), {}, ctx.aliases());
  released = Json{{"accepted", true}, {"decision", result.decision}, {"job_id", job.job_id},
                  {"session_id", checked.session_id}};
  if (release != protocol::Release::DecisionOnly) released["score"] = result.score;
  if (release == protocol::Release::Full) released["match"] = result.to_json();
  auto& venclave = ctx.verifier_enclave();
  released["verifier_measurement"] = venclave.measurement().hex();
  released = parse_document(venclave.egress(released));
  ctx.emit(released, std::string(result.decision ? "accept" : "reject") +
                         (release == protocol::Release::DecisionOnly ? "" : " " + format_real(result.score)));
  return 0;
}

void cmd_revoke(Context& ctx, const std::string& credential_id, std::string role) {
  if (role.empty()) {
    role = "issuer";
    if (fs::exists(ctx.config().holder_key)) {
      auto it = ctx.holder().wallet().credentials.find(credential_id);
      if (it != ctx.holder().wallet().credentials.end() &&
          it->second.credential_class == credential::CredentialClass::Derivative) {
        role = "holder";
      }
    }
  }
  std::string locator;
  if (role == "holder") {
    auto& holder = ctx.holder();
    auto& list = holder.wallet().derivative_status;
    if (!list) throw Error(Errc::NotFound, "wallet has no derivative status list");
    list = credential::revoke(*list, credential_id, holder.keys(), ctx.clock()->now());
    locator = list->locator;
    ctx.save_wallet();
  } else if (role == "issuer") {
    ctx.issuer().revoke(credential_id);
    ctx.save_issuer();
    locator = ctx.issuer().status_list().locator;
  } else {
    throw Error(Errc::InvalidArgument, "revoke role must be issuer or holder");
  }
  ctx.emit(Json{{"credential_id", credential_id}, {"locator", locator}, {"status", "revoked"}},
           credential_id + " revoked on " + locator);
}

void cmd_audit_boi(Context& ctx, const std::string& matcher_id, std::size_t trials, std::uint64_t seed, double p,
                   double bump, const std::string& job_id) {
  const auto& taxonomy = ctx.taxonomy();
  auto mean = [](const skills::SkillVector& v) {
    double s = 0.0;
    for (double x : v.values) s += x;
    return v.values.empty() ? 0.0 : s / static_cast<double>(v.values.size());
  };
  matching::Matcher h;
  if (matcher_id == "skill-only") {
    h = matching::skill_only_matcher("skill-only", mean);
  } else if (matcher_id == "institution-bump") {
    h = matching::attribute_bump_matcher("institution-bump", mean, "institution", "Elite University", bump);
  } else if (matcher_id == "pipeline") {
    const auto jobs = load_jobs(ctx.config().jobs);
    auto it = jobs.find(job_id);
    if (it == jobs.end()) throw Error(Errc::NotFound, "job " + job_id);
    auto job = it->second;
    job.tau = ctx.config().tau;
    h = matching::pipeline_matcher(job, taxonomy, ctx.provider(), ctx.config().top_k, {}, ctx.aliases());
  } else {
    throw Error(Errc::InvalidArgument, "unknown matcher '" + matcher_id + "'");
  }
  const auto gen =
      matcher_id == "pipeline"
          ? matching::non_skill_edit_generator(taxonomy.size(), taxonomy.ref())
          : matching::bernoulli_attribute_generator(taxonomy.size(), taxonomy.ref(), "institution", "Elite University", p);
  const auto est = matching::estimate_boi(h, gen, trials, seed);
  Json j = est.to_json();
  j["seed"] = seed;
  ctx.emit(j, format_real(est.value));
}

void cmd_serve(Context& ctx, const std::string& role, const std::string& bind) {
  std::string host = ctx.config().bind_host;
  int port = ctx.config().bind_port;
  if (!bind.empty()) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw Error(Errc::InvalidArgument, "--bind must be host:port");
    host = bind.substr(0, colon);
    port = std::stoi(bind.substr(colon + 1));
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Service> service;
  std::optional<protocol::Verifier> verifier;
  if (role == "issuer") {
    service = std::make_unique<IssuerService>(ctx.issuer(), ctx.registry(), ctx.status_path());
  } else if (role == "verifier") {
    verifier.emplace(ctx.keys("verifier"), ctx.verifier_policy(), ctx.verifier_enclave(), ctx.clock());
    service = std::make_unique<VerifierService>(*verifier, ctx.registry(), load_jobs(ctx.config().jobs), ctx.taxonomy(),
                                                ctx.aliases());
  } else if (role == "holder") {
    enclave::Enclave* enclave = fs::exists(ctx.enclave_path()) ? &ctx.derivation_enclave() : nullptr;
    auto holder = std::make_unique<HolderService>(ctx.holder(), enclave, ctx.wallet_path(), ctx.clock());
    if (fs::exists(ctx.key_path("issuer"))) {
      auto& issuer = ctx.issuer();
      holder->set_status_source([&issuer](const std::string& id) { return issuer.staple(id); });
    }
    service = std::move(holder);
  } else {
    throw Error(Errc::InvalidArgument, "serve role must be issuer, verifier or holder");
  }
  const int bound = service->start(host, port);
  std::cout << role << " listening on " << host << ':' << bound << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  service->stop();
}

} // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Learning and employment record toolkit", "ler"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--home", g.home, "State directory (default $LER_HOME or ./.ler)");
  app.add_option("--config", g.config, "Config document ($LER_CONFIG overrides)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "canonical"}));

  std::function<int(Context&)> action;
  auto bind = [&](CLI::App* sub, std::function<int(Context&)> fn) {
    sub->callback([&action, fn = std::move(fn)] { action = fn; });
  };
  const std::vector<std::string> roles{"issuer", "holder", "verifier"};

  std::string role, path_a, path_b, path_c, out, text_a, text_b, text_c;
  bool flag = false;

  auto* keygen = app.add_subcommand("keygen", "Generate a key pair or the enclave identity");
  keygen->add_option("--role", role, "issuer|holder|verifier|enclave")
      ->required()
      ->check(CLI::IsMember({"issuer", "holder", "verifier", "enclave"}));
  keygen->add_flag("--force", flag, "Overwrite an existing key");
  bind(keygen, [&](Context& c) { cmd_keygen(c, role, flag); return 0; });

  auto* did = app.add_subcommand("did", "DID operations");
  did->require_subcommand(1);
  auto* did_register = did->add_subcommand("register", "Register a role's DID document");
  did_register->add_option("--role", role)->required()->check(CLI::IsMember(roles));
  bind(did_register, [&](Context& c) { cmd_did_register(c, role); return 0; });

  auto* issue = app.add_subcommand("issue", "Issue a transcript credential");
  issue->add_option("--transcript", path_a, "Transcript record")->required()->check(CLI::ExistingFile);
  issue->add_option("--subject", text_a, "Subject DID (default: local holder)");
  issue->add_option("--out", out, "Write the credential here");
  bind(issue, [&](Context& c) { cmd_issue(c, path_a, text_a, out); return 0; });

  auto* derive = app.add_subcommand("derive", "Derive a skill credential inside the enclave");
  derive->add_option("--transcript", path_a, "Transcript record or credential")->required()->check(CLI::ExistingFile);
  derive->add_option("--syllabi", path_b, "Directory of syllabi")->required()->check(CLI::ExistingDirectory);
  derive->add_option("--taxonomy", path_c, "Skill taxonomy")->check(CLI::ExistingFile);
  derive->add_option("--out", out, "Write the credential here");
  bind(derive, [&](Context& c) { cmd_derive(c, path_a, path_b, path_c, out); return 0; });

  auto* wallet = app.add_subcommand("wallet", "Holder wallet");
  wallet->require_subcommand(1);
  auto* wallet_list = wallet->add_subcommand("list", "List held credentials");
  bind(wallet_list, [&](Context& c) { cmd_wallet_list(c); return 0; });
  auto* wallet_policy = wallet->add_subcommand("policy", "Disclosure policies");
  wallet_policy->require_subcommand(1);
  auto* policy_set = wallet_policy->add_subcommand("set", "Set a credential's disclosure policy");
  policy_set->add_option("--credential", text_a, "Credential id, or * for the default")->required();
  policy_set->add_option("--allow", text_b, "Comma-separated claim keys");
  policy_set->add_flag("--all", flag, "Allow every claim of the credential");
  policy_set->add_option("--id", text_c, "Policy id");
  bind(policy_set, [&](Context& c) { cmd_wallet_policy_set(c, text_a, text_b, flag, text_c); return 0; });

  auto* challenge = app.add_subcommand("challenge", "Verifier: issue a disclosure request with a fresh nonce");
  challenge->add_option("--job", text_a, "Job id")->required();
  challenge->add_option("--out", out, "Write the request here");
  bind(challenge, [&](Context& c) { cmd_challenge(c, text_a, out); return 0; });

  auto* present = app.add_subcommand("present", "Holder: answer a disclosure request");
  present->add_option("--request", path_a, "Request document")->required()->check(CLI::ExistingFile);
  present->add_option("--credential", text_a, "Credential id (default: newest derivative)");
  present->add_option("--approve", text_b, "Comma-separated subset of policy-permitted keys");
  present->add_option("--out", out, "Write the presentation here");
  bind(present, [&](Context& c) { cmd_present(c, path_a, text_a, text_b, out); return 0; });

  auto* verify = app.add_subcommand("verify", "Verifier: check a presentation without consuming its nonce");
  verify->add_option("--presentation", path_a)->required()->check(CLI::ExistingFile);
  bind(verify, [&](Context& c) { return cmd_verify(c, path_a); });

  auto* match = app.add_subcommand("match", "Verifier: verify, then match against a job");
  match->add_option("--presentation", path_a)->check(CLI::ExistingFile);
  match->add_option("--skills", text_a, "Comma-separated skill names (unverified evaluation)");
  match->add_option("--job", text_b, "Job id (default: the challenged job)");
  std::string release_text = "decision";
  match->add_option("--release", release_text)->check(CLI::IsMember({"decision", "decision+score", "full"}));
  match->callback([&] {
    if (path_a.empty() == text_a.empty()) throw CLI::ValidationError("match", "give exactly one of --presentation, --skills");
    action = [&](Context& c) { return cmd_match(c, path_a, text_a, text_b, release_text); };
  });

  auto* revoke = app.add_subcommand("revoke", "Revoke a credential on its status list");
  revoke->add_option("--credential", text_a)->required();
  revoke->add_option("--role", role, "issuer|holder (default: by credential class)")
      ->check(CLI::IsMember({"issuer", "holder"}));
  bind(revoke, [&](Context& c) { cmd_revoke(c, text_a, role); return 0; });

  auto* audit = app.add_subcommand("audit", "Fairness audits");
  audit->require_subcommand(1);
  auto* boi = audit->add_subcommand("boi", "Monte Carlo bias-opportunity index");
  std::size_t trials = 10000;
  std::uint64_t seed = matching::kDefaultAuditSeed;
  double p = 0.5, bump = 0.1;
  std::string matcher_id = "skill-only";
  std::string audit_job = "java-developer";
  boi->add_option("--matcher", matcher_id)->check(CLI::IsMember({"skill-only", "institution-bump", "pipeline"}));
  boi->add_option("--job", audit_job, "Job scored by the pipeline matcher");
  boi->add_option("--trials", trials)->check(CLI::PositiveNumber);
  boi->add_option("--seed", seed);
  boi->add_option("--p", p, "P(attribute = value)")->check(CLI::Range(0.0, 1.0));
  boi->add_option("--bump", bump, "Score bump of institution-bump");
  bind(boi, [&](Context& c) { cmd_audit_boi(c, matcher_id, trials, seed, p, bump, audit_job); return 0; });

  auto* serve = app.add_subcommand("serve", "Run a role's HTTP endpoints");
  serve->add_option("role", role)->required()->check(CLI::IsMember(roles));
  serve->add_option("--bind", text_a, "host:port");
  bind(serve, [&](Context& c) { cmd_serve(c, role, text_a); return 0; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    Context ctx(g);
    return action ? action(ctx) : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace ler::gateway

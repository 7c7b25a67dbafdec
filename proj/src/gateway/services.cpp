#include "ler/error.hpp"
#include "ler/gateway.hpp"

#include <httplib.h>

#include <algorithm>

namespace ler::gateway {

namespace {

HttpResult reject(int status, std::string_view reason, std::string_view detail = {}) {
  Json body{{"accepted", false}, {"reason", std::string(reason)}};
  if (!detail.empty()) body["detail"] = std::string(detail);
  return {status, std::move(body)};
}

int status_for(Errc code) {
  switch (code) {
  case Errc::NotFound: return 404;
  case Errc::PolicyViolation:
  case Errc::Unauthorized: return 403;
  case Errc::SessionState: return 409;
  default: return 400;
  }
}

const Json& object_body(const Json& body) {
  if (!body.is_object()) throw Error(Errc::ParseError, "request body must be a JSON object");
  return body;
}

} // namespace

Service::~Service() { stop(); }

HttpResult Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    Json parsed = body.empty() ? Json(nullptr) : parse_document(body);
    return route(method, path, parsed);
  } catch (const Error& e) {
    return reject(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return reject(400, "Malformed", e.what());
  }
}

int Service::start(const std::string& host, int port) {
  if (server_) throw Error(Errc::InvalidArgument, "service already running");
  server_ = std::make_unique<httplib::Server>();
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResult r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(canonical_serialize(r.body), "application/json");
  };
  server_->Get(R"(/.*)", dispatch);
  server_->Post(R"(/.*)", dispatch);
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    server_.reset();
    throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::stop() {
  if (!server_) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

// ---------------------------------------------------------------------------
// Issuer
// ---------------------------------------------------------------------------

IssuerService::IssuerService(protocol::Issuer& issuer, identity::DidRegistry& registry,
                             std::optional<fs::path> status_file)
    : issuer_(issuer), registry_(registry), status_file_(std::move(status_file)) {}

HttpResult IssuerService::route(const std::string& method, const std::string& path, const Json& body) {
  std::lock_guard lock(mutex_);
  if (path == "/v1/status-list") {
    if (method != "GET") return reject(405, "MethodNotAllowed");
    return {200, issuer_.status_list().to_json()};
  }
  if (path == "/v1/issue") {
    if (method != "POST") return reject(405, "MethodNotAllowed");
    const Json& req = object_body(body);
    const auto subject = identity::Did::parse(require_string(req, "subject_did"));
    if (!registry_.contains(subject)) throw Error(Errc::NotFound, "subject DID is not registered");
    const auto record = skills::Transcript::from_json(require(req, "transcript"));
    const auto vc = issuer_.issue_transcript(subject, record);
    if (status_file_) write_document_atomic(*status_file_, issuer_.status_list().to_json());
    return {200, vc.to_json()};
  }
  return reject(404, "NotFound", path);
}

// ---------------------------------------------------------------------------
// Verifier
// ---------------------------------------------------------------------------

VerifierService::VerifierService(protocol::Verifier& verifier, const identity::DidRegistry& registry,
                                 std::map<std::string, matching::JobRequirement> jobs,
                                 const skills::SkillTaxonomy& taxonomy, matching::AliasTable aliases,
                                 protocol::Release release)
    : verifier_(verifier), registry_(registry), jobs_(std::move(jobs)), taxonomy_(taxonomy),
      aliases_(std::move(aliases)), release_(release) {}

HttpResult VerifierService::route(const std::string& method, const std::string& path, const Json& body) {
  if (path == "/v1/allowlist") {
    if (method != "GET") return reject(405, "MethodNotAllowed");
    Json list = Json::array();
    for (const auto& m : verifier_.policy().measurement_allowlist) list.push_back(m.hex());
    return {200, Json{{"measurements", list}}};
  }
  if (path == "/v1/challenge") {
    if (method != "POST") return reject(405, "MethodNotAllowed");
    const Json& req = object_body(body);
    const std::string job_id = require_string(req, "job_id");
    if (!jobs_.contains(job_id)) throw Error(Errc::NotFound, "job " + job_id);
    auto [session, nonce] = verifier_.challenge();
    {
      std::lock_guard lock(mutex_);
      session_jobs_[session] = job_id;
    }
    credential::DisclosureRequest wanted;
    for (const auto& s : taxonomy_.skills()) wanted.claims.insert(s.skill_id);
    return {200, Json{{"job_id", job_id},
                      {"nonce", to_hex(nonce)},
                      {"request", wanted.to_json()},
                      {"session_id", session},
                      {"verifier_did", verifier_.did().str()}}};
  }
  if (path == "/v1/present") {
    if (method != "POST") return reject(405, "MethodNotAllowed");
    const Json& req = object_body(body);
    const std::string session = require_string(req, "session_id");
    const auto vp = credential::VerifiablePresentation::from_json(require(req, "presentation"));
    std::string job_id;
    {
      std::lock_guard lock(mutex_);
      auto it = session_jobs_.find(session);
      if (it == session_jobs_.end()) return reject(403, to_string(Reason::BadNonce), "unknown session");
      job_id = it->second;
    }
    auto response = verifier_.evaluate(session, vp, registry_, jobs_.at(job_id), taxonomy_, aliases_, release_);
    if (!response.verdict.accepted()) {
      Json out = response.released;
      out["detail"] = response.verdict.detail;
      return {403, out};
    }
    return {200, response.released};
  }
  return reject(404, "NotFound", path);
}

// ---------------------------------------------------------------------------
// Holder
// ---------------------------------------------------------------------------

HolderService::HolderService(protocol::Holder& holder, enclave::Enclave* enclave, std::optional<fs::path> wallet_path,
                             std::shared_ptr<Clock> clock)
    : holder_(holder), enclave_(enclave), clock_(std::move(clock)) {
  if (wallet_path) store_ = std::make_unique<WalletStore>(*wallet_path);
}

void HolderService::set_status_source(StatusSource source) {
  std::lock_guard lock(mutex_);
  status_source_ = std::move(source);
}

void HolderService::persist() {
  if (store_) store_->save(holder_.wallet());
}

namespace {

/// Credential a request is answered from: derivative first, then the smallest id
/// holding any requested key.
const credential::VerifiableCredential* answering_credential(const protocol::Wallet& wallet,
                                                             const credential::DisclosureRequest& request) {
  const credential::VerifiableCredential* best = nullptr;
  for (const auto& [id, vc] : wallet.credentials) {
    const bool relevant = std::ranges::any_of(request.claims, [&](const std::string& k) { return vc.find_claim(k); });
    if (!relevant) continue;
    if (best == nullptr || (vc.credential_class == credential::CredentialClass::Derivative &&
                            best->credential_class != credential::CredentialClass::Derivative)) {
      best = &vc;
    }
  }
  return best;
}

std::set<std::string> permitted_claims(const protocol::Wallet& wallet, const credential::VerifiableCredential* vc,
                                       const credential::DisclosureRequest& request) {
  std::set<std::string> out;
  if (vc == nullptr) return out;
  const auto* policy = wallet.policy_for(vc->id);
  if (policy == nullptr) return out;
  for (const auto& k : request.claims)
    if (policy->allows_claim(k) && vc->find_claim(k)) out.insert(k);
  return out;
}

} // namespace

HttpResult HolderService::route(const std::string& method, const std::string& path, const Json& body) {
  std::lock_guard lock(mutex_);
  auto& wallet = holder_.wallet();

  if (path == "/v1/wallet") {
    if (method != "GET") return reject(405, "MethodNotAllowed");
    Json items = Json::array();
    for (const auto& [id, vc] : wallet.credentials) {
      Json keys = Json::array();
      for (const auto& c : vc.claims) keys.push_back(c.key);
      items.push_back({{"claim_keys", keys},
                       {"class", std::string(to_string(vc.credential_class))},
                       {"expires_at", vc.expires_at ? Json(*vc.expires_at) : Json(nullptr)},
                       {"id", id},
                       {"issuer_did", vc.issuer_did.str()}});
    }
    return {200, Json{{"credentials", items}, {"holder_did", holder_.did().str()}}};
  }

  if (path == "/v1/wallet/requests") {
    if (method == "GET") {
      Json list = Json::array();
      for (const auto& [id, r] : wallet.pending) {
        const auto* vc = answering_credential(wallet, r.request);
        const auto permitted = permitted_claims(wallet, vc, r.request);
        Json j = r.to_json();
        j.erase("nonce");
        j["credential_id"] = vc ? Json(vc->id) : Json(nullptr);
        j["permitted"] = permitted;
        list.push_back(std::move(j));
      }
      return {200, Json{{"requests", list}}};
    }
    if (method != "POST") return reject(405, "MethodNotAllowed");
    const Json& req = object_body(body);
    protocol::PendingRequest pending;
    pending.request_id = "req-" + system_random()->hex_id(8);
    pending.verifier_did = identity::Did::parse(require_string(req, "verifier_did")).str();
    pending.session_id = require_string(req, "session_id");
    pending.nonce = require_hex(req, "nonce");
    if (pending.nonce.empty()) throw Error(Errc::InvalidArgument, "empty nonce");
    pending.request = credential::DisclosureRequest::from_json(require(req, "request"));
    pending.job_id = require_string(req, "job_id");
    pending.received_at = clock_->now();
    wallet.pending.emplace(pending.request_id, pending);
    persist();
    return {200, Json{{"request_id", pending.request_id}}};
  }

  if (path == "/v1/wallet/approve") {
    if (method != "POST") return reject(405, "MethodNotAllowed");
    const Json& req = object_body(body);
    const std::string request_id = require_string(req, "request_id");
    const std::string decision = require_string(req, "decision");
    if (decision != "approve" && decision != "deny") throw Error(Errc::ParseError, "decision must be approve or deny");

    if (auto done = wallet.presentations.find(request_id); done != wallet.presentations.end()) {
      if (decision == "deny") return reject(409, "SessionState", "request already approved");
      return {200, Json{{"presentation", done->second.to_json()}, {"request_id", request_id}, {"status", "approved"}}};
    }
    auto it = wallet.pending.find(request_id);
    if (it == wallet.pending.end()) throw Error(Errc::NotFound, "request " + request_id);
    if (decision == "deny") {
      wallet.pending.erase(it);
      persist();
      return {200, Json{{"request_id", request_id}, {"status", "denied"}}};
    }

    const auto& pending = it->second;
    const auto* vc = answering_credential(wallet, pending.request);
    if (req.contains("credential_id")) {
      auto c = wallet.credentials.find(require_string(req, "credential_id"));
      if (c == wallet.credentials.end()) throw Error(Errc::NotFound, "credential");
      vc = &c->second;
    }
    if (vc == nullptr) throw Error(Errc::NotFound, "no credential answers this request");
    const auto permitted = permitted_claims(wallet, vc, pending.request);
    std::set<std::string> chosen;
    const Json& claims = require(req, "claims");
    if (!claims.is_array()) throw Error(Errc::ParseError, "claims must be an array");
    for (const auto& k : claims) {
      if (!k.is_string()) throw Error(Errc::ParseError, "claim keys must be strings");
      const auto key = k.get<std::string>();
      if (!permitted.contains(key)) throw Error(Errc::PolicyViolation, "claim '" + key + "' is not permitted");
      chosen.insert(key);
    }
    std::optional<credential::StatusSnippet> snippet;
    if (vc->credential_class != credential::CredentialClass::Derivative && status_source_)
      snippet = status_source_(vc->id);
    auto vp = holder_.present(pending, vc->id, chosen, enclave_, snippet ? &*snippet : nullptr);
    wallet.presentations.emplace(request_id, vp);
    wallet.pending.erase(request_id);
    persist();
    return {200, Json{{"presentation", vp.to_json()}, {"request_id", request_id}, {"status", "approved"}}};
  }
  return reject(404, "NotFound", path);
}

} // namespace ler::gateway

#include "ler/error.hpp"
#include "ler/gateway.hpp"
#include "support/world.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <random>

using namespace ler;
using namespace ler::gateway;
using namespace ler::testing;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("ler-gw-" + system_random()->hex_id(6))) { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
};

std::string body(const Json& j) { return canonical_serialize(j); }

struct VerifierRig {
  World w;
  VerifierService service;

  explicit VerifierRig(const std::string& seed)
      : w(seed), service(*w.verifier, w.registry, w.jobs, w.taxonomy, w.aliases, protocol::Release::Full) {}

  /// Challenge over the service, presentation from the holder.
  std::pair<std::string, credential::VerifiablePresentation> challenge_and_present(const std::string& id) {
    const auto r = service.handle("POST", "/v1/challenge", body(Json{{"job_id", "java-developer"}}));
    EXPECT_EQ(r.status, 200);
    protocol::PendingRequest p;
    p.request_id = r.body.at("session_id");
    p.session_id = r.body.at("session_id");
    p.verifier_did = r.body.at("verifier_did");
    p.nonce = from_hex(r.body.at("nonce").get<std::string>());
    p.request = credential::DisclosureRequest::from_json(r.body.at("request"));
    p.job_id = r.body.at("job_id");
    std::set<std::string> approved(p.request.claims);
    return {p.session_id, w.holder->present(p, id, approved, w.enclave.get())};
  }
};

} // namespace

TEST(VerifierServiceTest, ChallengePresentAndReplay) {
  VerifierRig rig("svc-verifier");
  const auto id = rig.w.derive().credential.id;
  rig.w.allow_all(id);
  auto [session, vp] = rig.challenge_and_present(id);
  const std::string payload = body(Json{{"presentation", vp.to_json()}, {"session_id", session}});
  const auto ok = rig.service.handle("POST", "/v1/present", payload);
  EXPECT_EQ(ok.status, 200) << ok.body.dump();
  EXPECT_EQ(ok.body.at("accepted"), true);
  EXPECT_EQ(ok.body.at("match").at("overlap"), 0.8);

  const auto replay = rig.service.handle("POST", "/v1/present", payload);
  EXPECT_EQ(replay.status, 403);
  EXPECT_EQ(replay.body.at("reason"), "BadNonce");

  const auto unknown = rig.service.handle("POST", "/v1/present",
                                          body(Json{{"presentation", vp.to_json()}, {"session_id", "vs-unknown"}}));
  EXPECT_EQ(unknown.status, 403);
  EXPECT_EQ(unknown.body.at("reason"), "BadNonce");

  EXPECT_EQ(rig.service.handle("POST", "/v1/challenge", body(Json{{"job_id", "astronaut"}})).status, 404);
  EXPECT_EQ(rig.service.handle("GET", "/v1/challenge", "").status, 405);
  const auto allow = rig.service.handle("GET", "/v1/allowlist", "");
  EXPECT_EQ(allow.body.at("measurements").at(0), rig.w.enclave->measurement().hex());
}

TEST(VerifierServiceTest, StaleNonceIsRejected) {
  VerifierRig rig("svc-stale");
  const auto id = rig.w.derive().credential.id;
  rig.w.allow_all(id);
  auto [session, vp] = rig.challenge_and_present(id);
  rig.w.clock->advance(rig.w.verifier_policy.nonce_ttl + 1);
  const auto r =
      rig.service.handle("POST", "/v1/present", body(Json{{"presentation", vp.to_json()}, {"session_id", session}}));
  EXPECT_EQ(r.status, 403);
  EXPECT_EQ(r.body.at("reason"), "BadNonce");
}

TEST(IssuerServiceTest, IssueAndSignedStatusList) {
  World w("svc-issuer");
  TempDir tmp;
  IssuerService service(*w.issuer, w.registry, tmp.path / "status.json");
  const auto r = service.handle("POST", "/v1/issue",
                                body(Json{{"subject_did", w.holder->did().str()}, {"transcript", w.transcript.to_json()}}));
  ASSERT_EQ(r.status, 200) << r.body.dump();
  const auto vc = credential::VerifiableCredential::from_json(r.body);
  EXPECT_TRUE(w.holder->receive(vc, w.issuer->document()).accepted());

  const auto list = credential::StatusList::from_json(service.handle("GET", "/v1/status-list", "").body);
  EXPECT_TRUE(list.signature_valid());
  EXPECT_EQ(credential::status(list, w.issuer->document(), vc.id), credential::CredentialStatus::Valid);
  EXPECT_EQ(credential::StatusList::from_json(read_document(tmp.path / "status.json")), list);

  const auto stranger = identity::gen_did(identity::KeyPair::generate().public_key).did;
  EXPECT_EQ(service
                .handle("POST", "/v1/issue",
                        body(Json{{"subject_did", stranger.str()}, {"transcript", w.transcript.to_json()}}))
                .status,
            404);
}

namespace {

struct HolderRig {
  World w;
  TempDir tmp;
  std::string inst_id;
  HolderService service;

  explicit HolderRig(const std::string& seed)
      : w(seed), inst_id(w.issue()), service(*w.holder, w.enclave.get(), tmp.path / "wallet.json", w.clock) {
    service.set_status_source([this](const std::string& id) { return w.issuer->staple(id); });
  }

  std::string post_request(const std::set<std::string>& claims, const Bytes& nonce) {
    credential::DisclosureRequest req;
    req.claims = claims;
    const auto r = service.handle("POST", "/v1/wallet/requests",
                                  body(Json{{"job_id", "java-developer"},
                                            {"nonce", to_hex(nonce)},
                                            {"request", req.to_json()},
                                            {"session_id", "vs-1"},
                                            {"verifier_did", w.verifier->did().str()}}));
    EXPECT_EQ(r.status, 200) << r.body.dump();
    return r.body.at("request_id");
  }

  HttpResult decide(const std::string& request_id, const std::string& decision, const Json& claims) {
    return service.handle("POST", "/v1/wallet/approve",
                          body(Json{{"claims", claims}, {"decision", decision}, {"request_id", request_id}}));
  }
};

} // namespace

TEST(HolderServiceTest, PolicyLimitsWhatCanBeApproved) {
  HolderRig rig("svc-holder");
  const std::string grade = "course.CS101.grade";
  rig.w.holder->wallet().policies[rig.inst_id] = credential::DisclosurePolicy{"grades", {grade}, {}, true};
  const Bytes nonce = to_bytes("holder-nonce");
  const auto rid = rig.post_request({grade, "student_id"}, nonce);

  const auto listed = rig.service.handle("GET", "/v1/wallet/requests", "");
  ASSERT_EQ(listed.body.at("requests").size(), 1u);
  const auto& entry = listed.body.at("requests").at(0);
  EXPECT_EQ(entry.at("permitted"), Json::array({grade}));
  EXPECT_EQ(entry.at("credential_id"), rig.inst_id);
  EXPECT_FALSE(entry.contains("nonce"));

  const auto denied = rig.decide(rid, "approve", Json::array({grade, "student_id"}));
  EXPECT_EQ(denied.status, 403);
  EXPECT_EQ(denied.body.at("reason"), "PolicyViolation");

  const auto ok = rig.decide(rid, "approve", Json::array({grade}));
  ASSERT_EQ(ok.status, 200) << ok.body.dump();
  const auto vp = credential::VerifiablePresentation::from_json(ok.body.at("presentation"));
  ASSERT_EQ(vp.revealed.size(), 1u);
  EXPECT_EQ(vp.revealed[0].key, grade);
  EXPECT_TRUE(credential::verify(vp, rig.w.context(vp, nonce)).accepted());

  const auto again = rig.decide(rid, "approve", Json::array({grade}));
  EXPECT_EQ(again.status, 200);
  EXPECT_EQ(again.body, ok.body);
  EXPECT_EQ(rig.decide(rid, "deny", Json::array()).status, 409);

  const auto stored = WalletStore(rig.tmp.path / "wallet.json").load();
  EXPECT_TRUE(stored.pending.empty());
  EXPECT_EQ(stored.presentations.at(rid), vp);
}

TEST(HolderServiceTest, DenyDiscardsTheRequest) {
  HolderRig rig("svc-deny");
  rig.w.allow_all(rig.inst_id);
  const auto rid = rig.post_request({"institution"}, to_bytes("n"));
  const auto d = rig.decide(rid, "deny", Json::array());
  EXPECT_EQ(d.status, 200);
  EXPECT_EQ(d.body.at("status"), "denied");
  EXPECT_EQ(rig.decide(rid, "approve", Json::array({"institution"})).status, 404);
  EXPECT_EQ(rig.decide(rid, "maybe", Json::array()).status, 400);
}

TEST(HolderServiceTest, DerivativeApprovalReattests) {
  HolderRig rig("svc-derived");
  const auto id = rig.w.derive(rig.inst_id).credential.id;
  rig.w.allow_all(id);
  const auto& vc = rig.w.holder->wallet().credentials.at(id);
  std::set<std::string> keys;
  for (const auto& c : vc.claims) keys.insert(c.key);
  const Bytes nonce = to_bytes("derived-nonce");
  const auto rid = rig.post_request(keys, nonce);
  const auto ok = rig.decide(rid, "approve", Json(std::vector<std::string>(keys.begin(), keys.end())));
  ASSERT_EQ(ok.status, 200) << ok.body.dump();
  const auto vp = credential::VerifiablePresentation::from_json(ok.body.at("presentation"));
  ASSERT_TRUE(vp.attestation);
  EXPECT_EQ(vp.attestation->n_v, nonce);
  EXPECT_TRUE(credential::verify(vp, rig.w.context(vp, nonce)).accepted());

  const auto wallet = rig.service.handle("GET", "/v1/wallet", "");
  EXPECT_EQ(wallet.body.at("credentials").size(), 2u);
  EXPECT_EQ(wallet.body.at("holder_did"), rig.w.holder->did().str());
}

TEST(ServiceFuzz, MalformedBodiesGiveClientErrors) {
  HolderRig rig("fuzz");
  IssuerService issuer(*rig.w.issuer, rig.w.registry);
  VerifierService verifier(*rig.w.verifier, rig.w.registry, rig.w.jobs, rig.w.taxonomy, rig.w.aliases);
  const std::vector<std::pair<Service*, std::vector<std::string>>> targets{
      {&issuer, {"/v1/issue", "/v1/status-list", "/nope"}},
      {&verifier, {"/v1/challenge", "/v1/present", "/v1/allowlist"}},
      {&rig.service, {"/v1/wallet", "/v1/wallet/requests", "/v1/wallet/approve"}}};
  const std::vector<Json> shapes{Json(nullptr), Json(1), Json("x"), Json::array(), Json::object(),
                                 Json{{"job_id", 3}}, Json{{"session_id", "s"}, {"presentation", Json::object()}},
                                 Json{{"request_id", "r"}, {"decision", "approve"}, {"claims", "x"}},
                                 Json{{"subject_did", "did:ler:x"}, {"transcript", Json::array()}},
                                 Json{{"verifier_did", "nope"}, {"nonce", "zz"}, {"request", 1}}};
  std::mt19937_64 gen(99);
  for (int i = 0; i < 3000; ++i) {
    auto& [service, paths] = targets[gen() % targets.size()];
    const auto& path = paths[gen() % paths.size()];
    std::string payload;
    switch (gen() % 3) {
    case 0: {
      payload.resize(gen() % 64);
      for (auto& c : payload) c = static_cast<char>(gen());
      break;
    }
    case 1: payload = shapes[gen() % shapes.size()].dump(); break;
    default: {
      payload = shapes[gen() % shapes.size()].dump();
      if (!payload.empty()) payload.erase(gen() % payload.size(), 1);
    }
    }
    const auto r = service->handle(gen() % 2 ? "POST" : "GET", path, payload);
    if (r.status == 200) {
      // Only read-only routes may succeed on junk.
      EXPECT_TRUE(path == "/v1/status-list" || path == "/v1/allowlist" || path == "/v1/wallet" ||
                  path == "/v1/wallet/requests")
          << path << " " << payload;
    } else {
      EXPECT_GE(r.status, 400) << path;
      EXPECT_LT(r.status, 500) << path;
      EXPECT_EQ(r.body.at("accepted"), false);
      EXPECT_TRUE(r.body.at("reason").is_string());
    }
  }
}

TEST(WalletStoreTest, SaveLoadIsByteStable) {
  World w("store");
  const auto id = w.derive().credential.id;
  w.allow_all(id);
  TempDir tmp;
  WalletStore store(tmp.path / "nested" / "wallet.json");
  EXPECT_FALSE(store.exists());
  EXPECT_TRUE(store.load().credentials.empty());
  store.save(w.holder->wallet());
  const auto first = read_text_file(store.path());
  store.save(store.load());
  EXPECT_EQ(read_text_file(store.path()), first);
  EXPECT_EQ(first, canonical_serialize(w.holder->wallet().to_json()));
  {
    std::ofstream(store.path()) << "{not json";
  }
  EXPECT_THROW(store.load(), Error);
}

TEST(ConfigTest, DefaultsValidateAndRoundTrip) {
  TempDir tmp;
  auto c = Config::defaults(tmp.path);
  EXPECT_EQ(c.taxonomy, data_dir() / "onet_sample.tsv");
  EXPECT_THROW(c.validate(), Error);  // registry and allowlist not created yet
  fs::create_directories(c.registry);
  std::ofstream(c.allowlist) << "# none\n";
  std::ofstream(c.trust_anchor) << "00\n";
  EXPECT_NO_THROW(c.validate());

  const auto again = Config::from_json(c.to_json(), tmp.path);
  EXPECT_EQ(again.to_json(), c.to_json());

  auto bad = c;
  bad.tau = 1.5;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.freshness = 0;
  EXPECT_THROW(bad.validate(), Error);

  Json rel = c.to_json();
  rel["taxonomy"] = "tax.tsv";
  EXPECT_EQ(Config::from_json(rel, tmp.path).taxonomy, tmp.path / "tax.tsv");
  rel["bind"] = "localhost";
  EXPECT_THROW(Config::from_json(rel, tmp.path), Error);
  rel["bind"] = "localhost:8800";
  EXPECT_EQ(Config::from_json(rel, tmp.path).bind_port, 8800);
}

TEST(ConfigTest, AllowlistAndDataLoaders) {
  TempDir tmp;
  World w("loaders");
  std::ofstream(tmp.path / "allow.txt") << "# reference build\n" << w.enclave->measurement().hex() << "\n\n";
  const auto allow = load_allowlist(tmp.path / "allow.txt");
  ASSERT_EQ(allow.size(), 1u);
  EXPECT_EQ(*allow.begin(), w.enclave->measurement());
  std::ofstream(tmp.path / "bad.txt") << "zz\n";
  EXPECT_THROW(load_allowlist(tmp.path / "bad.txt"), Error);
  EXPECT_THROW(load_syllabi(tmp.path / "missing"), Error);
  const auto syllabi = fixture_syllabi();
  ASSERT_EQ(syllabi.size(), 6u);
  EXPECT_EQ(syllabi.front().course_id, "CS101");
  EXPECT_EQ(fixture_jobs().size(), 2u);
  EXPECT_NE(reference_bundle(w.provider).code_id, verifier_bundle(w.provider).code_id);
}

TEST(HttpTest, ServesOnEphemeralPort) {
  VerifierRig rig("http");
  const int port = rig.service.start("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  EXPECT_THROW(rig.service.start("127.0.0.1", 0), Error);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/v1/allowlist");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(parse_document(res->body).at("measurements").at(0), rig.w.enclave->measurement().hex());
  res = client.Post("/v1/challenge", "{\"job_id\":\"java-developer\"}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Post("/v1/challenge", "][", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  rig.service.stop();
  rig.service.stop();
  EXPECT_FALSE(httplib::Client("127.0.0.1", port).Get("/v1/allowlist"));
}

#include "ler/credential.hpp"
#include "ler/error.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace ler;
using namespace ler::credential;

namespace {

struct Party {
  KeyPair keys;
  identity::GeneratedDid id;

  explicit Party(std::string_view seed) {
    DeterministicRandom rng(seed);
    keys = KeyPair::from_seed(rng.bytes(32));
    id = identity::gen_did(keys.public_key);
  }
};

constexpr Timestamp kT0 = 1'700'000'000;

class CredentialTest : public ::testing::Test {
protected:
  Party issuer{"issuer"};
  Party holder{"holder"};
  DeterministicRandom rng{"cred"};
  protocol::VerifierPolicy policy;
  StatusList list = create_status_list(issuer.keys, issuer.id.did, ListKind::Institutional, "status/inst", kT0);

  VerifiableCredential make(std::optional<Seconds> lifetime = std::nullopt) {
    IssueOptions o;
    o.now = kT0;
    o.rng = &rng;
    o.id = "vc-1";
    o.status_ref = {"status/inst", 0};
    list = register_entry(list, "vc-1", issuer.keys, kT0);
    return issue(issuer.keys, issuer.id.did, holder.id.did,
                 {{"grade", std::string("A")}, {"gpa", 3.8}, {"ssn", std::string("123-45-6789")}, {"credits", std::int64_t{120}}},
                 CredentialClass::Institutional, std::nullopt, lifetime, o);
  }

  DisclosurePolicy grade_only() const { return {"p", {"grade", "gpa"}, {{"gpa", Comparator::Ge, 3.0}}, true}; }

  VerifiablePresentation present_now(const VerifiableCredential& vc, const DisclosureRequest& req,
                                     const Bytes& nonce, Timestamp at = kT0) {
    PresentOptions o;
    o.now = at;
    return present(vc, grade_only(), req, holder.keys, nonce, staple(list, vc.id, issuer.keys, at), o);
  }

  Verdict check(const VerifiablePresentation& vp, const Bytes& nonce, Timestamp now = kT0) {
    return verify(vp, VerifyContext{issuer.id.document, holder.id.document, policy, nonce, now});
  }
};

} // namespace

TEST_F(CredentialTest, DigestsRecomputeAndSaltsAreUnique) {
  const auto vc = make();
  ASSERT_EQ(vc.claims.size(), vc.claim_digests.size());
  std::set<Bytes> salts;
  for (std::size_t i = 0; i < vc.claims.size(); ++i) {
    EXPECT_EQ(vc.claims[i].salt.size(), kSaltSize);
    EXPECT_EQ(claim_digest(vc.claims[i].salt, vc.claims[i].key, vc.claims[i].value), vc.claim_digests[i]);
    salts.insert(vc.claims[i].salt);
  }
  EXPECT_EQ(salts.size(), vc.claims.size());
  EXPECT_TRUE(verify_issuer_signature(vc, issuer.id.document));
  EXPECT_TRUE(verify_claim_digests(vc));
}

TEST_F(CredentialTest, ClaimDigestMatchesIndependentEncoding) {
  const Bytes salt(16, 0x11);
  Bytes buf = salt;
  for (char c : std::string("\"grade\"\"A\"")) buf.push_back(static_cast<std::uint8_t>(c));
  EXPECT_EQ(claim_digest(salt, "grade", std::string("A")), sha256(buf));
  EXPECT_NE(claim_digest(salt, "n", std::string("3")), claim_digest(salt, "n", std::int64_t{3}));
}

TEST_F(CredentialTest, JsonRoundTripIsCanonicalStable) {
  const auto vc = make(3600);
  const auto again = VerifiableCredential::from_json(parse_document(canonical_serialize(vc.to_json())));
  EXPECT_EQ(again, vc);
  EXPECT_EQ(canonical_serialize(again.to_json()), canonical_serialize(vc.to_json()));
}

TEST_F(CredentialTest, IssueErrors) {
  IssueOptions o;
  o.now = kT0;
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  EXPECT_EQ(code_of([&] { issue(issuer.keys, issuer.id.did, holder.id.did, {}, CredentialClass::Institutional); }),
            Errc::EmptyClaims);
  EXPECT_EQ(code_of([&] {
              issue(issuer.keys, issuer.id.did, holder.id.did, {{"a", 1.0}}, CredentialClass::Derivative);
            }),
            Errc::MissingProvenance);
  EXPECT_THROW(issue(issuer.keys, issuer.id.did, holder.id.did, {{"a", 1.0}, {"a", 2.0}}, CredentialClass::SelfIssued),
               Error);
  EXPECT_THROW(issue(issuer.keys, issuer.id.did, holder.id.did, {{"a", 1.0}}, CredentialClass::Institutional,
                     enclave::Provenance{}),
               Error);
}

TEST_F(CredentialTest, PresentRevealsExactlyRequestIntersectPolicy) {
  const auto vc = make();
  const Bytes nonce = to_bytes("nonce-1");
  const auto vp = present_now(vc, DisclosureRequest{{"grade", "ssn"}, {}}, nonce);
  ASSERT_EQ(vp.revealed.size(), 1u);
  EXPECT_EQ(vp.revealed[0].key, "grade");
  EXPECT_TRUE(vp.credential.claims.empty());
  EXPECT_EQ(vp.credential.claim_digests, vc.claim_digests);
  EXPECT_TRUE(check(vp, nonce).accepted());
  const std::string wire = canonical_serialize(vp.to_json());
  EXPECT_EQ(wire.find("123-45-6789"), std::string::npos);
}

TEST_F(CredentialTest, PredicatesAreEvaluatedAndPolicyFiltered) {
  const auto vc = make();
  const Bytes nonce = to_bytes("nonce-p");
  DisclosureRequest req{{}, {{"gpa", Comparator::Ge, 3.0}, {"credits", Comparator::Ge, 100}}};
  const auto vp = present_now(vc, req, nonce);
  ASSERT_EQ(vp.predicate_results.size(), 1u);
  EXPECT_TRUE(vp.predicate_results[0].result);
  EXPECT_TRUE(vp.revealed.empty());
  EXPECT_TRUE(check(vp, nonce).accepted());
}

TEST_F(CredentialTest, PresentErrors) {
  const auto vc = make(60);
  const Bytes nonce = to_bytes("n");
  try {
    present_now(vc, DisclosureRequest{{"ssn"}, {}}, nonce);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyDisclosure);
  }
  try {
    present_now(vc, DisclosureRequest{{"grade"}, {}}, nonce, kT0 + 61);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Expired);
  }
  DisclosurePolicy strict = grade_only();
  strict.default_deny = false;
  PresentOptions o;
  o.now = kT0;
  try {
    present(vc, strict, DisclosureRequest{{"grade", "ssn"}, {}}, holder.keys, nonce, staple(list, vc.id, issuer.keys, kT0), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PolicyViolation);
  }
}

TEST_F(CredentialTest, VerifyReasons) {
  const auto vc = make(3600);
  const Bytes nonce = to_bytes("nonce-r");
  const auto good = present_now(vc, DisclosureRequest{{"grade"}, {}}, nonce);
  EXPECT_TRUE(check(good, nonce).accepted());

  auto tampered = good;
  tampered.revealed[0].value = std::string("F");
  EXPECT_EQ(check(tampered, nonce).reason, Reason::DigestMismatch);

  auto resigned = good;
  resigned.credential.issued_at += 1;
  EXPECT_EQ(check(resigned, nonce).reason, Reason::BadIssuerSig);

  auto badsig = good;
  badsig.holder_signature[0] ^= 1;
  EXPECT_EQ(check(badsig, nonce).reason, Reason::BadHolderSig);

  EXPECT_EQ(check(good, to_bytes("other")).reason, Reason::BadNonce);
  EXPECT_EQ(check(good, nonce, kT0 + 301).reason, Reason::StaleStatus);

  const auto late = present_now(vc, DisclosureRequest{{"grade"}, {}}, nonce, kT0 + 3500);
  EXPECT_EQ(check(late, nonce, kT0 + 3601).reason, Reason::Expired);

  list = revoke(list, vc.id, issuer.keys, kT0);
  const auto revoked = present_now(vc, DisclosureRequest{{"grade"}, {}}, nonce);
  EXPECT_EQ(check(revoked, nonce).reason, Reason::Revoked);
}

TEST_F(CredentialTest, ForeignStatusSnippetIsBadStatusSig) {
  const auto vc = make();
  const Party other("other-issuer");
  auto other_list = create_status_list(other.keys, other.id.did, ListKind::Institutional, "x", kT0);
  other_list = register_entry(other_list, vc.id, other.keys, kT0);
  PresentOptions o;
  o.now = kT0;
  const Bytes nonce = to_bytes("n2");
  const auto vp = present(vc, grade_only(), DisclosureRequest{{"grade"}, {}}, holder.keys, nonce,
                          staple(other_list, vc.id, other.keys, kT0), o);
  EXPECT_EQ(check(vp, nonce).reason, Reason::BadStatusSig);
}

TEST_F(CredentialTest, StatusListSemantics) {
  EXPECT_TRUE(list.signature_valid());
  EXPECT_EQ(status(list, "never-registered"), CredentialStatus::Valid);
  auto d = create_status_list(holder.keys, holder.id.did, ListKind::Derivative, "status/der", kT0);
  EXPECT_EQ(status(d, "never-registered"), CredentialStatus::RevokedUnknown);
  d = register_entry(d, "x", holder.keys, kT0);
  EXPECT_EQ(status(d, "x"), CredentialStatus::Valid);
  const auto r1 = revoke(d, "x", holder.keys, kT0 + 5);
  const auto r2 = revoke(r1, "x", holder.keys, kT0 + 5);
  EXPECT_EQ(status(r2, "x"), CredentialStatus::Revoked);
  EXPECT_EQ(r1.entries, r2.entries);
  EXPECT_EQ(status(register_entry(r2, "x", holder.keys, kT0 + 6), "x"), CredentialStatus::Revoked);

  auto forged = r2;
  forged.entries["x"] = EntryState::Valid;
  try {
    status(forged, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadListSig);
  }
  try {
    revoke(d, "x", issuer.keys, kT0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Unauthorized);
  }
  EXPECT_THROW(status(d, issuer.id.document, "x"), Error);
  EXPECT_EQ(StatusList::from_json(r2.to_json()), r2);
}

TEST_F(CredentialTest, PresentationJsonRoundTrip) {
  const auto vc = make();
  const Bytes nonce = to_bytes("rt");
  const auto vp = present_now(vc, DisclosureRequest{{"grade", "gpa"}, {{"gpa", Comparator::Ge, 3.0}}}, nonce);
  const auto again = VerifiablePresentation::from_json(parse_document(canonical_serialize(vp.to_json())));
  EXPECT_EQ(again, vp);
  EXPECT_TRUE(check(again, nonce).accepted());
}

TEST(DisclosurePolicyJson, RejectsNonStringClaims) {
  Json j{{"policy_id", "p"}, {"allowed_claims", Json::array({1})}, {"allowed_predicates", Json::array()},
         {"default_deny", true}};
  EXPECT_THROW(DisclosurePolicy::from_json(j), Error);
}

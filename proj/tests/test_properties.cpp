#include "ler/error.hpp"
#include "ler/protocol.hpp"
#include "support/mutation.hpp"
#include "support/suites.hpp"
#include "support/world.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ler;
using namespace ler::testing;

namespace {

void expect_passed(const SuiteReport& r) {
  for (const auto& f : r.failures) ADD_FAILURE() << f;
  EXPECT_GT(r.trials, 0u);
}

} // namespace

// 10^4 single-field mutations across presentations, credentials and evidence.
TEST(Unforgeability, TenThousandMutationsAreAllRejected) {
  const auto r = run_forgery_suite(2024);
  expect_passed(r);
  EXPECT_EQ(r.trials, 10000u);
  EXPECT_EQ(r.rejected, r.trials);
}

TEST(Mutation, LeafMutationsChangeExactlyOneLeafAndPreserveType) {
  std::mt19937_64 gen(5);
  const Json doc{{"hex", "00ff10"},
                 {"did", "did:ler:abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQ"},
                 {"n", 1700000000},
                 {"x", 0.25},
                 {"kind", "derivative"},
                 {"list", Json::array({"a1b2", 3})}};
  const auto leaves = mutable_leaves(doc);
  EXPECT_EQ(leaves.size(), 7u);
  for (int i = 0; i < 500; ++i) {
    const auto& ptr = leaves[gen() % leaves.size()];
    const Json m = mutate_leaf(doc, ptr, gen);
    const auto p = Json::json_pointer(ptr);
    EXPECT_NE(m.at(p), doc.at(p)) << ptr;
    EXPECT_EQ(m.at(p).type(), doc.at(p).type()) << ptr;
    auto restored = m;
    restored[p] = doc.at(p);
    EXPECT_EQ(restored, doc);
  }
}

TEST(Confidentiality, NoRawInputWindowLeavesTheDerivation) { expect_passed(run_window_scan()); }

// Full release echoes the verifier's own job requirement.
TEST(Confidentiality, FullReleaseOnlySharesPublicVocabulary) { expect_passed(run_full_release_scan()); }

TEST(Confidentiality, DistinctInputsWithEqualClaimsGiveEqualOutputs) { expect_passed(run_indistinguishability()); }

TEST(Confidentiality, SealedStateNeedsTheEnclaveKey) { expect_passed(run_sealing_check()); }

TEST(Freshness, StapleAgeBoundaryHoldsForRandomWindows) {
  Fixture f("fresh");
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    auto policy = f.w.verifier_policy;
    policy.freshness = 1 + static_cast<Seconds>(gen() % 900);
    policy.attestation_max_age = 100000;
    const std::string id = trial % 2 ? f.inst_id : f.derived_id;
    auto [session, vp] = f.w.challenge_and_present(id);
    const Seconds age = static_cast<Seconds>(gen() % (2 * static_cast<std::uint64_t>(policy.freshness) + 2));
    const auto issuer = f.w.registry.resolve(vp.credential.issuer_did);
    const auto holder = f.w.registry.resolve(vp.credential.subject_did);
    const auto v = credential::verify(
        vp, credential::VerifyContext{issuer, holder, policy, vp.nonce, vp.stapled_status.issued_at + age});
    if (age <= policy.freshness) {
      EXPECT_TRUE(v.accepted()) << age << " " << policy.freshness << " " << v.detail;
    } else {
      EXPECT_EQ(v.reason, Reason::StaleStatus) << age << " " << policy.freshness;
    }
  }
}

TEST(Freshness, DefaultWindowAndReplay) {
  Fixture f("fresh-default");
  auto [session, vp] = f.w.challenge_and_present(f.derived_id);
  const Timestamp t0 = vp.stapled_status.issued_at;
  const auto issuer = f.w.registry.resolve(vp.credential.issuer_did);
  const auto holder = f.w.registry.resolve(vp.credential.subject_did);
  auto policy = f.w.verifier_policy;
  policy.attestation_max_age = 1000;
  auto at = [&](Timestamp now) {
    return credential::verify(vp, credential::VerifyContext{issuer, holder, policy, vp.nonce, now});
  };
  EXPECT_TRUE(at(t0 + 300).accepted());
  EXPECT_EQ(at(t0 + 301).reason, Reason::StaleStatus);

  const auto job = f.w.jobs.at("java-developer");
  EXPECT_TRUE(f.w.verifier->evaluate(session, vp, f.w.registry, job, f.w.taxonomy, f.w.aliases,
                                     protocol::Release::DecisionOnly)
                  .verdict.accepted());
  EXPECT_EQ(f.w.verifier->evaluate(session, vp, f.w.registry, job, f.w.taxonomy, f.w.aliases,
                                   protocol::Release::DecisionOnly)
                .verdict.reason,
            Reason::BadNonce);
}

TEST(SkillOnly, NonSkillTranscriptEditsLeaveSkillClaimsUnchanged) {
  auto claims_of = [](const credential::VerifiableCredential& vc) {
    std::vector<std::pair<std::string, credential::ClaimValue>> out;
    for (const auto& c : vc.claims) out.emplace_back(c.key, c.value);
    return out;
  };
  World base("nonskill");
  const auto reference = claims_of(base.derive().credential);
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 5; ++trial) {
    World w("nonskill");
    w.transcript.institution = "Institution " + std::to_string(gen() % 1000);
    w.transcript.student_name = "Student " + std::to_string(gen() % 1000);
    w.transcript.student_id = "ID" + std::to_string(gen());
    EXPECT_EQ(claims_of(w.derive().credential), reference) << trial;
  }
}

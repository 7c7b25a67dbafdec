#include "ler/error.hpp"
#include "ler/matching.hpp"
#include "support/world.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ler;
using namespace ler::matching;
using namespace ler::testing;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::InvalidArgument;
}

std::vector<SkillClaim> claims_from(const std::vector<std::string>& names) {
  std::vector<SkillClaim> out;
  for (const auto& n : names) out.push_back({n, n, 1.0});
  return out;
}

double mean(const skills::SkillVector& v) {
  double s = 0;
  for (double x : v.values) s += x;
  return s / static_cast<double>(v.values.size());
}

} // namespace

TEST(Overlap, FixtureValues) {
  const auto jobs = fixture_jobs();
  const auto s = fixture_candidate_skills();
  const auto aliases = fixture_aliases();
  EXPECT_EQ(binary_overlap(s, jobs.at("java-developer").required_skills, aliases), 0.8);
  EXPECT_EQ(binary_overlap(s, jobs.at("csharp-developer").required_skills, aliases), 0.7);
  EXPECT_EQ(matched_skills(s, jobs.at("java-developer").required_skills, aliases).size(), 8u);
}

TEST(Overlap, BruteForceOracleOnRandomSets) {
  std::mt19937_64 gen(3);
  const std::vector<std::string> universe{"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int t = 0; t < 500; ++t) {
    std::vector<std::string> s, r;
    for (const auto& u : universe) {
      if (gen() % 2) s.push_back(u);
      if (gen() % 2) r.push_back(u);
    }
    if (r.empty()) continue;
    int hit = 0;
    for (const auto& x : r)
      for (const auto& y : s)
        if (x == y) ++hit;
    EXPECT_DOUBLE_EQ(binary_overlap(s, r), static_cast<double>(hit) / static_cast<double>(r.size()));
  }
}

TEST(Overlap, AliasesAndNormalization) {
  const auto aliases = fixture_aliases();
  EXPECT_EQ(aliases.canonical("git"), "version control (git)");
  EXPECT_EQ(aliases.canonical("  OOP "), "object-oriented programming");
  EXPECT_EQ(aliases.canonical("Version Control"), "version control (git)");
  EXPECT_EQ(binary_overlap({"JAVA", "git"}, {"Java", "Version Control (Git)"}, aliases), 1.0);
  EXPECT_EQ(binary_overlap({"Java", "Java"}, {"java", "Java"}, aliases), 1.0);
  EXPECT_EQ(code_of([] { binary_overlap({"x"}, {}); }), Errc::EmptyRequirement);
}

TEST(SemSim, ExactNamesScoreOneAndMeanIsOracle) {
  skills::HashingEmbedding p;
  auto named = [&](const std::vector<std::string>& names) {
    std::vector<NamedEmbedding> out;
    for (const auto& n : names) out.push_back({n, n, p.embed(n)});
    return out;
  };
  const auto cand = named({"Java", "Data Structures", "SQL"});
  const auto req = named({"Java", "Data Structures", "Spring Framework"});
  const auto r = sem_sim(cand, req);
  EXPECT_NEAR(r.per_skill.at("Java").similarity, 1.0, 1e-6);
  EXPECT_NEAR(r.per_skill.at("Data Structures").similarity, 1.0, 1e-6);
  double sum = 0;
  for (const auto& q : req) {
    double best = -2;
    for (const auto& c : cand) best = std::max(best, skills::cosine(q.vector, c.vector));
    sum += best;
  }
  EXPECT_NEAR(r.value, sum / 3.0, 1e-12);
  EXPECT_EQ(code_of([&] { sem_sim({}, req); }), Errc::NoCandidateSkills);
  EXPECT_EQ(code_of([&] { sem_sim(cand, {}); }), Errc::EmptyRequirement);
}

TEST(Evaluate, DecisionThresholdAndCombiner) {
  skills::HashingEmbedding p;
  const auto jobs = fixture_jobs();
  auto job = jobs.at("java-developer");
  const auto claims = claims_from(fixture_candidate_skills());
  const auto r = evaluate(claims, job, p, {}, fixture_aliases());
  EXPECT_EQ(r.overlap, 0.8);
  EXPECT_EQ(r.combiner, "semsim");
  EXPECT_DOUBLE_EQ(r.score, r.sem_sim);
  EXPECT_EQ(r.decision, r.score >= job.tau);
  job.tau = r.score;
  EXPECT_TRUE(evaluate(claims, job, p, {}, fixture_aliases()).decision);
  job.tau = std::nextafter(r.score, 2.0);
  EXPECT_FALSE(evaluate(claims, job, p, {}, fixture_aliases()).decision);

  const Combiner mix{CombinerKind::Mix, 0.25};
  EXPECT_DOUBLE_EQ(mix.combine(0.8, 0.4), 0.25 * 0.4 + 0.75 * 0.8);
  EXPECT_EQ(Combiner::from_json(mix.to_json()), mix);
  EXPECT_EQ(Combiner{CombinerKind::Overlap}.combine(0.8, 0.1), 0.8);
}

TEST(Evaluate, DecideRequiresVerifiedInput) {
  skills::HashingEmbedding p;
  const auto job = fixture_jobs().at("java-developer");
  EXPECT_EQ(code_of([&] { decide(AttestedSkills::unverified(claims_from({"Java"})), job, p); }),
            Errc::UnverifiedInput);
  credential::VerifiablePresentation vp;
  EXPECT_EQ(code_of([&] {
              AttestedSkills::from_presentation(vp, Verdict::reject(Reason::BadNonce), fixture_taxonomy());
            }),
            Errc::UnverifiedInput);
}

TEST(Evaluate, JobRequirementValidation) {
  EXPECT_THROW(JobRequirement::from_json(Json{{"job_id", "x"}, {"required_skills", Json::array()}}), Error);
  EXPECT_THROW(JobRequirement::from_json(Json{{"job_id", "x"}, {"required_skills", {"a", "A "}}}), Error);
  EXPECT_THROW(JobRequirement::from_json(Json{{"job_id", "x"}, {"required_skills", {"a"}}, {"tau", 1.5}}), Error);
}

TEST(Audit, SkillOnlyMatcherHasZeroBoiAndNoFlips) {
  const auto t = fixture_taxonomy();
  const auto h = skill_only_matcher("mean", mean);
  const auto gen = bernoulli_attribute_generator(t.size(), t.ref(), "institution", "Elite University", 0.5);
  const auto boi = estimate_boi(h, gen, 2000);
  EXPECT_EQ(boi.value, 0.0);
  EXPECT_EQ(boi.std_error, 0.0);
  EXPECT_EQ(flip_probability(h, gen, 2000, 0.5).flips, 0u);
}

TEST(Audit, BumpMatcherMatchesEnumeratedClosedForm) {
  const auto t = fixture_taxonomy();
  for (double p : {0.5, 0.2}) {
    const double bump = 0.1;
    // Enumerate (z, z') in {value, other}^2.
    double closed = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double pr = (a ? p : 1 - p) * (b ? p : 1 - p);
        const double d = (a ? bump : 0.0) - (b ? bump : 0.0);
        closed += pr * d * d;
      }
    const auto h = attribute_bump_matcher("bump", mean, "institution", "Elite University", bump);
    const auto gen = bernoulli_attribute_generator(t.size(), t.ref(), "institution", "Elite University", p);
    const auto est = estimate_boi(h, gen, 10000);
    EXPECT_LE(std::fabs(est.value - closed), 3 * est.std_error) << p;
    EXPECT_GT(est.std_error, 0.0);
  }
}

TEST(Audit, EstimatesAreSeedReproducible) {
  const auto t = fixture_taxonomy();
  const auto h = attribute_bump_matcher("bump", mean, "institution", "Elite University", 0.1);
  const auto gen = bernoulli_attribute_generator(t.size(), t.ref(), "institution", "Elite University", 0.5);
  EXPECT_EQ(estimate_boi(h, gen, 500, 1).value, estimate_boi(h, gen, 500, 1).value);
  EXPECT_NE(estimate_boi(h, gen, 500, 1).value, estimate_boi(h, gen, 500, 2).value);
}

TEST(Audit, MutualInformation) {
  EXPECT_NEAR(empirical_mutual_information({"x", "x", "y", "y"}, {"x", "x", "y", "y"}), std::log(2.0), 1e-12);
  EXPECT_NEAR(empirical_mutual_information({"x", "x", "y", "y"}, {"p", "q", "p", "q"}), 0.0, 1e-12);
  EXPECT_NEAR(empirical_mutual_information({"a", "b", "c"}, {"z", "z", "z"}), 0.0, 1e-12);
}

TEST(Audit, PipelineMatcherIsBlindToNonSkillEdits) {
  const auto t = fixture_taxonomy();
  skills::HashingEmbedding p;
  const auto h = pipeline_matcher(fixture_jobs().at("java-developer"), t, p, 10, {}, fixture_aliases());
  const auto gen = non_skill_edit_generator(t.size(), t.ref());
  const auto boi = estimate_boi(h, gen, 1000);
  EXPECT_EQ(boi.value, 0.0);
  EXPECT_EQ(flip_probability(h, gen, 1000, 0.5).flips, 0u);

  std::mt19937_64 rng(4);
  const auto trial = gen(rng);
  EXPECT_NE(trial.z, trial.z_prime);
  std::vector<SkillClaim> claims;
  for (const auto& r : skills::top_k(trial.v, t, 10)) claims.push_back({r.skill_id, t.find(r.skill_id)->name, r.score});
  EXPECT_EQ(h.score(trial.v, trial.z), evaluate(claims, fixture_jobs().at("java-developer"), p, {}, fixture_aliases()).score);
}

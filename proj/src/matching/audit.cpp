#include "ler/error.hpp"
#include "ler/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ler::matching {

Matcher skill_only_matcher(std::string id, std::function<double(const skills::SkillVector&)> f) {
  return Matcher{std::move(id), [f = std::move(f)](const skills::SkillVector& v, const NonSkillProfile&) { return f(v); }};
}

Matcher attribute_bump_matcher(std::string id, std::function<double(const skills::SkillVector&)> f,
                               std::string attribute, std::string value, double bump) {
  return Matcher{std::move(id), [f = std::move(f), attribute = std::move(attribute), value = std::move(value),
                                 bump](const skills::SkillVector& v, const NonSkillProfile& z) {
                   auto it = z.attributes.find(attribute);
                   return f(v) + (it != z.attributes.end() && it->second == value ? bump : 0.0);
                 }};
}

Matcher pipeline_matcher(JobRequirement job, const skills::SkillTaxonomy& taxonomy, const EmbeddingProvider& provider,
                         std::size_t k, Combiner combiner, AliasTable aliases) {
  job.validate();
  std::string id = "pipeline:" + job.job_id;
  return Matcher{std::move(id), [job = std::move(job), &taxonomy, &provider, k, combiner,
                                 aliases = std::move(aliases)](const skills::SkillVector& v, const NonSkillProfile&) {
                   std::vector<SkillClaim> claims;
                   for (const auto& r : skills::top_k(v, taxonomy, k)) {
                     const auto* d = taxonomy.find(r.skill_id);
                     claims.push_back({r.skill_id, d ? d->name : r.skill_id, r.score});
                   }
                   return evaluate(claims, job, provider, combiner, aliases).score;
                 }};
}

TrialGenerator non_skill_edit_generator(std::size_t m, std::string taxonomy_ref) {
  return [=](std::mt19937_64& rng) {
    static const std::vector<std::string> institutions{"Elite University", "State University", "Community College",
                                                       "Online Academy", "Technical Institute"};
    static const std::vector<std::string> names{"Alex Rivera", "Jordan Lee", "Sam Okafor", "Priya Nair", "Chen Wei"};
    static const std::vector<std::string> regions{"north", "south", "east", "west", "abroad"};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&rng] {
      NonSkillProfile z;
      z.attributes["institution"] = institutions[rng() % institutions.size()];
      z.attributes["student_name"] = names[rng() % names.size()];
      z.attributes["student_id"] = "S" + std::to_string(rng() % 100000);
      z.attributes["graduation_year"] = std::to_string(1990 + rng() % 40);
      z.attributes["region"] = regions[rng() % regions.size()];
      return z;
    };
    AuditTrial t;
    t.v.taxonomy_ref = taxonomy_ref;
    t.v.values.resize(m);
    for (auto& x : t.v.values) x = unit(rng);
    t.z = draw();
    t.z_prime = draw();
    return t;
  };
}

TrialGenerator bernoulli_attribute_generator(std::size_t m, std::string taxonomy_ref, std::string attribute,
                                             std::string value, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidArgument, "p must lie in [0,1]");
  return [=](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(p);
    AuditTrial t;
    t.v.taxonomy_ref = taxonomy_ref;
    t.v.values.resize(m);
    for (auto& x : t.v.values) x = unit(rng);
    t.z.attributes[attribute] = coin(rng) ? value : "other";
    t.z_prime.attributes[attribute] = coin(rng) ? value : "other";
    return t;
  };
}

Json BoiEstimate::to_json() const {
  return Json{{"matcher", matcher_id}, {"std_error", std_error}, {"trials", trials}, {"value", value}};
}

namespace {

std::mt19937_64 trial_engine(std::uint64_t seed, std::size_t trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
  return std::mt19937_64(seq);
}

} // namespace

BoiEstimate estimate_boi(const Matcher& h, const TrialGenerator& gen, std::size_t trials, std::uint64_t seed,
                         const std::function<void(std::size_t, const AuditTrial&, double)>& on_trial) {
  if (trials == 0) throw Error(Errc::InvalidArgument, "at least one trial required");
  // Welford running mean and variance of the squared difference.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    auto rng = trial_engine(seed, i);
    const AuditTrial t = gen(rng);
    const double d = h.score(t.v, t.z) - h.score(t.v, t.z_prime);
    const double sq = d * d;
    if (on_trial) on_trial(i, t, sq);
    const double delta = sq - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (sq - mean);
  }
  BoiEstimate out;
  out.matcher_id = h.id;
  out.value = mean;
  out.trials = trials;
  out.std_error = trials > 1 ? std::sqrt(m2 / static_cast<double>(trials - 1) / static_cast<double>(trials)) : 0.0;
  return out;
}

FlipEstimate flip_probability(const Matcher& h, const TrialGenerator& gen, std::size_t trials, double tau,
                              std::uint64_t seed) {
  if (trials == 0) throw Error(Errc::InvalidArgument, "at least one trial required");
  FlipEstimate out;
  out.matcher_id = h.id;
  out.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    auto rng = trial_engine(seed, i);
    const AuditTrial t = gen(rng);
    if ((h.score(t.v, t.z) >= tau) != (h.score(t.v, t.z_prime) >= tau)) ++out.flips;
  }
  out.probability = static_cast<double>(out.flips) / static_cast<double>(trials);
  return out;
}

double empirical_mutual_information(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) throw Error(Errc::InvalidArgument, "sequences differ in length");
  if (a.empty()) return 0.0;
  std::map<std::string, double> pa;
  std::map<std::string, double> pb;
  std::map<std::pair<std::string, std::string>, double> pab;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
    pab[{a[i], b[i]}] += 1.0 / n;
  }
  double mi = 0.0;
  for (const auto& [k, p] : pab) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  return std::max(0.0, mi);
}

} // namespace ler::matching

#ifndef LER_MATCHING_HPP
#define LER_MATCHING_HPP

#include "ler/canonical.hpp"
#include "ler/credential.hpp"
#include "ler/embedding.hpp"
#include "ler/skills.hpp"
#include "ler/verdict.hpp"

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ler::matching {

using skills::Embedding;
using skills::EmbeddingProvider;

/// Lowercase, trimmed, inner whitespace collapsed to one space.
std::string normalize_skill_name(std::string_view name);

/// Alias -> canonical skill name (both normalized). A name "base (detail)"
/// is reachable by "base" and by "detail" as well.
class AliasTable {
public:
  AliasTable() = default;
  /// Lines: alias \t canonical name. '#' starts a comment line.
  static AliasTable parse_tsv(std::string_view text);
  static AliasTable load_tsv(const std::filesystem::path& path);

  void add(std::string_view alias, std::string_view canonical);
  /// Normalized canonical name for `name`.
  std::string canonical(std::string_view name) const;

private:
  std::map<std::string, std::string, std::less<>> aliases_;
};

/// Binary overlap |S ∩ R| / |R| on canonical names. Throws Error(EmptyRequirement).
double binary_overlap(const std::vector<std::string>& candidate, const std::vector<std::string>& required,
                      const AliasTable& aliases = {});
/// Names in R that S contains, in R order.
std::vector<std::string> matched_skills(const std::vector<std::string>& candidate,
                                        const std::vector<std::string>& required, const AliasTable& aliases = {});

struct NamedEmbedding {
  std::string id;
  std::string name;
  Embedding vector;
};

struct SkillMatch {
  std::string candidate_id;
  double similarity = 0.0;

  bool operator==(const SkillMatch&) const = default;
};

struct SemSimResult {
  double value = 0.0;
  /// Required skill -> best candidate (ties go to the smaller id).
  std::map<std::string, SkillMatch> per_skill;
};

/// Mean over required skills of the max cosine against any candidate.
/// Throws Error(EmptyRequirement) or Error(NoCandidateSkills).
SemSimResult sem_sim(const std::vector<NamedEmbedding>& candidates, const std::vector<NamedEmbedding>& required);

struct JobRequirement {
  std::string job_id;
  std::vector<std::string> required_skills;  ///< ordered, unique after normalization
  /// Optional richer text per required skill; the name is embedded otherwise.
  std::map<std::string, std::string> descriptor_texts;
  double tau = 0.5;

  /// Throws Error(EmptyRequirement) or Error(InvalidArgument).
  void validate() const;
  std::string text_for(const std::string& skill) const;

  Json to_json() const;
  static JobRequirement from_json(const Json& j);
};

enum class CombinerKind { SemSim, Overlap, Mix };

/// How overlap and semantic similarity fold into one score s.
struct Combiner {
  CombinerKind kind = CombinerKind::SemSim;
  double alpha = 0.5;  ///< Mix: alpha * sem_sim + (1 - alpha) * overlap

  double combine(double overlap, double sem_sim) const;
  std::string id() const;
  Json to_json() const;
  static Combiner from_json(const Json& j);

  bool operator==(const Combiner&) const = default;
};

struct SkillClaim {
  std::string skill_id;
  std::string name;
  double score = 0.0;

  bool operator==(const SkillClaim&) const = default;
};

/// Skill claims taken from a presentation that passed verification. Only
/// from_presentation yields a verified instance.
class AttestedSkills {
public:
  AttestedSkills() = default;
  /// Throws Error(UnverifiedInput) unless the verdict accepts.
  static AttestedSkills from_presentation(const credential::VerifiablePresentation& vp, const Verdict& verdict,
                                          const skills::SkillTaxonomy& taxonomy);
  /// For evaluation tooling only: not accepted by decide().
  static AttestedSkills unverified(std::vector<SkillClaim> claims);

  bool verified() const noexcept { return verified_; }
  const std::vector<SkillClaim>& claims() const noexcept { return claims_; }
  const std::string& presentation_digest() const noexcept { return presentation_digest_; }

private:
  bool verified_ = false;
  std::vector<SkillClaim> claims_;
  std::string presentation_digest_;
};

struct MatchResult {
  std::string job_id;
  double overlap = 0.0;
  std::vector<std::string> matched;
  double sem_sim = 0.0;
  std::map<std::string, SkillMatch> per_skill;
  double score = 0.0;
  double tau = 0.0;
  bool decision = false;
  std::string combiner;

  Json to_json() const;
};

/// Pure scoring of claims (score > 0) against a requirement.
MatchResult evaluate(const std::vector<SkillClaim>& claims, const JobRequirement& job, const EmbeddingProvider& provider,
                     const Combiner& combiner = {}, const AliasTable& aliases = {});

/// evaluate() on verified input only. Throws Error(UnverifiedInput).
MatchResult decide(const AttestedSkills& skills, const JobRequirement& job, const EmbeddingProvider& provider,
                   const Combiner& combiner = {}, const AliasTable& aliases = {});

// ---------------------------------------------------------------------------
// Fairness audit
// ---------------------------------------------------------------------------

/// Non-skill attributes z (institution, name, ...).
struct NonSkillProfile {
  std::map<std::string, std::string> attributes;

  bool operator==(const NonSkillProfile&) const = default;
};

struct Matcher {
  std::string id;
  std::function<double(const skills::SkillVector&, const NonSkillProfile&)> score;
};

/// Scores from the skill vector alone through `f`; z never reaches f.
Matcher skill_only_matcher(std::string id, std::function<double(const skills::SkillVector&)> f);
/// Adds `bump` when z[attribute] equals `value`.
Matcher attribute_bump_matcher(std::string id, std::function<double(const skills::SkillVector&)> f,
                               std::string attribute, std::string value, double bump);

/// The verifier's scoring path: the top-k skills of v become claims scored
/// against `job`. `taxonomy` and `provider` must outlive the matcher.
Matcher pipeline_matcher(JobRequirement job, const skills::SkillTaxonomy& taxonomy, const EmbeddingProvider& provider,
                         std::size_t k = 10, Combiner combiner = {}, AliasTable aliases = {});

/// Draws one (v, z, z') trial.
struct AuditTrial {
  skills::SkillVector v;
  NonSkillProfile z;
  NonSkillProfile z_prime;
};

using TrialGenerator = std::function<AuditTrial(std::mt19937_64&)>;

/// v uniform in [0,1]^m; z and z' each draw `attribute` = `value` with probability p, else "other".
TrialGenerator bernoulli_attribute_generator(std::size_t m, std::string taxonomy_ref, std::string attribute,
                                             std::string value, double p);

/// v uniform in [0,1]^m; z and z' independently random over institution, name,
/// student id, graduation year and home region.
TrialGenerator non_skill_edit_generator(std::size_t m, std::string taxonomy_ref);

struct BoiEstimate {
  std::string matcher_id;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;

  Json to_json() const;
};

inline constexpr std::uint64_t kDefaultAuditSeed = 20240601;

/// Monte Carlo estimate of E[(h(v,z) - h(v,z'))^2]. Trial i draws from an
/// engine seeded with (seed, i), so results do not depend on scheduling.
BoiEstimate estimate_boi(const Matcher& h, const TrialGenerator& gen, std::size_t trials,
                         std::uint64_t seed = kDefaultAuditSeed,
                         const std::function<void(std::size_t, const AuditTrial&, double)>& on_trial = {});

struct FlipEstimate {
  std::string matcher_id;
  double probability = 0.0;
  std::size_t flips = 0;
  std::size_t trials = 0;
};

/// Fraction of trials where 1[h(v,z) >= tau] != 1[h(v,z') >= tau].
FlipEstimate flip_probability(const Matcher& h, const TrialGenerator& gen, std::size_t trials, double tau,
                              std::uint64_t seed = kDefaultAuditSeed);

/// Plug-in mutual information (nats) between two discrete sequences.
double empirical_mutual_information(const std::vector<std::string>& a, const std::vector<std::string>& b);

} // namespace ler::matching

#endif // LER_MATCHING_HPP

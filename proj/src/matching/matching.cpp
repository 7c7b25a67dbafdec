#include "ler/error.hpp"
#include "ler/matching.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace ler::matching {

std::string normalize_skill_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char ch : name) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

AliasTable AliasTable::parse_tsv(std::string_view text) {
  AliasTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(Errc::ParseError, "alias line " + std::to_string(line_no) + ": expected alias<TAB>name");
    }
    table.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return table;
}

AliasTable AliasTable::load_tsv(const std::filesystem::path& path) { return parse_tsv(read_text_file(path)); }

void AliasTable::add(std::string_view alias, std::string_view canonical) {
  const std::string target = normalize_skill_name(canonical);
  aliases_[normalize_skill_name(alias)] = target;
  // "version control (git)" is also known as "version control" and "git".
  auto open = target.find(" (");
  if (open != std::string::npos && target.back() == ')') {
    aliases_.emplace(target.substr(0, open), target);
    aliases_.emplace(target.substr(open + 2, target.size() - open - 3), target);
  }
}

std::string AliasTable::canonical(std::string_view name) const {
  std::string n = normalize_skill_name(name);
  if (auto it = aliases_.find(n); it != aliases_.end()) return it->second;
  return n;
}

namespace {

std::vector<std::string> canonical_required(const std::vector<std::string>& required, const AliasTable& aliases) {
  if (required.empty()) throw Error(Errc::EmptyRequirement);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : required) {
    auto c = aliases.canonical(r);
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

} // namespace

std::vector<std::string> matched_skills(const std::vector<std::string>& candidate,
                                        const std::vector<std::string>& required, const AliasTable& aliases) {
  std::set<std::string> have;
  for (const auto& s : candidate) have.insert(aliases.canonical(s));
  std::vector<std::string> out;
  for (const auto& r : canonical_required(required, aliases))
    if (have.contains(r)) out.push_back(r);
  return out;
}

double binary_overlap(const std::vector<std::string>& candidate, const std::vector<std::string>& required,
                      const AliasTable& aliases) {
  const auto req = canonical_required(required, aliases);
  return static_cast<double>(matched_skills(candidate, required, aliases).size()) / static_cast<double>(req.size());
}

SemSimResult sem_sim(const std::vector<NamedEmbedding>& candidates, const std::vector<NamedEmbedding>& required) {
  if (required.empty()) throw Error(Errc::EmptyRequirement);
  if (candidates.empty()) throw Error(Errc::NoCandidateSkills);
  SemSimResult out;
  double total = 0.0;
  for (const auto& r : required) {
    SkillMatch best{"", -2.0};
    for (const auto& c : candidates) {
      const double s = skills::cosine(c.vector, r.vector);
      if (s > best.similarity || (s == best.similarity && c.id < best.candidate_id)) best = {c.id, s};
    }
    out.per_skill[r.id] = best;
    total += best.similarity;
  }
  out.value = total / static_cast<double>(required.size());
  return out;
}

void JobRequirement::validate() const {
  if (required_skills.empty()) throw Error(Errc::EmptyRequirement, job_id);
  std::set<std::string> seen;
  for (const auto& s : required_skills) {
    const auto n = normalize_skill_name(s);
    if (n.empty()) throw Error(Errc::InvalidArgument, "empty required skill");
    if (!seen.insert(n).second) throw Error(Errc::InvalidArgument, "duplicate required skill '" + s + "'");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(Errc::InvalidArgument, "tau must lie in [0,1]");
}

std::string JobRequirement::text_for(const std::string& skill) const {
  auto it = descriptor_texts.find(skill);
  return it == descriptor_texts.end() ? skill : it->second;
}

Json JobRequirement::to_json() const {
  return Json{{"descriptor_texts", descriptor_texts},
              {"job_id", job_id},
              {"required_skills", required_skills},
              {"tau", tau}};
}

JobRequirement JobRequirement::from_json(const Json& j) {
  JobRequirement r;
  r.job_id = require_string(j, "job_id");
  const Json& skills = require(j, "required_skills");
  if (!skills.is_array()) throw Error(Errc::ParseError, "required_skills must be an array");
  for (const auto& s : skills) {
    if (!s.is_string()) throw Error(Errc::ParseError, "required skill must be a string");
    r.required_skills.push_back(s.get<std::string>());
  }
  if (j.contains("descriptor_texts")) {
    for (const auto& [k, v] : j.at("descriptor_texts").items()) {
      if (!v.is_string()) throw Error(Errc::ParseError, "descriptor text must be a string");
      r.descriptor_texts[k] = v.get<std::string>();
    }
  }
  if (j.contains("tau")) r.tau = require_number(j, "tau");
  r.validate();
  return r;
}

double Combiner::combine(double overlap, double sem) const {
  switch (kind) {
  case CombinerKind::SemSim: return sem;
  case CombinerKind::Overlap: return overlap;
  case CombinerKind::Mix: return alpha * sem + (1.0 - alpha) * overlap;
  }
  return sem;
}

std::string Combiner::id() const {
  switch (kind) {
  case CombinerKind::SemSim: return "semsim";
  case CombinerKind::Overlap: return "overlap";
  case CombinerKind::Mix: {
    std::ostringstream s;
    s << "mix:" << alpha;
    return s.str();
  }
  }
  return "?";
}

Json Combiner::to_json() const {
  Json j{{"kind", kind == CombinerKind::SemSim ? "semsim" : kind == CombinerKind::Overlap ? "overlap" : "mix"}};
  if (kind == CombinerKind::Mix) j["alpha"] = alpha;
  return j;
}

Combiner Combiner::from_json(const Json& j) {
  Combiner c;
  const auto kind = require_string(j, "kind");
  if (kind == "semsim") {
    c.kind = CombinerKind::SemSim;
  } else if (kind == "overlap") {
    c.kind = CombinerKind::Overlap;
  } else if (kind == "mix") {
    c.kind = CombinerKind::Mix;
    c.alpha = require_number(j, "alpha");
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in [0,1]");
  } else {
    throw Error(Errc::ParseError, "unknown combiner '" + kind + "'");
  }
  return c;
}

AttestedSkills AttestedSkills::from_presentation(const credential::VerifiablePresentation& vp, const Verdict& verdict,
                                                 const skills::SkillTaxonomy& taxonomy) {
  if (!verdict.accepted()) {
    throw Error(Errc::UnverifiedInput, "presentation rejected: " + std::string(to_string(verdict.reason)));
  }
  AttestedSkills out;
  out.verified_ = true;
  out.presentation_digest_ = to_hex(canonical_digest(vp.to_json()));
  for (const auto& claim : vp.revealed) {
    const auto* skill = taxonomy.find(claim.key);
    const auto score = credential::numeric_value(claim.value);
    if (skill == nullptr || !score) continue;
    out.claims_.push_back({skill->skill_id, skill->name, *score});
  }
  return out;
}

AttestedSkills AttestedSkills::unverified(std::vector<SkillClaim> claims) {
  AttestedSkills out;
  out.claims_ = std::move(claims);
  return out;
}

Json MatchResult::to_json() const {
  Json per = Json::object();
  for (const auto& [k, m] : per_skill) per[k] = {{"candidate", m.candidate_id}, {"similarity", m.similarity}};
  return Json{{"combiner", combiner}, {"decision", decision}, {"job_id", job_id}, {"matched", matched},
              {"overlap", overlap},   {"per_skill", per},     {"score", score},   {"sem_sim", sem_sim},
              {"tau", tau}};
}

MatchResult evaluate(const std::vector<SkillClaim>& claims, const JobRequirement& job, const EmbeddingProvider& provider,
                     const Combiner& combiner, const AliasTable& aliases) {
  job.validate();
  std::vector<std::string> names;
  std::vector<NamedEmbedding> candidates;
  for (const auto& c : claims) {
    if (!(c.score > 0.0)) continue;
    names.push_back(c.name);
    candidates.push_back({c.name, c.name, provider.embed(c.name)});
  }
  if (candidates.empty()) throw Error(Errc::NoCandidateSkills);
  std::vector<NamedEmbedding> required;
  for (const auto& r : job.required_skills) required.push_back({r, r, provider.embed(job.text_for(r))});

  MatchResult out;
  out.job_id = job.job_id;
  out.matched = matched_skills(names, job.required_skills, aliases);
  out.overlap = binary_overlap(names, job.required_skills, aliases);
  auto sem = sem_sim(candidates, required);
  out.sem_sim = sem.value;
  out.per_skill = std::move(sem.per_skill);
  out.score = combiner.combine(out.overlap, out.sem_sim);
  out.tau = job.tau;
  out.decision = out.score >= job.tau;
  out.combiner = combiner.id();
  return out;
}

MatchResult decide(const AttestedSkills& skills, const JobRequirement& job, const EmbeddingProvider& provider,
                   const Combiner& combiner, const AliasTable& aliases) {
  if (!skills.verified()) throw Error(Errc::UnverifiedInput, "skills did not come from a verified presentation");
  return evaluate(skills.claims(), job, provider, combiner, aliases);
}

} // namespace ler::matching

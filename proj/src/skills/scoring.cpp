#include "ler/error.hpp"
#include "ler/skills.hpp"

#include <algorithm>
#include <cmath>

namespace ler::skills {

double score_skill(std::span<const Embedding> sentences, const Embedding& skill) {
  if (sentences.empty()) throw Error(Errc::NoEvidence, "no sentences to score against");
  double best = -1.0;
  for (const auto& s : sentences) best = std::max(best, cosine(s, skill));
  return best;
}

EmbeddedTaxonomy::EmbeddedTaxonomy(const SkillTaxonomy& taxonomy, const EmbeddingProvider& provider)
    : taxonomy_(&taxonomy), provider_(&provider) {
  embeddings_.reserve(taxonomy.size());
  for (const auto& s : taxonomy.skills()) embeddings_.push_back(provider.embed(s.descriptor_text));
}

SkillVector course_vector(const CourseRecord& course, const EmbeddedTaxonomy& taxonomy) {
  const auto retained = filter_pedagogical(course.syllabus_sentences);
  if (retained.empty()) throw Error(Errc::NoEvidence, "course " + course.course_id + " has no learning-outcome text");
  std::vector<Embedding> sentence_vecs;
  sentence_vecs.reserve(retained.size());
  for (const auto& s : retained) sentence_vecs.push_back(taxonomy.provider().embed(s));
  SkillVector v{taxonomy.taxonomy().ref(), {}};
  v.values.reserve(taxonomy.taxonomy().size());
  for (std::size_t i = 0; i < taxonomy.taxonomy().size(); ++i) {
    v.values.push_back(score_skill(sentence_vecs, taxonomy.embedding(i)));
  }
  return v;
}

SkillVector course_vector(const CourseRecord& course, const SkillTaxonomy& taxonomy,
                          const EmbeddingProvider& provider) {
  return course_vector(course, EmbeddedTaxonomy(taxonomy, provider));
}

WeightConfig WeightConfig::defaults() {
  WeightConfig w;
  w.grade_weights = {{"A", 1.0}, {"A-", 0.95}, {"B+", 0.9}, {"B", 0.8}, {"B-", 0.7},
                     {"C+", 0.6}, {"C", 0.5},  {"C-", 0.4}, {"D", 0.3}, {"F", 0.0}};
  w.level_weights = {{"100", 0.8}, {"200", 0.9}, {"300", 1.0}, {"400+", 1.2}};
  return w;
}

void WeightConfig::validate() const {
  auto check = [](const std::map<std::string, double>& m, const char* what) {
    for (const auto& [k, w] : m) {
      if (!std::isfinite(w) || w < 0.0) throw Error(Errc::InvalidArgument, std::string(what) + " weight for '" + k + "'");
    }
  };
  check(grade_weights, "grade");
  check(level_weights, "level");
  check(extensions, "extension");
}

double WeightConfig::grade_weight(std::string_view grade) const {
  auto it = grade_weights.find(std::string(grade));
  if (it == grade_weights.end()) throw Error(Errc::UnknownWeightKey, "grade '" + std::string(grade) + "'");
  return it->second;
}

std::string level_band(int level) {
  if (level < 100) throw Error(Errc::UnknownWeightKey, "course level " + std::to_string(level));
  if (level >= 400) return "400+";
  return std::to_string(level / 100 * 100);
}

double WeightConfig::level_weight(int level) const {
  const std::string band = level_band(level);
  auto it = level_weights.find(band);
  if (it == level_weights.end() && band == "400+") it = level_weights.find("400");
  if (it == level_weights.end()) throw Error(Errc::UnknownWeightKey, "level band '" + band + "'");
  return it->second;
}

Json WeightConfig::to_json() const {
  return Json{{"extensions", extensions}, {"grade_weights", grade_weights}, {"level_weights", level_weights}};
}

WeightConfig WeightConfig::from_json(const Json& j) {
  WeightConfig w;
  auto read = [&](std::string_view key, std::map<std::string, double>& out) {
    const Json& obj = require(j, key);
    if (!obj.is_object()) throw Error(Errc::ParseError, std::string(key) + " must be an object");
    for (const auto& [k, v] : obj.items()) {
      if (!v.is_number()) throw Error(Errc::ParseError, std::string(key) + "." + k + " must be a number");
      out[k] = v.get<double>();
    }
  };
  read("grade_weights", w.grade_weights);
  read("level_weights", w.level_weights);
  if (j.contains("extensions")) read("extensions", w.extensions);
  w.validate();
  return w;
}

SkillVector personalize(std::span<const CourseRecord> courses, std::span<const SkillVector> vectors,
                        const WeightConfig& weights) {
  if (courses.size() != vectors.size()) throw Error(Errc::InvalidArgument, "one skill vector per course required");
  if (vectors.empty()) throw Error(Errc::NoEvidence, "no course vectors");
  SkillVector out{vectors.front().taxonomy_ref, std::vector<double>(vectors.front().values.size(), 0.0)};
  for (std::size_t c = 0; c < courses.size(); ++c) {
    const auto& v = vectors[c];
    if (v.taxonomy_ref != out.taxonomy_ref || v.values.size() != out.values.size()) {
      throw Error(Errc::InvalidArgument, "course vectors over different taxonomies");
    }
    const double w = weights.grade_weight(courses[c].grade) * weights.level_weight(courses[c].level);
    for (std::size_t i = 0; i < v.values.size(); ++i) out.values[i] += v.values[i] * w;
  }
  return out;
}

std::vector<RankedSkill> top_k(const SkillVector& v, const SkillTaxonomy& taxonomy, std::size_t k) {
  if (v.values.size() != taxonomy.size() || v.taxonomy_ref != taxonomy.ref()) {
    throw Error(Errc::InvalidArgument, "skill vector does not match taxonomy");
  }
  if (k < 1 || k > taxonomy.size()) throw Error(Errc::BadK, "k=" + std::to_string(k));
  std::vector<RankedSkill> ranked;
  ranked.reserve(taxonomy.size());
  for (std::size_t i = 0; i < taxonomy.size(); ++i) ranked.push_back({taxonomy.at(i).skill_id, v.values[i]});
  std::ranges::sort(ranked, [](const RankedSkill& a, const RankedSkill& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.skill_id < b.skill_id;
  });
  ranked.resize(k);
  return ranked;
}

SkillVector derive_skill_vector(std::span<const CourseRecord> courses, const EmbeddedTaxonomy& taxonomy,
                                const WeightConfig& weights) {
  std::vector<CourseRecord> used;
  std::vector<SkillVector> vectors;
  for (const auto& c : courses) {
    if (filter_pedagogical(c.syllabus_sentences).empty()) continue;
    vectors.push_back(course_vector(c, taxonomy));
    used.push_back(c);
  }
  if (used.empty()) throw Error(Errc::NoEvidence, "no course has learning-outcome text");
  return personalize(used, vectors, weights);
}

} // namespace ler::skills

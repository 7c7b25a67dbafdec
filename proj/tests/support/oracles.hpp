#ifndef LER_TESTS_ORACLES_HPP
#define LER_TESTS_ORACLES_HPP

#include "ler/skills.hpp"

#include <map>
#include <string>
#include <vector>

namespace ler::testing {

/// Straight-line reference implementations, written without the library's scoring code.
long double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b);

/// max_j cos(skill, sentence_j) over raw sentences.
long double oracle_skill_score(const skills::EmbeddingProvider& p, const std::vector<std::string>& sentences,
                               const std::string& skill_text);

/// One entry per taxonomy skill.
std::vector<long double> oracle_course_vector(const skills::EmbeddingProvider& p,
                                              const std::vector<std::string>& retained,
                                              const skills::SkillTaxonomy& taxonomy);

/// Default weight tables, restated.
long double oracle_grade_weight(const std::string& grade);
long double oracle_level_weight(int level);

/// Weighted sum over courses that kept at least one sentence.
std::vector<long double> oracle_skill_vector(const skills::EmbeddingProvider& p,
                                             const std::vector<skills::CourseRecord>& courses,
                                             const skills::SkillTaxonomy& taxonomy);

/// (id, score) sorted by score descending, id ascending; first k.
std::vector<std::pair<std::string, long double>> oracle_top_k(const std::vector<long double>& v,
                                                              const skills::SkillTaxonomy& taxonomy, std::size_t k);

} // namespace ler::testing

#endif

#ifndef LER_SKILLS_HPP
#define LER_SKILLS_HPP

#include "ler/canonical.hpp"
#include "ler/embedding.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ler::skills {

enum class SkillKind { Dwa, Task, Ability };

std::string_view to_string(SkillKind kind) noexcept;
SkillKind skill_kind_from_string(std::string_view text);

struct SkillDescriptor {
  std::string skill_id;
  std::string name;
  std::string descriptor_text;
  SkillKind kind = SkillKind::Dwa;

  bool operator==(const SkillDescriptor&) const = default;
};

/// Ordered skill set; the order defines the index space of every SkillVector.
class SkillTaxonomy {
public:
  /// Throws Error(EmptyTaxonomy) or Error(InvalidArgument) on duplicate ids.
  explicit SkillTaxonomy(std::vector<SkillDescriptor> skills);

  /// One record per line: skill_id \t kind \t name \t descriptor text. '#' starts a comment line.
  static SkillTaxonomy parse_tsv(std::string_view text);
  static SkillTaxonomy load_tsv(const std::filesystem::path& path);

  std::size_t size() const noexcept { return skills_.size(); }
  const SkillDescriptor& at(std::size_t i) const { return skills_.at(i); }
  std::span<const SkillDescriptor> skills() const noexcept { return skills_; }
  std::optional<std::size_t> index_of(std::string_view skill_id) const;
  const SkillDescriptor* find(std::string_view skill_id) const;
  /// Hex SHA-256 of the canonical taxonomy document.
  const std::string& ref() const noexcept { return ref_; }

private:
  std::vector<SkillDescriptor> skills_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::string ref_;
};

/// Transcript line item. Syllabus sentences are attached after parsing.
struct CourseRecord {
  std::string course_id;
  std::string title;
  int level = 100;
  std::string grade;
  std::vector<std::string> syllabus_sentences;

  bool operator==(const CourseRecord&) const = default;
};

/// Institutional transcript record: the raw document behind H(transcript).
struct Transcript {
  std::string institution;
  std::string student_name;
  std::string student_id;
  std::vector<CourseRecord> courses;  ///< syllabus_sentences unused here

  Json to_json() const;
  static Transcript from_json(const Json& j);
  /// Canonical serialization; this is the byte string the enclave hashes.
  std::string document() const;

  bool operator==(const Transcript&) const = default;
};

struct SyllabusDocument {
  std::string course_id;
  std::string text;
};

std::vector<std::string> split_sentences(std::string_view text);

/// Course records with each course's syllabus sentences attached (by course_id).
std::vector<CourseRecord> attach_syllabi(const Transcript& transcript, std::span<const SyllabusDocument> syllabi);

bool is_pedagogical(std::string_view sentence);
/// Keeps learning-outcome sentences, drops administrative boilerplate.
std::vector<std::string> filter_pedagogical(std::span<const std::string> sentences);

struct SkillVector {
  std::string taxonomy_ref;
  std::vector<double> values;

  bool operator==(const SkillVector&) const = default;
};

/// Max cosine between the skill embedding and any sentence embedding. Throws Error(NoEvidence).
double score_skill(std::span<const Embedding> sentences, const Embedding& skill);

/// Taxonomy with descriptor embeddings computed once.
class EmbeddedTaxonomy {
public:
  EmbeddedTaxonomy(const SkillTaxonomy& taxonomy, const EmbeddingProvider& provider);

  const SkillTaxonomy& taxonomy() const noexcept { return *taxonomy_; }
  const EmbeddingProvider& provider() const noexcept { return *provider_; }
  const Embedding& embedding(std::size_t i) const { return embeddings_.at(i); }

private:
  const SkillTaxonomy* taxonomy_;
  const EmbeddingProvider* provider_;
  std::vector<Embedding> embeddings_;
};

/// Entry i = score_skill(retained sentences, skill i). Throws Error(NoEvidence)
/// if nothing survives filtering.
SkillVector course_vector(const CourseRecord& course, const EmbeddedTaxonomy& taxonomy);
SkillVector course_vector(const CourseRecord& course, const SkillTaxonomy& taxonomy,
                          const EmbeddingProvider& provider);

/// Grade and course-level weights. Level bands are "100", "200", "300", "400+".
struct WeightConfig {
  std::map<std::string, double> grade_weights;
  std::map<std::string, double> level_weights;
  /// Reserved for further weighting factors; none are defined.
  std::map<std::string, double> extensions;

  static WeightConfig defaults();
  /// Throws Error(InvalidArgument) for negative or non-finite weights.
  void validate() const;
  /// Throws Error(UnknownWeightKey).
  double grade_weight(std::string_view grade) const;
  double level_weight(int level) const;

  Json to_json() const;
  static WeightConfig from_json(const Json& j);

  bool operator==(const WeightConfig&) const = default;
};

/// Band key for a course level, e.g. 310 -> "300", 512 -> "400+".
std::string level_band(int level);

/// Sum over courses of v_c * w_grd(c) * w_lvl(c).
SkillVector personalize(std::span<const CourseRecord> courses, std::span<const SkillVector> vectors,
                        const WeightConfig& weights);

struct RankedSkill {
  std::string skill_id;
  double score = 0.0;

  bool operator==(const RankedSkill&) const = default;
};

/// Descending by score, ties by ascending skill_id. Throws Error(BadK) unless 1 <= k <= m.
std::vector<RankedSkill> top_k(const SkillVector& v, const SkillTaxonomy& taxonomy, std::size_t k);

/// Filter -> embed -> score -> personalize over every course that has retained
/// sentences. Throws Error(NoEvidence) if no course has any.
SkillVector derive_skill_vector(std::span<const CourseRecord> courses, const EmbeddedTaxonomy& taxonomy,
                                const WeightConfig& weights);

} // namespace ler::skills

#endif // LER_SKILLS_HPP

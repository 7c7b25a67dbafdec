#include "ler/error.hpp"
#include "ler/skills.hpp"

#include <cctype>
#include <sstream>

namespace ler::skills {

std::string_view to_string(SkillKind kind) noexcept {
  switch (kind) {
  case SkillKind::Dwa: return "dwa";
  case SkillKind::Task: return "task";
  case SkillKind::Ability: return "ability";
  }
  return "?";
}

SkillKind skill_kind_from_string(std::string_view text) {
  for (auto k : {SkillKind::Dwa, SkillKind::Task, SkillKind::Ability}) {
    if (to_string(k) == text) return k;
  }
  throw Error(Errc::ParseError, "unknown skill kind '" + std::string(text) + "'");
}

SkillTaxonomy::SkillTaxonomy(std::vector<SkillDescriptor> skills) : skills_(std::move(skills)) {
  if (skills_.empty()) throw Error(Errc::EmptyTaxonomy);
  Json doc = Json::array();
  for (std::size_t i = 0; i < skills_.size(); ++i) {
    const auto& s = skills_[i];
    if (s.skill_id.empty()) throw Error(Errc::InvalidArgument, "empty skill id");
    if (!index_.emplace(s.skill_id, i).second) throw Error(Errc::InvalidArgument, "duplicate skill id " + s.skill_id);
    doc.push_back({{"descriptor_text", s.descriptor_text},
                   {"kind", to_string(s.kind)},
                   {"name", s.name},
                   {"skill_id", s.skill_id}});
  }
  ref_ = to_hex(canonical_digest(doc));
}

SkillTaxonomy SkillTaxonomy::parse_tsv(std::string_view text) {
  std::vector<SkillDescriptor> skills;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t tab = line.find('\t'); fields.size() < 3 && tab != std::string::npos;
         tab = line.find('\t', start)) {
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));
    if (fields.size() != 4) {
      throw Error(Errc::ParseError, "taxonomy line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    skills.push_back({fields[0], fields[2], fields[3], skill_kind_from_string(fields[1])});
  }
  return SkillTaxonomy(std::move(skills));
}

SkillTaxonomy SkillTaxonomy::load_tsv(const std::filesystem::path& path) { return parse_tsv(read_text_file(path)); }

std::optional<std::size_t> SkillTaxonomy::index_of(std::string_view skill_id) const {
  auto it = index_.find(skill_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const SkillDescriptor* SkillTaxonomy::find(std::string_view skill_id) const {
  auto i = index_of(skill_id);
  return i ? &skills_[*i] : nullptr;
}

Json Transcript::to_json() const {
  Json cs = Json::array();
  for (const auto& c : courses) {
    cs.push_back({{"course_id", c.course_id}, {"grade", c.grade}, {"level", c.level}, {"title", c.title}});
  }
  return Json{{"courses", cs}, {"institution", institution}, {"student_id", student_id}, {"student_name", student_name}};
}

Transcript Transcript::from_json(const Json& j) {
  Transcript t;
  t.institution = require_string(j, "institution");
  t.student_name = require_string(j, "student_name");
  t.student_id = require_string(j, "student_id");
  for (const auto& c : require(j, "courses")) {
    CourseRecord r;
    r.course_id = require_string(c, "course_id");
    r.title = require_string(c, "title");
    r.level = static_cast<int>(require_int(c, "level"));
    r.grade = require_string(c, "grade");
    t.courses.push_back(std::move(r));
  }
  return t;
}

std::string Transcript::document() const { return canonical_serialize(to_json()); }

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    auto b = current.find_first_not_of(" \t\r\n");
    if (b != std::string::npos) {
      auto e = current.find_last_not_of(" \t\r\n");
      out.push_back(current.substr(b, e - b + 1));
    }
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      flush();
      continue;
    }
    current.push_back(c);
    const bool boundary = c == '.' || c == '!' || c == '?' || c == ';';
    if (boundary && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) flush();
  }
  flush();
  return out;
}

std::vector<CourseRecord> attach_syllabi(const Transcript& transcript, std::span<const SyllabusDocument> syllabi) {
  std::vector<CourseRecord> courses = transcript.courses;
  for (auto& course : courses) {
    course.syllabus_sentences.clear();
    for (const auto& doc : syllabi) {
      if (doc.course_id != course.course_id) continue;
      auto sentences = split_sentences(doc.text);
      course.syllabus_sentences.insert(course.syllabus_sentences.end(), sentences.begin(), sentences.end());
    }
  }
  return courses;
}

} // namespace ler::skills

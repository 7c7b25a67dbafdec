#include "ler/skills.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ler::skills {

namespace {

// Administrative and logistics markers. Any hit drops the sentence.
constexpr std::array<std::string_view, 38> kBoilerplate{
    "office hours", "office:", "email", "e-mail", "@", "phone", "attendance", "grading", "grade breakdown",
    "late submission", "late work", "late penalty", "textbook", "required text", "required reading",
    "room ", "classroom", "midterm", "final exam", "exam date", "academic integrity", "plagiarism",
    "disability", "accommodation", "prerequisite", "instructor:", "teaching assistant", "canvas",
    "subject to change", "course website", "points", "percent", "%", "due date", "meets on", "lecture time",
    "make-up", "syllabus"};

constexpr std::array<std::string_view, 8> kWeekdays{"monday", "tuesday", "wednesday", "thursday",
                                                    "friday", "saturday", "sunday", "tuesdays"};

constexpr std::array<std::string_view, 6> kOutcomePhrases{"students will", "able to", "learning outcome",
                                                          "by the end of", "you will learn", "gain experience"};

// Outcome verbs (Bloom-style). Matched as whole words with simple inflections.
constexpr std::array<std::string_view, 52> kOutcomeVerbs{
    "analyze", "apply",     "assess",    "build",      "classify",  "compare",   "compose",  "compute",
    "construct", "create",  "debug",     "deploy",     "derive",    "describe",  "design",   "develop",
    "demonstrate", "differentiate", "evaluate", "explain", "explore", "formulate", "identify", "implement",
    "integrate", "interpret", "investigate", "learn",  "manage",    "master",    "measure",  "model",
    "optimize",  "practice", "program",   "prove",      "query",     "reason",    "recognize", "refactor",
    "solve",     "specify",  "summarize", "test",       "trace",     "train",     "understand", "use",
    "validate",  "verify",   "visualize", "write"};

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains_time_of_day(const std::string& s) {
  // "2pm", "2 pm", "10:30am"
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if ((s[i] == 'a' || s[i] == 'p') && s[i + 1] == 'm') {
      const bool word_end = i + 2 == s.size() || !std::isalpha(static_cast<unsigned char>(s[i + 2]));
      std::size_t j = i;
      while (j > 0 && s[j - 1] == ' ') --j;
      if (word_end && j > 0 && std::isdigit(static_cast<unsigned char>(s[j - 1]))) return true;
    }
  }
  return false;
}

bool has_outcome_verb(const std::string& lower) {
  std::vector<std::string> words;
  std::string w;
  for (char c : lower) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      w.push_back(c);
    } else if (!w.empty()) {
      words.push_back(std::move(w));
      w.clear();
    }
  }
  if (!w.empty()) words.push_back(std::move(w));
  for (const auto& word : words) {
    for (auto verb : kOutcomeVerbs) {
      if (!word.starts_with(verb)) continue;
      std::string_view suffix = std::string_view(word).substr(verb.size());
      if (suffix.empty() || suffix == "s" || suffix == "es" || suffix == "d" || suffix == "ed" || suffix == "ing") {
        return true;
      }
      // design -> designing, model -> modelling, implement -> implementation is not a verb use.
      if (verb.back() == 'e' && (suffix == "ing" || suffix == "d")) return true;
    }
    // Drop-e forms: "analyzing", "writing", "using".
    for (auto verb : kOutcomeVerbs) {
      if (verb.back() != 'e') continue;
      std::string stem(verb.substr(0, verb.size() - 1));
      if (word == stem + "ing") return true;
    }
  }
  return false;
}

} // namespace

bool is_pedagogical(std::string_view sentence) {
  const std::string lower = lowercase(sentence);
  for (auto marker : kBoilerplate)
    if (lower.find(marker) != std::string::npos) return false;
  for (auto day : kWeekdays)
    if (lower.find(day) != std::string::npos) return false;
  if (contains_time_of_day(lower)) return false;
  for (auto phrase : kOutcomePhrases)
    if (lower.find(phrase) != std::string::npos) return true;
  return has_outcome_verb(lower);
}

std::vector<std::string> filter_pedagogical(std::span<const std::string> sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences)
    if (is_pedagogical(s)) out.push_back(s);
  return out;
}

} // namespace ler::skills

#include "ler/error.hpp"
#include "ler/skills.hpp"
#include "support/oracles.hpp"
#include "support/world.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ler;
using namespace ler::skills;
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

} // namespace

TEST(Embedding, UnitLengthDeterministicAndTokenized) {
  HashingEmbedding p;
  const auto a = p.embed("Implement hash tables in Java");
  EXPECT_EQ(a.size(), p.dimension());
  EXPECT_NEAR(dot(a, a), 1.0, 1e-12);
  EXPECT_EQ(a, p.embed("Implement hash tables in Java"));
  EXPECT_NEAR(cosine(a, p.embed("implement HASH tables, in java!")), 1.0, 1e-12);
  EXPECT_EQ(tokenize("C++ and C# with the STL"), (std::vector<std::string>{"c++", "c#", "stl"}));
  EXPECT_EQ(code_of([&] { p.embed("the and of"); }), Errc::NoEvidence);
}

TEST(Embedding, RemoteProviderUnavailable) {
  RemoteEmbedding r("127.0.0.1", 1, 8, "/embed", 1);
  EXPECT_EQ(code_of([&] { r.embed("x"); }), Errc::ProviderUnavailable);
}

TEST(Taxonomy, ParseAndErrors) {
  const auto t = fixture_taxonomy();
  EXPECT_EQ(t.size(), 30u);
  EXPECT_EQ(t.index_of("dwa-001"), 0u);
  EXPECT_EQ(t.find("dwa-010")->name, "C++");
  EXPECT_EQ(t.ref().size(), 64u);
  EXPECT_EQ(code_of([] { SkillTaxonomy({}); }), Errc::EmptyTaxonomy);
  EXPECT_THROW(SkillTaxonomy::parse_tsv("a\tdwa\tx\ty\na\tdwa\tz\tw\n"), Error);
  EXPECT_THROW(SkillTaxonomy::parse_tsv("a\tbogus\tx\ty\n"), Error);
}

TEST(Filter, FixtureKeepsExactlyTheOutcomeSentences) {
  const auto sentences = split_sentences(read_text_file(data_dir() / "filter_fixture.txt"));
  ASSERT_EQ(sentences.size(), 10u);
  const auto kept = filter_pedagogical(sentences);
  ASSERT_EQ(kept.size(), 4u);
  EXPECT_EQ(kept[0], "Students will implement a hash table with open addressing.");
  EXPECT_EQ(kept[1], "By the end of the course you will be able to analyze recursive algorithms.");
  EXPECT_EQ(kept[2], "Students will design relational schemas for a small business.");
  EXPECT_EQ(kept[3], "You will learn to write unit tests for every module.");
}

TEST(Scoring, ScoreSkillIsMaxCosine) {
  HashingEmbedding p;
  std::vector<Embedding> sents{p.embed("write sql queries"), p.embed("manage memory in c++"), p.embed("sql joins")};
  const auto skill = p.embed("sql queries and joins");
  double best = -2;
  for (const auto& s : sents) best = std::max(best, cosine(s, skill));
  EXPECT_DOUBLE_EQ(score_skill(sents, skill), best);
  EXPECT_EQ(code_of([&] { score_skill({}, skill); }), Errc::NoEvidence);
}

TEST(Scoring, WeightsAndBands) {
  const auto w = WeightConfig::defaults();
  EXPECT_EQ(level_band(99 + 1), "100");
  EXPECT_EQ(level_band(310), "300");
  EXPECT_EQ(level_band(512), "400+");
  EXPECT_THROW(level_band(42), Error);
  for (const auto* g : {"A", "A-", "B+", "B", "B-", "C+", "C", "C-", "D", "F"}) {
    EXPECT_DOUBLE_EQ(w.grade_weight(g), static_cast<double>(oracle_grade_weight(g))) << g;
  }
  for (int level : {100, 150, 200, 299, 300, 400, 650}) {
    EXPECT_DOUBLE_EQ(w.level_weight(level), static_cast<double>(oracle_level_weight(level))) << level;
  }
  EXPECT_EQ(code_of([&] { w.grade_weight("P"); }), Errc::UnknownWeightKey);
  auto bad = w;
  bad.grade_weights["A"] = -1;
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_EQ(WeightConfig::from_json(w.to_json()), w);
}

TEST(Scoring, TopKOrderingAndBounds) {
  const auto t = fixture_taxonomy();
  SkillVector v{t.ref(), std::vector<double>(t.size(), 0.0)};
  v.values[3] = 0.9;
  v.values[1] = 0.9;
  v.values[7] = 0.95;
  const auto top = top_k(v, t, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].skill_id, "dwa-008");
  EXPECT_EQ(top[1].skill_id, "dwa-002");
  EXPECT_EQ(top[2].skill_id, "dwa-004");
  EXPECT_EQ(code_of([&] { top_k(v, t, 0); }), Errc::BadK);
  EXPECT_EQ(code_of([&] { top_k(v, t, 31); }), Errc::BadK);
}

TEST(Scoring, PipelineMatchesBruteForceOracleOnFixtures) {
  HashingEmbedding p;
  const auto t = fixture_taxonomy();
  const auto courses = attach_syllabi(fixture_transcript(), fixture_syllabi());
  const EmbeddedTaxonomy et(t, p);
  for (const auto& c : courses) {
    const auto retained = filter_pedagogical(c.syllabus_sentences);
    ASSERT_FALSE(retained.empty()) << c.course_id;
    const auto got = course_vector(c, et);
    const auto want = oracle_course_vector(p, retained, t);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(std::fabs(got.values[i] - static_cast<double>(want[i])), 1e-9);
  }
  const auto v = derive_skill_vector(courses, et, WeightConfig::defaults());
  const auto want = oracle_skill_vector(p, courses, t);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(std::fabs(v.values[i] - static_cast<double>(want[i])), 1e-9);

  const auto top = top_k(v, t, 10);
  const auto otop = oracle_top_k(want, t, 10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(top[i].skill_id, otop[i].first);
}

TEST(Scoring, RandomCoursesMatchOracle) {
  HashingEmbedding p;
  const auto t = fixture_taxonomy();
  const EmbeddedTaxonomy et(t, p);
  std::mt19937_64 gen(11);
  const std::vector<std::string> words{"students", "will", "implement", "sql", "queries", "java", "classes",
                                       "threads", "git", "branches", "python", "scripts", "analyze", "graphs"};
  const std::vector<std::string> grades{"A", "A-", "B+", "B", "C", "D"};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<CourseRecord> courses;
    for (int c = 0; c < 1 + static_cast<int>(gen() % 4); ++c) {
      CourseRecord r{"C" + std::to_string(c), "t", 100 + static_cast<int>(gen() % 400), grades[gen() % grades.size()], {}};
      for (int s = 0; s < 1 + static_cast<int>(gen() % 4); ++s) {
        std::string sentence = "Students will";
        for (int k = 0; k < 3 + static_cast<int>(gen() % 5); ++k) sentence += " " + words[gen() % words.size()];
        r.syllabus_sentences.push_back(sentence + ".");
      }
      courses.push_back(r);
    }
    const auto v = derive_skill_vector(courses, et, WeightConfig::defaults());
    const auto want = oracle_skill_vector(p, courses, t);
    for (std::size_t i = 0; i < t.size(); ++i) ASSERT_LE(std::fabs(v.values[i] - static_cast<double>(want[i])), 1e-9);
  }
}

TEST(Scoring, PersonalizeRejectsMisalignedInputs) {
  const auto t = fixture_taxonomy();
  std::vector<CourseRecord> courses{{"X", "x", 100, "A", {}}};
  std::vector<SkillVector> vs{{t.ref(), {1.0}}, {t.ref(), {1.0}}};
  EXPECT_THROW(personalize(courses, vs, WeightConfig::defaults()), Error);
  EXPECT_EQ(code_of([&] {
              derive_skill_vector(std::vector<CourseRecord>{{"X", "x", 100, "A", {"Office hours are Monday."}}},
                                  EmbeddedTaxonomy(t, HashingEmbedding{}), WeightConfig::defaults());
            }),
            Errc::NoEvidence);
}

#include <gtest/gtest.h>

#include <map>
#include <string>
#include <vector>

#include "arbiter/basin.hpp"
#include "support.hpp"

namespace arbiter {
namespace {

using testing::candidate;
using testing::Gen;

std::vector<Candidate> raw_pool(const std::vector<std::string>& answers) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < answers.size(); ++i) out.push_back(candidate(Source::Raw, static_cast<int>(i), answers[i]));
  return out;
}

std::vector<std::pair<std::string, int>> shape(const BasinSet& b) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& basin : b.basins) out.emplace_back(basin.answer, basin.size());
  return out;
}

TEST(Basin, TieBrokenByEarliestMember) {
  const auto b = build_basins("q", raw_pool({"1", "1", "2", "1", "3"}), TaskFormat::Numeric);
  const std::vector<std::pair<std::string, int>> expected = {{"1", 3}, {"2", 1}, {"3", 1}};
  EXPECT_EQ(shape(b), expected);
  EXPECT_EQ(b.consensus_answer, "1");
  EXPECT_EQ(b.at_rank(1).members, (std::vector<int>{0, 1, 3}));
}

TEST(Basin, TieOnSizeAndIndexFallsBackToAnswer) {
  // Same earliest index cannot happen within one source, but the answer
  // string still orders equal-size basins when indices are not contiguous.
  auto pool = raw_pool({"9", "5"});
  pool[0].index = 4;
  pool[1].index = 2;
  const auto b = build_basins("q", pool, TaskFormat::Numeric);
  EXPECT_EQ(b.at_rank(1).answer, "5");
}

TEST(Basin, Unanimous) {
  const auto b = build_basins("q", raw_pool({"7", "7"}), TaskFormat::Numeric);
  EXPECT_EQ(b.count(), 1);
  EXPECT_EQ(b.consensus_answer, "7");
}

TEST(Basin, EighteenFourAndThreeSingletons) {
  std::vector<std::string> answers;
  for (int i = 0; i < 18; ++i) answers.push_back("42");
  for (int i = 0; i < 4; ++i) answers.push_back("48");
  answers.insert(answers.end(), {"36", "54", "14"});
  Gen g(1);
  std::shuffle(answers.begin(), answers.end(), g.engine());
  const auto b = build_basins("q", raw_pool(answers), TaskFormat::Numeric);
  ASSERT_EQ(b.count(), 5);
  EXPECT_EQ(b.at_rank(1).answer, "42");
  EXPECT_EQ(b.at_rank(1).size(), 18);
  EXPECT_EQ(b.at_rank(2).answer, "48");
  EXPECT_EQ(b.at_rank(2).size(), 4);
}

TEST(Basin, InvalidAndGreedyCastNoVote) {
  auto pool = raw_pool({"", "3", "", "4", "4"});
  auto greedy = candidate(Source::Greedy, 0, "3");
  pool.push_back(greedy);
  pool.push_back(candidate(Source::Framed, 0, "3"));
  const auto b = build_basins("q", pool, TaskFormat::Numeric);
  EXPECT_EQ(shape(b), (std::vector<std::pair<std::string, int>>{{"4", 2}, {"3", 1}}));
  EXPECT_EQ(b.raw_attempted, 5);
  EXPECT_EQ(b.invalid_count, 2);
  ASSERT_TRUE(b.greedy_answer.has_value());
  EXPECT_EQ(*b.greedy_answer, "3");
}

TEST(Basin, BoxedAnswersGroupByValue) {
  std::vector<Candidate> pool;
  for (const auto* text : {"\\boxed{0.5}", "\\boxed{\\frac{1}{2}}", "\\boxed{2/4}", "\\boxed{x}"}) {
    Candidate c;
    c.index = static_cast<int>(pool.size());
    c.text = text;
    c.answer = extract_answer(text, TaskFormat::Boxed);
    pool.push_back(c);
  }
  const auto b = build_basins("q", pool, TaskFormat::Boxed);
  ASSERT_EQ(b.count(), 2);
  EXPECT_EQ(b.at_rank(1).answer, "0.5");
  EXPECT_EQ(b.at_rank(1).size(), 3);
}

TEST(Basin, Errors) {
  EXPECT_THROW(build_basins("q", raw_pool({"", ""}), TaskFormat::Numeric), Error);
  try {
    build_basins("q9", raw_pool({""}), TaskFormat::Numeric);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("empty basin set"), std::string::npos);
  }
  auto dup = raw_pool({"1", "2"});
  dup[1].index = 0;
  EXPECT_THROW(build_basins("q", dup, TaskFormat::Numeric), Error);
}

TEST(Basin, DisagreementSlice) {
  std::vector<BasinSet> sets = {build_basins("a", raw_pool({"1", "1"}), TaskFormat::Numeric),
                                build_basins("b", raw_pool({"1", "2"}), TaskFormat::Numeric),
                                build_basins("c", raw_pool({"1", "2", "3"}), TaskFormat::Numeric)};
  EXPECT_EQ(disagreement_slice(sets), (std::vector<std::string>{"b", "c"}));
  sets.erase(sets.begin() + 1, sets.end());
  EXPECT_TRUE(disagreement_slice(sets).empty());
}

TEST(Basin, SourceNames) {
  for (auto s : kAllSources) EXPECT_EQ(parse_source(to_string(s)), s);
  EXPECT_THROW(parse_source("oracle"), Error);
}

TEST(BasinProperty, RandomPools) {
  Gen g(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = g.between(1, 40);
    std::vector<std::string> answers;
    const int distinct = g.between(1, 6);
    for (int i = 0; i < k; ++i) answers.push_back(g.coin(0.1) ? "" : std::to_string(g.between(1, distinct)));
    const auto pool = raw_pool(answers);
    int valid = 0;
    for (const auto& a : answers) valid += !a.empty();
    if (valid == 0) {
      EXPECT_THROW(build_basins("q", pool, TaskFormat::Numeric), Error);
      continue;
    }
    const auto b = build_basins("q", pool, TaskFormat::Numeric);
    ASSERT_EQ(b, build_basins("q", pool, TaskFormat::Numeric));

    int total = 0;
    std::vector<int> seen;
    for (int r = 1; r <= b.count(); ++r) {
      total += b.at_rank(r).size();
      if (r > 1) {
        ASSERT_GE(b.at_rank(r - 1).size(), b.at_rank(r).size());
        if (b.at_rank(r - 1).size() == b.at_rank(r).size()) {
          ASSERT_LT(b.at_rank(r - 1).members.front(), b.at_rank(r).members.front());
        }
      }
      for (int m : b.at_rank(r).members) {
        ASSERT_EQ(answers[static_cast<std::size_t>(m)], b.at_rank(r).answer);
        seen.push_back(m);
      }
    }
    ASSERT_EQ(total + b.invalid_count, k);
    ASSERT_EQ(b.raw_attempted, k);
    std::sort(seen.begin(), seen.end());
    ASSERT_TRUE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    ASSERT_EQ(b.consensus_answer, b.at_rank(1).answer);

    // Shuffling the candidate order never changes the result.
    auto shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
    ASSERT_EQ(build_basins("q", shuffled, TaskFormat::Numeric), b);
  }
}

}  // namespace
}  // namespace arbiter

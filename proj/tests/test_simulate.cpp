#include <gtest/gtest.h>

#include <vector>

#include "arbiter/artifacts.hpp"
#include "arbiter/simulate.hpp"
#include "support.hpp"

namespace arbiter {
namespace {

SimConfig small(int n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n_questions = n;
  cfg.rng_seed = seed;
  return cfg;
}

TEST(Simulate, AllWrongMajority) {
  auto cfg = small(100, 3);
  cfg.wrong_majority_rate = 1.0;
  for (const auto& inst : generate(cfg)) {
    ASSERT_EQ(inst.planted, Planted::WrongMajority);
    ASSERT_TRUE(wrong_majority(build_basins(inst.pool), inst.gold, TaskFormat::Numeric));
  }
}

TEST(Simulate, PlantedCategoriesMatchConstruction) {
  auto cfg = small(2000, 4);
  cfg.wrong_majority_rate = 0.2;
  cfg.gold_absent_rate = 0.1;
  cfg.raw_invalid_rate = 0.05;
  int counts[3] = {0, 0, 0};
  for (const auto& inst : generate(cfg, 4)) {
    ++counts[static_cast<int>(inst.planted)];
    const auto b = build_basins(inst.pool);
    switch (inst.planted) {
      case Planted::CorrectMajority:
        ASSERT_EQ(b.consensus_answer, inst.gold.answer);
        break;
      case Planted::WrongMajority:
        ASSERT_TRUE(wrong_majority(b, inst.gold, TaskFormat::Numeric));
        break;
      case Planted::GoldAbsent:
        ASSERT_EQ(b.rank_of(NormalizedAnswer::of(inst.gold.answer), TaskFormat::Numeric), 0);
        break;
    }
  }
  EXPECT_NEAR(counts[1] / 2000.0, 0.2, 0.03);
  EXPECT_NEAR(counts[2] / 2000.0, 0.1, 0.03);
}

TEST(Simulate, DeterministicAndJobIndependent) {
  const auto cfg = small(300, 9);
  const auto a = generate(cfg, 1);
  const auto b = generate(cfg, 1);
  const auto c = generate(cfg, 6);
  ASSERT_EQ(a.size(), c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].pool, b[i].pool);
    ASSERT_EQ(a[i].pool, c[i].pool);
    ASSERT_EQ(a[i].gold, c[i].gold);
  }
  EXPECT_NE(generate(small(5, 10))[0].pool, a[0].pool);
}

TEST(Simulate, PoolAccounting) {
  auto cfg = small(200, 5);
  cfg.raw_invalid_rate = 0.2;
  for (const auto& inst : generate(cfg)) {
    int raw = 0, framed = 0, guided = 0, plus = 0, minus = 0, greedy = 0;
    for (const auto& c : inst.pool.candidates) {
      raw += c.source == Source::Raw;
      framed += c.source == Source::Framed;
      guided += c.source == Source::Guided;
      plus += c.source == Source::PanelOriginal;
      minus += c.source == Source::PanelSwapped;
      greedy += c.source == Source::Greedy;
      ASSERT_EQ(c.answer, extract_answer(c.text, TaskFormat::Numeric));
    }
    ASSERT_EQ(raw, 24);
    ASSERT_EQ(framed, 24);
    ASSERT_EQ(guided, 4);
    ASSERT_EQ(plus, 6);
    ASSERT_EQ(minus, 6);
    ASSERT_EQ(greedy, 1);
  }
}

TEST(Simulate, FullOnPairMassWithoutOffPairOutputs) {
  auto cfg = small(10000, 6);
  cfg.framed_fidelity = cfg.guided_fidelity = cfg.panel_fidelity = 0.5;
  cfg.off_pair_rate = 0.0;
  double sum = 0.0;
  int n = 0;
  for (const auto& inst : generate(cfg, 4)) {
    const auto b = build_basins(inst.pool);
    if (b.count() < 2) continue;
    const auto ledger = assign_evidence(inst.pool.candidates, b, TaskFormat::Numeric);
    sum += reliability_top2(ledger, b).r_f;
    ++n;
  }
  ASSERT_GT(n, 1000);
  EXPECT_DOUBLE_EQ(sum / n, 1.0);
}

TEST(Simulate, InvalidConfigs) {
  auto cfg = small(10, 1);
  cfg.wrong_majority_rate = 0.5;
  cfg.basin_count_weights = {1.0};
  EXPECT_THROW(generate(cfg), Error);
  cfg = small(10, 1);
  cfg.framed_fidelity = 1.5;
  EXPECT_THROW(generate(cfg), Error);
  cfg = small(10, 1);
  cfg.k_raw = 0;
  EXPECT_THROW(generate(cfg), Error);
  cfg = small(10, 1);
  cfg.wrong_majority_rate = 0.7;
  cfg.gold_absent_rate = 0.7;
  EXPECT_THROW(generate(cfg), Error);
  cfg = small(10, 1);
  cfg.basin_count_weights = {0.0, 0.0};
  EXPECT_THROW(generate(cfg), Error);
}

TEST(Simulate, InstancesRoundTripThroughArtifactsAndPipeline) {
  auto cfg = small(300, 7);
  cfg.raw_invalid_rate = 0.3;
  cfg.gold_absent_rate = 0.1;
  const auto instances = generate(cfg, 3);
  testing::TempDir dir;
  std::vector<CandidatePool> pools;
  for (const auto& inst : instances) pools.push_back(inst.pool);
  write_jsonl(dir / "pool.jsonl", pools);
  const auto back = read_jsonl<CandidatePool>(dir / "pool.jsonl").records;
  ASSERT_EQ(back, pools);
  const auto outcomes = run_pipeline(back, PolicyConfig{}, {}, nullptr, 3);
  const auto r = score_outcomes(outcomes, gold_map(instances), TaskFormat::Numeric).report;
  EXPECT_EQ(r.n, 300);
  EXPECT_EQ(r, sweep_policy(instances, PolicyConfig{}));
}

TEST(Simulate, NoAuxiliaryEvidenceMeansNoOverrides) {
  auto cfg = small(500, 8);
  cfg.framed_trials = cfg.guided_trials = cfg.panel_trials = 0;
  cfg.wrong_majority_rate = 0.5;
  const auto r = sweep_policy(generate(cfg), PolicyConfig{});
  EXPECT_EQ(r.overrides, 0);
  EXPECT_EQ(r.final_correct, r.baseline_correct);
}

TEST(Simulate, FaithfulAndAdversarialSources) {
  auto cfg = small(200, 9);
  cfg.wrong_majority_rate = 1.0;
  cfg.framed_fidelity = cfg.guided_fidelity = cfg.panel_fidelity = 1.0;
  const auto faithful = sweep_policy(generate(cfg), PolicyConfig{});
  EXPECT_GT(faithful.recovered, 0);
  EXPECT_EQ(faithful.degraded, 0);

  auto adv = small(200, 9);
  adv.wrong_majority_rate = 0.3;
  adv.framed_fidelity = adv.guided_fidelity = adv.panel_fidelity = 0.0;
  const auto bad = sweep_policy(generate(adv), PolicyConfig{});
  EXPECT_LE(bad.net, 0);
  EXPECT_EQ(bad.recovered, 0);
}

TEST(SimulateProperty, ConservatismCurve) {
  const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> mean_net(grid.size(), 0.0);
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto cfg = small(120, 1000 + static_cast<std::uint64_t>(s));
      cfg.wrong_majority_rate = 0.25;
      cfg.framed_fidelity = cfg.guided_fidelity = cfg.panel_fidelity = grid[i];
      mean_net[i] += sweep_policy(generate(cfg), PolicyConfig{}).net / static_cast<double>(seeds);
    }
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_LE(mean_net[i - 1], mean_net[i]) << "fidelity " << grid[i - 1] << " -> " << grid[i];
  }
  EXPECT_LT(mean_net.front(), 0.0);
  EXPECT_GT(mean_net.back(), 0.0);
}

}  // namespace
}  // namespace arbiter

#pragma once

// Synthetic pools with planted gold answers and tunable auxiliary evidence.
//
// Every instance draws from its own mt19937_64 stream seeded from
// (rng_seed, instance index), so generation is parallel-safe. Each auxiliary
// output consumes a fixed number of draws regardless of the fidelity
// settings, which gives common random numbers across fidelity sweeps: raising
// a fidelity can only move individual outputs onto the gold basin.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arbiter/basin.hpp"
#include "arbiter/error.hpp"
#include "arbiter/metrics.hpp"
#include "arbiter/parallel.hpp"
#include "arbiter/pipeline.hpp"

namespace arbiter {

struct SimConfig {
  int n_questions = 100;
  int k_raw = 24;
  // Relative weight of m(q) = 1, 2, 3, ... observed basins.
  std::vector<double> basin_count_weights = {0.45, 0.35, 0.12, 0.08};
  double wrong_majority_rate = 0.1;
  double gold_absent_rate = 0.0;
  double framed_fidelity = 0.7;
  double guided_fidelity = 0.7;
  double panel_fidelity = 0.7;
  double off_pair_rate = 0.1;
  double raw_invalid_rate = 0.0;
  int framed_trials = 24;
  int guided_trials = 4;
  int panel_trials = 12;  // split across both frame orders
  bool greedy_anchor = true;
  double temperature = 0.7;
  std::uint64_t rng_seed = 0;
};

enum class Planted { CorrectMajority, WrongMajority, GoldAbsent };

inline std::string_view to_string(Planted p) {
  switch (p) {
    case Planted::CorrectMajority:
      return "correct_majority";
    case Planted::WrongMajority:
      return "wrong_majority";
    case Planted::GoldAbsent:
      return "gold_absent";
  }
  return "correct_majority";
}

struct SimInstance {
  CandidatePool pool;
  GoldLabel gold;
  Planted planted = Planted::CorrectMajority;
  std::string question_text;
};

namespace detail {

class SimRng {
 public:
  SimRng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline void validate(const SimConfig& cfg) {
  auto prob = [](double p, std::string_view name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("simulate: " + std::string(name) + " must lie in [0,1]");
  };
  prob(cfg.wrong_majority_rate, "wrong_majority_rate");
  prob(cfg.gold_absent_rate, "gold_absent_rate");
  prob(cfg.framed_fidelity, "framed_fidelity");
  prob(cfg.guided_fidelity, "guided_fidelity");
  prob(cfg.panel_fidelity, "panel_fidelity");
  prob(cfg.off_pair_rate, "off_pair_rate");
  prob(cfg.raw_invalid_rate, "raw_invalid_rate");
  if (cfg.wrong_majority_rate + cfg.gold_absent_rate > 1.0) {
    throw Error("simulate: wrong_majority_rate + gold_absent_rate exceeds 1");
  }
  if (cfg.n_questions < 0) throw Error("simulate: n_questions must be >= 0");
  if (cfg.k_raw < 1) throw Error("simulate: k_raw must be >= 1");
  if (cfg.framed_trials < 0 || cfg.guided_trials < 0 || cfg.panel_trials < 0) {
    throw Error("simulate: trial counts must be >= 0");
  }
  if (cfg.basin_count_weights.empty()) throw Error("simulate: basin_count_weights is empty");
  double total = 0.0;
  double multi = 0.0;
  for (std::size_t i = 0; i < cfg.basin_count_weights.size(); ++i) {
    const double w = cfg.basin_count_weights[i];
    if (!(w >= 0.0)) throw Error("simulate: basin_count_weights must be >= 0");
    total += w;
    if (i >= 1 && static_cast<int>(i) + 1 <= cfg.k_raw) multi += w;
  }
  if (total <= 0.0) throw Error("simulate: basin_count_weights sum to 0");
  if (cfg.wrong_majority_rate > 0.0 && multi <= 0.0) {
    throw Error("simulate: infeasible config, wrong-majority instances need m(q) >= 2");
  }
}

// Draws m from the weights restricted to [min_m, k_raw].
inline int draw_basin_count(SimRng& rng, const std::vector<double>& weights, int min_m, int k_raw) {
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const int m = static_cast<int>(i) + 1;
    if (m >= min_m && m <= k_raw) total += weights[i];
  }
  double u = rng.uniform() * total;
  int last = min_m;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const int m = static_cast<int>(i) + 1;
    if (m < min_m || m > k_raw || weights[i] <= 0.0) continue;
    last = m;
    if (u < weights[i]) return m;
    u -= weights[i];
  }
  return last;
}

inline std::string render_number(int value, SimRng& rng) {
  std::string digits = std::to_string(value);
  // Thousands separators on some samples, so extraction does real work.
  if (value >= 1000 && rng.uniform() < 0.5) {
    for (int at = static_cast<int>(digits.size()) - 3; at > 0; at -= 3) digits.insert(static_cast<std::size_t>(at), ",");
  }
  return digits;
}

inline std::string solution_text(int value, SimRng& rng) {
  static constexpr std::string_view kLead[] = {
      "Let me work through the quantities step by step.", "Set up the equation from the statement and solve it.",
      "Work backwards from what is asked.", "Compute, then check the arithmetic once more."};
  const auto lead = kLead[rng.below(std::size(kLead))];
  return std::string(lead) + "\nSo the result follows.\n#### " + render_number(value, rng);
}

inline constexpr std::string_view kUnparseable = "I could not settle on a final value for this one.";

}  // namespace detail

inline SimInstance generate_instance(const SimConfig& cfg, std::size_t index) {
  detail::SimRng rng(cfg.rng_seed, index);
  SimInstance inst;
  char qid[32];
  std::snprintf(qid, sizeof qid, "q%06zu", index);
  inst.pool.question_id = qid;
  inst.pool.format = TaskFormat::Numeric;
  inst.gold.question_id = qid;
  inst.question_text = "Synthetic question " + std::string(qid);

  const double u_plant = rng.uniform();
  if (u_plant < cfg.wrong_majority_rate) {
    inst.planted = Planted::WrongMajority;
  } else if (u_plant < cfg.wrong_majority_rate + cfg.gold_absent_rate) {
    inst.planted = Planted::GoldAbsent;
  } else {
    inst.planted = Planted::CorrectMajority;
  }

  // Raw slots: invalid ones drawn first, keeping room for m basins.
  const int min_m = inst.planted == Planted::WrongMajority ? 2 : 1;
  const int m_wanted = detail::draw_basin_count(rng, cfg.basin_count_weights, min_m, cfg.k_raw);
  int invalid = 0;
  for (int i = 0; i < cfg.k_raw; ++i) invalid += rng.uniform() < cfg.raw_invalid_rate;
  const int valid = std::max(cfg.k_raw - invalid, m_wanted);
  invalid = cfg.k_raw - valid;
  const int m = m_wanted;

  // Sizes: one sample each, remainder spread with geometrically decaying weights.
  std::vector<double> weight(static_cast<std::size_t>(m));
  double wsum = 0.0;
  for (int j = 0; j < m; ++j) {
    weight[static_cast<std::size_t>(j)] = std::exp(-1.2 * j) * (0.5 + rng.uniform());
    wsum += weight[static_cast<std::size_t>(j)];
  }
  std::vector<int> sizes(static_cast<std::size_t>(m), 1);
  for (int u = 0; u < valid - m; ++u) {
    double x = rng.uniform() * wsum;
    std::size_t j = 0;
    while (j + 1 < weight.size() && x >= weight[j]) x -= weight[j++];
    ++sizes[j];
  }

  // Distinct answer values; the extra one is used for gold-absent pools.
  std::vector<int> values;
  while (static_cast<int>(values.size()) < m + 1) {
    const int v = 1 + static_cast<int>(rng.below(99999));
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
  }

  // Shuffled raw order.
  std::vector<int> slots;  // basin number per raw slot, -1 = invalid
  for (int j = 0; j < m; ++j) slots.insert(slots.end(), static_cast<std::size_t>(sizes[static_cast<std::size_t>(j)]), j);
  slots.insert(slots.end(), static_cast<std::size_t>(invalid), -1);
  for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);

  auto& cands = inst.pool.candidates;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    Candidate c;
    c.index = static_cast<int>(i);
    c.source = Source::Raw;
    c.temperature = cfg.temperature;
    c.seed = rng.bits();
    c.template_id = "raw_step";
    c.text = slots[i] < 0 ? std::string(detail::kUnparseable)
                          : detail::solution_text(values[static_cast<std::size_t>(slots[i])], rng);
    c.answer = extract_answer(c.text, TaskFormat::Numeric);
    cands.push_back(std::move(c));
  }

  const BasinSet basins = build_basins(inst.pool);
  const std::string& dominant = basins.at_rank(1).answer;
  switch (inst.planted) {
    case Planted::CorrectMajority:
      inst.gold.answer = dominant;
      break;
    case Planted::WrongMajority:
      inst.gold.answer = basins.at_rank(2).answer;
      break;
    case Planted::GoldAbsent:
      inst.gold.answer = std::to_string(values.back());
      break;
  }

  if (cfg.greedy_anchor) {
    Candidate g;
    g.source = Source::Greedy;
    g.template_id = "raw_step";
    g.seed = rng.bits();
    g.text = "Greedy decode.\n#### " + dominant;
    g.answer = extract_answer(g.text, TaskFormat::Numeric);
    cands.push_back(std::move(g));
  } else {
    rng.bits();
  }

  // Auxiliary outputs. Three draws per output, always.
  const bool has_pair = basins.count() >= 2;
  const std::string* gold_basin = nullptr;
  const std::string* other_basin = nullptr;
  if (has_pair) {
    const auto& a1 = basins.at_rank(1).answer;
    const auto& a2 = basins.at_rank(2).answer;
    if (inst.gold.answer == a1) {
      gold_basin = &a1;
      other_basin = &a2;
    } else if (inst.gold.answer == a2) {
      gold_basin = &a2;
      other_basin = &a1;
    }
  }
  auto emit = [&](Source src, int trial, double fidelity, std::string_view template_id) {
    const double u_off = rng.uniform();
    const double u_side = rng.uniform();
    const std::uint64_t pick = rng.bits();
    Candidate c;
    c.index = trial;
    c.source = src;
    c.temperature = cfg.temperature;
    c.seed = pick;
    c.template_id = std::string(template_id);
    std::string answer;
    if (u_off < cfg.off_pair_rate || !has_pair) {
      if (!has_pair && u_off >= cfg.off_pair_rate) {
        answer = basins.at_rank(1).answer;
      } else if (basins.count() >= 3 && (pick & 1) == 0) {
        answer = basins.at_rank(3 + static_cast<int>((pick >> 1) % static_cast<std::uint64_t>(basins.count() - 2))).answer;
      } else if ((pick & 2) == 0) {
        answer = std::to_string(100000 + static_cast<int>((pick >> 8) % 100000));
      }
    } else if (gold_basin != nullptr) {
      answer = u_side < fidelity ? *gold_basin : *other_basin;
    } else {
      answer = u_side < 0.5 ? basins.at_rank(1).answer : basins.at_rank(2).answer;
    }
    c.text = answer.empty() ? std::string(detail::kUnparseable) : "Interpreting the question first.\n#### " + answer;
    c.answer = extract_answer(c.text, TaskFormat::Numeric);
    cands.push_back(std::move(c));
  };
  for (int t = 0; t < cfg.framed_trials; ++t) emit(Source::Framed, t, cfg.framed_fidelity, "framed");
  for (int t = 0; t < cfg.panel_trials; ++t) {
    emit(t % 2 == 0 ? Source::PanelOriginal : Source::PanelSwapped, t / 2, cfg.panel_fidelity, "panel");
  }
  for (int t = 0; t < cfg.guided_trials; ++t) emit(Source::Guided, t, cfg.guided_fidelity, "guided");
  return inst;
}

inline std::vector<SimInstance> generate(const SimConfig& cfg, int jobs = 1) {
  detail::validate(cfg);
  std::vector<SimInstance> out(static_cast<std::size_t>(cfg.n_questions));
  parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = generate_instance(cfg, i); });
  return out;
}

inline std::map<std::string, GoldLabel> gold_map(std::span<const SimInstance> instances) {
  std::map<std::string, GoldLabel> gold;
  for (const auto& inst : instances) gold.emplace(inst.gold.question_id, inst.gold);
  return gold;
}

// Runs the full arbitration and scoring loop over simulated instances.
inline ScoredRun sweep_policy_detailed(std::span<const SimInstance> instances, const PolicyConfig& cfg,
                                       const ResidualConfig& rcfg = {}, const ResidualTable* residuals = nullptr,
                                       int jobs = 1) {
  std::vector<CandidatePool> pools;
  pools.reserve(instances.size());
  for (const auto& inst : instances) pools.push_back(inst.pool);
  const auto outcomes = run_pipeline(pools, cfg, rcfg, residuals, jobs);
  return score_outcomes(outcomes, gold_map(instances), TaskFormat::Numeric);
}

inline CorrectionReport sweep_policy(std::span<const SimInstance> instances, const PolicyConfig& cfg,
                                     const ResidualConfig& rcfg = {}, const ResidualTable* residuals = nullptr,
                                     int jobs = 1) {
  return sweep_policy_detailed(instances, cfg, rcfg, residuals, jobs).report;
}

}  // namespace arbiter

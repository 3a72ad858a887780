#pragma once

// Per-question arbitration: pool -> basins -> ledger -> Delta (+ residual).

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arbiter/basin.hpp"
#include "arbiter/delta.hpp"
#include "arbiter/error.hpp"
#include "arbiter/evidence.hpp"
#include "arbiter/metrics.hpp"
#include "arbiter/parallel.hpp"
#include "arbiter/residual.hpp"

namespace arbiter {

// Residual sidecar values keyed by (question_id, challenger rank).
using ResidualTable = std::map<std::pair<std::string, int>, ResidualInput>;

struct QuestionOutcome {
  std::string question_id;
  std::optional<BasinSet> basins;  // empty when no raw sample parsed
  EvidenceLedger ledger;
  std::optional<DeltaDecision> decision;  // only for pools with a challenger
  std::string baseline;                   // raw consensus, "" without basins
  std::string prediction;
};

inline QuestionOutcome arbitrate_question(const CandidatePool& pool, const PolicyConfig& cfg,
                                          const ResidualConfig& rcfg = {}, const ResidualTable* residuals = nullptr) {
  QuestionOutcome out;
  out.question_id = pool.question_id;
  out.ledger.question_id = pool.question_id;
  out.ledger.alpha = cfg.alpha;
  bool any_valid = false;
  for (const auto& c : pool.candidates) any_valid |= c.source == Source::Raw && c.answer.valid;
  if (!any_valid) {
    for (const auto& c : pool.candidates) {
      if (c.source != Source::Raw && c.source != Source::Greedy) ++out.ledger.tally(c.source).attempted;
      if (c.source == Source::Raw) ++out.ledger.raw.attempted;
    }
    return out;
  }
  out.basins = build_basins(pool);
  out.ledger = assign_evidence(pool.candidates, *out.basins, pool.format);
  out.ledger.alpha = cfg.alpha;
  out.baseline = out.basins->consensus_answer;
  auto arb = arbitrate(out.ledger, *out.basins, cfg);
  if (arb.decision && rcfg.lambda > 0.0 && residuals != nullptr) {
    if (auto it = residuals->find({pool.question_id, cfg.challenger_rank}); it != residuals->end()) {
      arb.decision = delta_enc(*arb.decision, it->second, rcfg);
      arb.answer = select(*arb.decision, *out.basins);
    }
  }
  out.decision = std::move(arb.decision);
  out.prediction = std::move(arb.answer);
  return out;
}

// Outcomes come back in input order whatever the job count.
inline std::vector<QuestionOutcome> run_pipeline(std::span<const CandidatePool> pools, const PolicyConfig& cfg,
                                                 const ResidualConfig& rcfg = {},
                                                 const ResidualTable* residuals = nullptr, int jobs = 1) {
  std::vector<QuestionOutcome> out(pools.size());
  parallel_for(pools.size(), jobs, [&](std::size_t i) { out[i] = arbitrate_question(pools[i], cfg, rcfg, residuals); });
  return out;
}

// Joins outcomes with gold labels.
inline ScoredRun score_outcomes(std::span<const QuestionOutcome> outcomes, const std::map<std::string, GoldLabel>& gold,
                                TaskFormat fmt) {
  std::map<std::string, std::string> predictions;
  std::map<std::string, std::string> baselines;
  std::map<std::string, BasinSet> basins;
  for (const auto& o : outcomes) {
    if (!predictions.emplace(o.question_id, o.prediction).second) {
      throw Error("duplicate question_id " + o.question_id);
    }
    baselines.emplace(o.question_id, o.baseline);
    if (o.basins) basins.emplace(o.question_id, *o.basins);
  }
  return score_run_detailed(predictions, baselines, basins, gold, fmt);
}

// Puts auxiliary candidates from `evidence` into the matching baseline pool.
inline std::vector<CandidatePool> merge_pools(std::vector<CandidatePool> baseline,
                                              std::span<const CandidatePool> evidence) {
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (!at.emplace(baseline[i].question_id, i).second) {
      throw Error("duplicate question_id " + baseline[i].question_id + " in pool");
    }
  }
  for (const auto& ev : evidence) {
    auto it = at.find(ev.question_id);
    if (it == at.end()) throw Error("evidence for unknown question_id " + ev.question_id);
    auto& dst = baseline[it->second].candidates;
    for (const auto& c : ev.candidates) {
      if (c.source == Source::Raw || c.source == Source::Greedy) {
        throw Error("evidence pool for " + ev.question_id + " carries a " + std::string(to_string(c.source)) +
                    " candidate");
      }
      dst.push_back(c);
    }
  }
  return baseline;
}

}  // namespace arbiter

#pragma once

// The log-linear override score: raw prior plus reliability-weighted
// auxiliary log ratios, challenger selected only on a strictly positive sum.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "arbiter/basin.hpp"
#include "arbiter/error.hpp"
#include "arbiter/evidence.hpp"

namespace arbiter {

enum class SourceSet { FramedGuided, PanelGuided, AllSources, RawOnly };

inline std::string_view to_string(SourceSet s) {
  switch (s) {
    case SourceSet::FramedGuided:
      return "framed_guided";
    case SourceSet::PanelGuided:
      return "panel_guided";
    case SourceSet::AllSources:
      return "all_sources";
    case SourceSet::RawOnly:
      return "raw_only";
  }
  return "framed_guided";
}

inline SourceSet parse_source_set(std::string_view name) {
  for (auto s : {SourceSet::FramedGuided, SourceSet::PanelGuided, SourceSet::AllSources, SourceSet::RawOnly}) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown source set '" + std::string(name) + "'");
}

// Measured: reliabilities from top-pair masses. Unit: every factor is 1,
// as in a hand calculation that ignores off-pair outputs.
enum class ReliabilityMode { Measured, Unit };

inline std::string_view to_string(ReliabilityMode m) { return m == ReliabilityMode::Unit ? "unit" : "measured"; }

inline ReliabilityMode parse_reliability_mode(std::string_view name) {
  if (name == "measured") return ReliabilityMode::Measured;
  if (name == "unit") return ReliabilityMode::Unit;
  throw Error("unknown reliability mode '" + std::string(name) + "'");
}

struct PolicyConfig {
  SourceSet source_set = SourceSet::FramedGuided;
  double alpha = 1.0;
  int challenger_rank = 2;
  ReliabilityMode reliability = ReliabilityMode::Measured;
};

// Support for the dominant basin (first) and the challenger (second) per source.
struct PairCounts {
  int b1 = 0, br = 0;
  int f1 = 0, fr = 0;
  int g1 = 0, gr = 0;
  int p1 = 0, pr = 0;  // both panel orders summed

  bool operator==(const PairCounts&) const = default;
};

struct DeltaDecision {
  std::string question_id;
  int challenger_rank = 2;
  PairCounts counts;
  double raw_term = 0.0;
  double framed_term = 0.0;
  double guided_term = 0.0;
  double panel_term = 0.0;
  double residual_term = 0.0;
  double score = 0.0;
  int selected_rank = 1;
  bool override = false;
  ReliabilitySet reliabilities;

  bool operator==(const DeltaDecision&) const = default;
};

inline PairCounts pair_counts(const EvidenceLedger& ledger, const BasinSet& basins, int rank) {
  if (basins.count() < 2 || rank < 2 || rank > basins.count()) throw NoChallengerError();
  const auto& a1 = basins.at_rank(1).answer;
  const auto& ar = basins.at_rank(rank).answer;
  PairCounts c;
  c.b1 = basins.at_rank(1).size();
  c.br = basins.at_rank(rank).size();
  c.f1 = ledger.framed.count(a1);
  c.fr = ledger.framed.count(ar);
  c.g1 = ledger.guided.count(a1);
  c.gr = ledger.guided.count(ar);
  c.p1 = ledger.panel_original.count(a1) + ledger.panel_swapped.count(a1);
  c.pr = ledger.panel_original.count(ar) + ledger.panel_swapped.count(ar);
  return c;
}

namespace detail {

inline ReliabilitySet effective_reliabilities(const EvidenceLedger& ledger, const BasinSet& basins,
                                             const PolicyConfig& cfg) {
  if (cfg.reliability == ReliabilityMode::Unit) return {1.0, 1.0, 1.0};
  if (ledger.alpha == cfg.alpha) return reliability_top2(ledger, basins, cfg.challenger_rank);
  EvidenceLedger copy = ledger;
  copy.alpha = cfg.alpha;
  return reliability_top2(copy, basins, cfg.challenger_rank);
}

inline bool uses_framed(SourceSet s) { return s == SourceSet::FramedGuided || s == SourceSet::AllSources; }
inline bool uses_guided(SourceSet s) { return s != SourceSet::RawOnly; }
inline bool uses_panel(SourceSet s) { return s == SourceSet::PanelGuided || s == SourceSet::AllSources; }

inline double log_ratio(int challenger, int dominant, double alpha) {
  return std::log((challenger + alpha) / (dominant + alpha));
}

}  // namespace detail

inline DeltaDecision delta_score(const EvidenceLedger& ledger, const BasinSet& basins, const PolicyConfig& cfg) {
  DeltaDecision d;
  d.question_id = basins.question_id;
  d.challenger_rank = cfg.challenger_rank;
  d.counts = pair_counts(ledger, basins, cfg.challenger_rank);
  d.reliabilities = detail::effective_reliabilities(ledger, basins, cfg);
  const auto& c = d.counts;
  const auto& rel = d.reliabilities;
  d.raw_term = detail::log_ratio(c.br, c.b1, cfg.alpha);
  if (detail::uses_framed(cfg.source_set)) d.framed_term = rel.r_f * detail::log_ratio(c.fr, c.f1, cfg.alpha);
  if (detail::uses_guided(cfg.source_set)) d.guided_term = rel.r_g * detail::log_ratio(c.gr, c.g1, cfg.alpha);
  if (detail::uses_panel(cfg.source_set)) d.panel_term = rel.rho_p * detail::log_ratio(c.pr, c.p1, cfg.alpha);
  d.score = d.raw_term + d.framed_term + d.guided_term + d.panel_term;
  d.override = d.score > 0.0;
  d.selected_rank = d.override ? cfg.challenger_rank : 1;
  return d;
}

struct PooledWeights {
  double dominant = 1.0;
  double challenger = 1.0;
};

// Unnormalized pooled support (b+a)(f+a)^r_f(g+a)^r_g[(p+a)^rho] for both basins.
inline PooledWeights pooled_weights(const EvidenceLedger& ledger, const BasinSet& basins, const PolicyConfig& cfg) {
  const auto c = pair_counts(ledger, basins, cfg.challenger_rank);
  const auto rel = detail::effective_reliabilities(ledger, basins, cfg);
  const double a = cfg.alpha;
  PooledWeights w{c.b1 + a, c.br + a};
  if (detail::uses_framed(cfg.source_set)) {
    w.dominant *= std::pow(c.f1 + a, rel.r_f);
    w.challenger *= std::pow(c.fr + a, rel.r_f);
  }
  if (detail::uses_guided(cfg.source_set)) {
    w.dominant *= std::pow(c.g1 + a, rel.r_g);
    w.challenger *= std::pow(c.gr + a, rel.r_g);
  }
  if (detail::uses_panel(cfg.source_set)) {
    w.dominant *= std::pow(c.p1 + a, rel.rho_p);
    w.challenger *= std::pow(c.pr + a, rel.rho_p);
  }
  return w;
}

inline const std::string& select(const DeltaDecision& decision, const BasinSet& basins) {
  if (decision.score > 0.0) return basins.at_rank(decision.challenger_rank).answer;
  return basins.at_rank(1).answer;
}

struct Arbitration {
  std::string answer;
  std::optional<DeltaDecision> decision;  // empty when the pool has no challenger
};

// Consensus for single-basin pools, the sign rule otherwise.
inline Arbitration arbitrate(const EvidenceLedger& ledger, const BasinSet& basins, const PolicyConfig& cfg) {
  if (basins.count() < 2 || cfg.challenger_rank > basins.count()) return {basins.consensus_answer, std::nullopt};
  auto d = delta_score(ledger, basins, cfg);
  std::string answer = select(d, basins);
  return {std::move(answer), std::move(d)};
}

}  // namespace arbiter

#pragma once

// Per-source support counts over the observed basins and the label-free
// reliability factors derived from them.

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <unordered_map>

#include "arbiter/basin.hpp"
#include "arbiter/error.hpp"
#include "arbiter/normalize.hpp"

namespace arbiter {

struct SourceTally {
  std::map<std::string, int> counts;  // canonical basin answer -> support
  int attempted = 0;                  // includes invalid and off-basin outputs

  int count(const std::string& answer) const {
    auto it = counts.find(answer);
    return it == counts.end() ? 0 : it->second;
  }

  bool operator==(const SourceTally&) const = default;
};

struct EvidenceLedger {
  std::string question_id;
  SourceTally raw;
  SourceTally framed;
  SourceTally guided;
  SourceTally panel_original;
  SourceTally panel_swapped;
  double alpha = 1.0;

  SourceTally& tally(Source s) {
    return const_cast<SourceTally&>(static_cast<const EvidenceLedger&>(*this).tally(s));
  }
  const SourceTally& tally(Source s) const {
    switch (s) {
      case Source::Raw:
        return raw;
      case Source::Framed:
        return framed;
      case Source::Guided:
        return guided;
      case Source::PanelOriginal:
        return panel_original;
      case Source::PanelSwapped:
        return panel_swapped;
      case Source::Greedy:
        break;
    }
    throw Error("greedy outputs carry no evidence tally");
  }

  bool operator==(const EvidenceLedger&) const = default;
};

struct ReliabilitySet {
  double r_f = 0.0;
  double r_g = 0.0;
  double rho_p = 0.0;

  bool operator==(const ReliabilitySet&) const = default;
};

// Raw counts come from the basins themselves; Raw and Greedy entries in
// outputs are ignored. Every auxiliary output counts as attempted, and an
// output equivalent to an observed basin adds one to that basin's count.
inline EvidenceLedger assign_evidence(std::span<const Candidate> outputs, const BasinSet& basins,
                                      TaskFormat fmt) {
  EvidenceLedger ledger;
  ledger.question_id = basins.question_id;
  ledger.raw.attempted = basins.raw_attempted;
  std::unordered_map<std::string, const std::string*> by_key;
  for (const auto& b : basins.basins) {
    ledger.raw.counts[b.answer] = b.size();
    by_key.emplace(equivalence_key(NormalizedAnswer::of(b.answer), fmt), &b.answer);
  }
  for (const auto& out : outputs) {
    if (out.source == Source::Raw || out.source == Source::Greedy) continue;
    auto& tally = ledger.tally(out.source);
    ++tally.attempted;
    if (!out.answer.valid) continue;
    if (auto it = by_key.find(equivalence_key(out.answer, fmt)); it != by_key.end()) {
      ++tally.counts[*it->second];
    }
  }
  return ledger;
}

namespace detail {

inline double top_pair_mass(const SourceTally& t, const std::string& first, const std::string& challenger) {
  if (t.attempted == 0) return 0.0;
  return static_cast<double>(t.count(first) + t.count(challenger)) / t.attempted;
}

}  // namespace detail

// rho_{P,r} = m_{P,r} * (1 - |nu_r^+ - nu_r^-|); 0 without panel attempts.
inline double panel_reliability(const EvidenceLedger& ledger, const BasinSet& basins, int rank) {
  if (basins.count() < 2 || rank < 2 || rank > basins.count()) throw NoChallengerError();
  const auto& plus = ledger.panel_original;
  const auto& minus = ledger.panel_swapped;
  const int attempted = plus.attempted + minus.attempted;
  if (attempted == 0) return 0.0;
  const auto& a1 = basins.at_rank(1).answer;
  const auto& ar = basins.at_rank(rank).answer;
  const double alpha = ledger.alpha;
  const double p1_plus = plus.count(a1);
  const double pr_plus = plus.count(ar);
  const double p1_minus = minus.count(a1);
  const double pr_minus = minus.count(ar);
  const double mass = (p1_plus + pr_plus + p1_minus + pr_minus) / attempted;
  const double nu_plus = (pr_plus + alpha) / (p1_plus + pr_plus + 2.0 * alpha);
  const double nu_minus = (pr_minus + alpha) / (p1_minus + pr_minus + 2.0 * alpha);
  return mass * (1.0 - std::abs(nu_plus - nu_minus));
}

// Framed and guided top-pair masses for (B1, B_rank), plus the panel factor.
inline ReliabilitySet reliability_top2(const EvidenceLedger& ledger, const BasinSet& basins, int rank = 2) {
  if (basins.count() < 2 || rank < 2 || rank > basins.count()) throw NoChallengerError();
  const auto& a1 = basins.at_rank(1).answer;
  const auto& ar = basins.at_rank(rank).answer;
  return ReliabilitySet{detail::top_pair_mass(ledger.framed, a1, ar),
                        detail::top_pair_mass(ledger.guided, a1, ar),
                        panel_reliability(ledger, basins, rank)};
}

}  // namespace arbiter

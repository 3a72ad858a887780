#pragma once

// Evaluation-time accounting. Gold labels enter only here, after every
// prediction has been made.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arbiter/basin.hpp"
#include "arbiter/error.hpp"
#include "arbiter/normalize.hpp"

namespace arbiter {

struct GoldLabel {
  std::string question_id;
  std::string answer;  // canonical

  bool operator==(const GoldLabel&) const = default;
};

// Gold appears among the top-k ranked basins.
inline bool oracle_at_k(const BasinSet& basins, const GoldLabel& gold, int k, TaskFormat fmt) {
  if (k < 1) throw Error("oracle k must be >= 1");
  const int rank = basins.rank_of(NormalizedAnswer::of(gold.answer), fmt);
  return rank >= 1 && rank <= k;
}

// Dominant basin wrong while some challenger basin is right.
inline bool wrong_majority(const BasinSet& basins, const GoldLabel& gold, TaskFormat fmt) {
  return basins.rank_of(NormalizedAnswer::of(gold.answer), fmt) > 1;
}

enum class Outcome { Unchanged, Recovered, Degraded, WrongToWrong };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Unchanged:
      return "unchanged";
    case Outcome::Recovered:
      return "recovered";
    case Outcome::Degraded:
      return "degraded";
    case Outcome::WrongToWrong:
      return "wrong_to_wrong";
  }
  return "unchanged";
}

struct OracleRate {
  int correct = 0;  // questions whose gold is in the top-k basins
  int extra = 0;    // correct minus baseline-correct
  double rate = 0.0;

  bool operator==(const OracleRate&) const = default;
};

struct CorrectionReport {
  int n = 0;
  int baseline_correct = 0;
  int final_correct = 0;
  int overrides = 0;
  int recovered = 0;
  int degraded = 0;
  int wrong_to_wrong = 0;  // overrides that move between two wrong answers
  int net = 0;
  double accuracy_baseline = 0.0;  // percent
  double accuracy_final = 0.0;     // percent
  std::map<int, OracleRate> oracle_at;
  int wm_count = 0;

  double gain_pp() const { return n == 0 ? 0.0 : 100.0 * net / n; }

  bool operator==(const CorrectionReport&) const = default;
};

struct ExampleResult {
  std::string question_id;
  std::string baseline;
  std::string prediction;
  std::string gold;
  bool baseline_correct = false;
  bool final_correct = false;
  bool override = false;
  Outcome outcome = Outcome::Unchanged;
  bool has_basins = false;
  bool wrong_majority = false;
  std::map<int, bool> oracle;

  bool operator==(const ExampleResult&) const = default;
};

struct ScoredRun {
  CorrectionReport report;
  std::vector<ExampleResult> examples;  // sorted by question_id
};

inline constexpr int kDefaultOracleKs[] = {2, 3, 5};

namespace detail {

template <class Map>
void require_same_keys(const Map& m, const std::map<std::string, std::string>& reference, std::string_view name) {
  std::string missing;
  for (const auto& [qid, _] : reference) {
    if (!m.contains(qid)) missing += (missing.empty() ? "" : ", ") + qid;
  }
  for (const auto& [qid, _] : m) {
    if (!reference.contains(qid)) missing += (missing.empty() ? "" : ", ") + qid + " (extra)";
  }
  if (!missing.empty()) throw Error(std::string(name) + ": mismatched qids: " + missing);
}

}  // namespace detail

// Questions without a basin set (every raw sample unparseable) still count in
// n; their oracle and wrong-majority flags are false.
inline ScoredRun score_run_detailed(const std::map<std::string, std::string>& predictions,
                                    const std::map<std::string, std::string>& baselines,
                                    const std::map<std::string, BasinSet>& basins,
                                    const std::map<std::string, GoldLabel>& gold, TaskFormat fmt,
                                    std::span<const int> oracle_ks = kDefaultOracleKs) {
  detail::require_same_keys(baselines, predictions, "baselines");
  detail::require_same_keys(gold, predictions, "gold");
  for (const auto& [qid, _] : basins) {
    if (!predictions.contains(qid)) throw Error("basins: mismatched qids: " + qid + " (extra)");
  }

  ScoredRun run;
  auto& r = run.report;
  r.n = static_cast<int>(predictions.size());
  for (int k : oracle_ks) r.oracle_at[k] = {};

  for (const auto& [qid, pred] : predictions) {
    const auto& base = baselines.at(qid);
    const auto& g = gold.at(qid);
    const auto gold_answer = NormalizedAnswer::of(g.answer);
    ExampleResult ex;
    ex.question_id = qid;
    ex.baseline = base;
    ex.prediction = pred;
    ex.gold = g.answer;
    ex.baseline_correct = answers_equivalent(NormalizedAnswer::of(base), gold_answer, fmt);
    ex.final_correct = answers_equivalent(NormalizedAnswer::of(pred), gold_answer, fmt);
    ex.override = pred != base && !answers_equivalent(NormalizedAnswer::of(pred), NormalizedAnswer::of(base), fmt);
    if (ex.override) {
      ++r.overrides;
      if (!ex.baseline_correct && ex.final_correct) {
        ex.outcome = Outcome::Recovered;
        ++r.recovered;
      } else if (ex.baseline_correct && !ex.final_correct) {
        ex.outcome = Outcome::Degraded;
        ++r.degraded;
      } else {
        ex.outcome = Outcome::WrongToWrong;
        ++r.wrong_to_wrong;
      }
    }
    r.baseline_correct += ex.baseline_correct;
    r.final_correct += ex.final_correct;

    if (auto it = basins.find(qid); it != basins.end()) {
      ex.has_basins = true;
      ex.wrong_majority = wrong_majority(it->second, g, fmt);
      for (int k : oracle_ks) ex.oracle[k] = oracle_at_k(it->second, g, k, fmt);
    } else {
      for (int k : oracle_ks) ex.oracle[k] = false;
    }
    r.wm_count += ex.wrong_majority;
    for (int k : oracle_ks) r.oracle_at[k].correct += ex.oracle[k];
    run.examples.push_back(std::move(ex));
  }

  r.net = r.recovered - r.degraded;
  if (r.n > 0) {
    r.accuracy_baseline = 100.0 * r.baseline_correct / r.n;
    r.accuracy_final = 100.0 * r.final_correct / r.n;
  }
  for (auto& [k, o] : r.oracle_at) {
    o.extra = o.correct - r.baseline_correct;
    o.rate = r.n > 0 ? 100.0 * o.correct / r.n : 0.0;
  }
  return run;
}

inline CorrectionReport score_run(const std::map<std::string, std::string>& predictions,
                                  const std::map<std::string, std::string>& baselines,
                                  const std::map<std::string, BasinSet>& basins,
                                  const std::map<std::string, GoldLabel>& gold, TaskFormat fmt,
                                  std::span<const int> oracle_ks = kDefaultOracleKs) {
  return score_run_detailed(predictions, baselines, basins, gold, fmt, oracle_ks).report;
}

// 100 * num / den in hundredths, rounded half away from zero, exactly.
inline std::int64_t percent_hundredths(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw Error("percentage denominator must be positive");
  const std::int64_t scaled = 10000 * std::llabs(num);
  const std::int64_t rounded = (2 * scaled + den) / (2 * den);
  return num < 0 ? -rounded : rounded;
}

// "94.54"; signed variant "+0.30" / "-1.25".
inline std::string format_hundredths(std::int64_t h, bool explicit_sign = false) {
  const std::int64_t a = std::llabs(h);
  std::string frac = std::to_string(a % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  std::string sign = h < 0 ? "-" : (explicit_sign ? "+" : "");
  return sign + std::to_string(a / 100) + "." + frac;
}

inline std::string format_percent(std::int64_t num, std::int64_t den, bool explicit_sign = false) {
  return format_hundredths(percent_hundredths(num, den), explicit_sign);
}

}  // namespace arbiter

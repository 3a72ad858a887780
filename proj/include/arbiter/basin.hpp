#pragma once

// Answer basins: raw candidates grouped by equivalent final answer and
// ranked by size, with the raw-consensus prediction on top.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arbiter/error.hpp"
#include "arbiter/normalize.hpp"

namespace arbiter {

enum class Source { Raw, Framed, PanelOriginal, PanelSwapped, Guided, Greedy };

inline constexpr Source kAllSources[] = {Source::Raw,          Source::Framed, Source::PanelOriginal,
                                         Source::PanelSwapped, Source::Guided, Source::Greedy};

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::Raw:
      return "raw";
    case Source::Framed:
      return "framed";
    case Source::PanelOriginal:
      return "panel_original";
    case Source::PanelSwapped:
      return "panel_swapped";
    case Source::Guided:
      return "guided";
    case Source::Greedy:
      return "greedy";
  }
  return "raw";
}

inline Source parse_source(std::string_view name) {
  for (Source s : kAllSources) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown source '" + std::string(name) + "'");
}

struct Candidate {
  int index = 0;  // sample order within (pool, source)
  std::string text;
  NormalizedAnswer answer;
  Source source = Source::Raw;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  std::string template_id;
  std::string error;  // transport/generation failure note, empty on success

  bool operator==(const Candidate&) const = default;
};

// One question's sampled solutions, all sources together.
struct CandidatePool {
  std::string question_id;
  TaskFormat format = TaskFormat::Numeric;
  std::vector<Candidate> candidates;

  bool operator==(const CandidatePool&) const = default;
};

// Re-derives every candidate's answer from its text.
inline void extract_answers(CandidatePool& pool) {
  for (auto& c : pool.candidates) c.answer = extract_answer(c.text, pool.format);
}

struct Basin {
  std::string answer;        // canonical answer of the earliest member
  std::vector<int> members;  // raw candidate indices, ascending

  int size() const { return static_cast<int>(members.size()); }
  bool operator==(const Basin&) const = default;
};

struct BasinSet {
  std::string question_id;
  std::vector<Basin> basins;  // rank 1 first
  std::string consensus_answer;
  int raw_attempted = 0;  // every raw candidate, valid or not
  int invalid_count = 0;
  std::optional<std::string> greedy_answer;  // reported, never voted

  // m(q): number of observed basins.
  int count() const { return static_cast<int>(basins.size()); }
  const Basin& at_rank(int rank) const { return basins.at(static_cast<std::size_t>(rank - 1)); }

  // 1-based rank of the basin equivalent to answer, or 0 when none is.
  int rank_of(const NormalizedAnswer& answer, TaskFormat fmt) const {
    if (!answer.valid) return 0;
    for (std::size_t r = 0; r < basins.size(); ++r) {
      if (answers_equivalent(NormalizedAnswer::of(basins[r].answer), answer, fmt)) {
        return static_cast<int>(r + 1);
      }
    }
    return 0;
  }

  bool operator==(const BasinSet&) const = default;
};

inline BasinSet build_basins(std::string question_id, std::span<const Candidate> pool, TaskFormat fmt) {
  std::vector<const Candidate*> raw;
  const Candidate* greedy = nullptr;
  for (const auto& c : pool) {
    if (c.source == Source::Raw) raw.push_back(&c);
    if (c.source == Source::Greedy && (greedy == nullptr || c.index < greedy->index)) greedy = &c;
  }
  std::sort(raw.begin(), raw.end(), [](auto* a, auto* b) { return a->index < b->index; });
  for (std::size_t i = 1; i < raw.size(); ++i) {
    if (raw[i]->index == raw[i - 1]->index) {
      throw Error("question " + question_id + ": duplicate raw index " + std::to_string(raw[i]->index));
    }
  }

  BasinSet out;
  out.question_id = std::move(question_id);
  out.raw_attempted = static_cast<int>(raw.size());
  if (greedy != nullptr && greedy->answer.valid) out.greedy_answer = greedy->answer.canonical;

  std::unordered_map<std::string, std::size_t> by_key;
  for (const Candidate* c : raw) {
    if (!c->answer.valid) {
      ++out.invalid_count;
      continue;
    }
    auto [it, fresh] = by_key.try_emplace(equivalence_key(c->answer, fmt), out.basins.size());
    if (fresh) out.basins.push_back(Basin{c->answer.canonical, {}});
    out.basins[it->second].members.push_back(c->index);
  }
  if (out.basins.empty()) throw Error("question " + out.question_id + ": empty basin set");

  std::sort(out.basins.begin(), out.basins.end(), [](const Basin& a, const Basin& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    if (a.members.front() != b.members.front()) return a.members.front() < b.members.front();
    return a.answer < b.answer;
  });
  out.consensus_answer = out.basins.front().answer;
  return out;
}

inline BasinSet build_basins(const CandidatePool& pool) {
  return build_basins(pool.question_id, pool.candidates, pool.format);
}

// Questions with at least two observed basins.
inline std::vector<std::string> disagreement_slice(std::span<const BasinSet> sets) {
  std::vector<std::string> out;
  for (const auto& s : sets) {
    if (s.count() >= 2) out.push_back(s.question_id);
  }
  return out;
}

}  // namespace arbiter

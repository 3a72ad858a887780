#pragma once

// Hand-rolled generators and fixtures shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "arbiter/basin.hpp"
#include "arbiter/evidence.hpp"

namespace arbiter::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  bool coin(double p = 0.5) { return unit() < p; }
  std::uint64_t bits() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Basins with answers and sizes given in rank order; members are numbered
// contiguously so the listed order is also the tie order.
inline BasinSet basin_set(const std::string& qid, const std::vector<std::pair<std::string, int>>& sizes) {
  BasinSet b;
  b.question_id = qid;
  int next = 0;
  for (const auto& [answer, size] : sizes) {
    Basin basin{answer, {}};
    for (int i = 0; i < size; ++i) basin.members.push_back(next++);
    b.basins.push_back(std::move(basin));
    b.raw_attempted += size;
  }
  if (!b.basins.empty()) b.consensus_answer = b.basins.front().answer;
  return b;
}

inline Candidate candidate(Source source, int index, const std::string& answer) {
  Candidate c;
  c.index = index;
  c.source = source;
  c.text = answer.empty() ? "no final answer here" : "#### " + answer;
  c.answer = NormalizedAnswer::of(answer);
  return c;
}

// Appends `count` outputs of one source, continuing that source's index.
inline void add_outputs(std::vector<Candidate>& out, Source source, const std::string& answer, int count) {
  int next = 0;
  for (const auto& c : out) {
    if (c.source == source) next = std::max(next, c.index + 1);
  }
  for (int i = 0; i < count; ++i) out.push_back(candidate(source, next++, answer));
}

// A random two-or-more basin question together with the counts that went
// into its ledger, for checking formulas against independent evaluation.
struct LedgerCase {
  BasinSet basins;
  EvidenceLedger ledger;
  int b1 = 0, b2 = 0;
  int f1 = 0, f2 = 0, f_att = 0;
  int g1 = 0, g2 = 0, g_att = 0;
  int p1_plus = 0, p2_plus = 0, plus_att = 0;
  int p1_minus = 0, p2_minus = 0, minus_att = 0;
};

inline LedgerCase random_ledger(Gen& gen, int max_count = 30) {
  LedgerCase c;
  c.b1 = gen.between(1, max_count);
  c.b2 = gen.between(1, c.b1);
  std::vector<std::pair<std::string, int>> sizes = {{"1", c.b1}, {"2", c.b2}};
  const int extra = gen.between(0, 3);
  for (int i = 0; i < extra; ++i) sizes.emplace_back(std::to_string(3 + i), gen.between(1, c.b2));
  c.basins = basin_set("q", sizes);

  std::vector<Candidate> outputs;
  auto source_block = [&](Source s, int& n1, int& n2, int& att, bool allow_empty) {
    att = allow_empty && gen.coin(0.1) ? 0 : gen.between(0, max_count);
    for (int i = 0; i < att; ++i) {
      const double u = gen.unit();
      std::string answer;
      if (u < 0.4) {
        answer = "1";
        ++n1;
      } else if (u < 0.8) {
        answer = "2";
        ++n2;
      } else if (u < 0.9 && extra > 0) {
        answer = "3";
      } else if (u < 0.95) {
        answer = "999";
      }
      add_outputs(outputs, s, answer, 1);
    }
  };
  source_block(Source::Framed, c.f1, c.f2, c.f_att, true);
  source_block(Source::Guided, c.g1, c.g2, c.g_att, true);
  source_block(Source::PanelOriginal, c.p1_plus, c.p2_plus, c.plus_att, true);
  source_block(Source::PanelSwapped, c.p1_minus, c.p2_minus, c.minus_att, true);
  std::shuffle(outputs.begin(), outputs.end(), gen.engine());
  c.ledger = assign_evidence(outputs, c.basins, TaskFormat::Numeric);
  return c;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    Gen g(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("arbiter_test_" + std::to_string(g.bits() % 1000000007ULL) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::filesystem::path source_dir() { return ARBITER_SOURCE_DIR; }

}  // namespace arbiter::testing

#pragma once

// Command-line front end: simulate, cluster, collect, score, evaluate, report.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arbiter/artifacts.hpp"
#include "arbiter/basin.hpp"
#include "arbiter/collect.hpp"
#include "arbiter/delta.hpp"
#include "arbiter/error.hpp"
#include "arbiter/metrics.hpp"
#include "arbiter/parallel.hpp"
#include "arbiter/pipeline.hpp"
#include "arbiter/residual.hpp"
#include "arbiter/simulate.hpp"
#include "arbiter/templates.hpp"

namespace arbiter::cli {

namespace fs = std::filesystem;

namespace detail {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return secs;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct PolicyFlags {
  std::string source_set = "framed_guided";
  double alpha = 1.0;
  int challenger_rank = 2;
  std::string reliability = "measured";
  double lambda = 0.0;
  double clip = 1.0;
  bool no_permission = false;

  PolicyConfig policy() const {
    PolicyConfig p;
    p.source_set = parse_source_set(source_set);
    p.alpha = alpha;
    p.challenger_rank = challenger_rank;
    p.reliability = parse_reliability_mode(reliability);
    if (!(alpha > 0.0)) throw Error("--alpha must be > 0");
    if (challenger_rank < 2) throw Error("--challenger-rank must be >= 2");
    return p;
  }
  ResidualConfig residual() const {
    if (!(lambda >= 0.0)) throw Error("--lambda must be >= 0");
    if (!(clip > 0.0)) throw Error("--clip must be > 0");
    return ResidualConfig{lambda, clip, !no_permission};
  }
  Json json() const {
    return Json{{"source-set", source_set}, {"alpha", alpha},   {"challenger-rank", challenger_rank},
                {"reliability", reliability}, {"lambda", lambda}, {"clip", clip},
                {"no-permission", no_permission}};
  }
  void bind(CLI::App* sub) {
    sub->add_option("--source-set", source_set, "framed_guided | panel_guided | all_sources | raw_only")
        ->capture_default_str();
    sub->add_option("--alpha", alpha, "Laplace pseudo-count")->capture_default_str();
    sub->add_option("--challenger-rank", challenger_rank, "Basin rank compared against the dominant basin")
        ->capture_default_str();
    sub->add_option("--reliability", reliability, "measured | unit")->capture_default_str();
    sub->add_option("--lambda", lambda, "Residual scale (0 disables the residual)")->capture_default_str();
    sub->add_option("--clip", clip, "Residual clipping bound")->capture_default_str();
    sub->add_flag("--no-permission", no_permission, "Ignore permission scores (gamma = 1)");
  }
};

struct Settings {
  std::string command;
  std::string out_dir = ".";
  std::string config_file;
  int jobs = 1;
  bool lenient = false;
  std::string model_name;
  std::string dataset;

  // simulate
  SimConfig sim;
  std::string basin_weights = "0.45,0.35,0.12,0.08";
  std::optional<double> fidelity;

  // cluster / score / evaluate
  std::string pool_file;
  std::string evidence_file;
  std::string residual_file;
  std::string gold_file;
  bool reextract = false;
  PolicyFlags policy;

  // collect
  std::string questions_file;
  std::string format = "numeric";
  std::string base_url;
  std::string api_key_env = "ARBITER_API_KEY";
  std::string templates_dir;
  int raw_solves = 24;
  int framed_solves = 24;
  int panel_trials = 12;
  int guided_trials = 4;
  bool greedy = false;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  int max_parallel = 4;
  int retries = 2;
  double timeout_s = 120.0;
  int max_tokens = 1024;
  bool transcript = false;

  // report
  std::vector<std::string> run_dirs;
  std::string csv_file;
};

inline std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (!arbiter::detail::trim(item.substr(used)).empty()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("--basin-weights: not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw Error("--basin-weights is empty");
  return out;
}

inline std::string config_value_string(const Json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string joined;
    for (const auto& e : v) {
      if (!joined.empty()) joined += ",";
      joined += e.is_string() ? e.get<std::string>() : e.dump();
    }
    return joined;
  }
  throw Error("config key '" + key + "' must be a string, number, boolean or array");
}

// Config-file values become option defaults, so explicit flags still win.
inline void apply_config_file(CLI::App* sub, const std::string& path) {
  const Json cfg = read_json(path);
  if (!cfg.is_object()) throw Error(path + ": config must be a flat JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") throw Error(path + ": 'config' cannot be set from a config file");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw Error(path + ": unknown config key '" + key + "' for " + sub->get_name());
    opt->default_val(config_value_string(value, key));
  }
}

inline Json input_entry(const std::string& path) {
  if (path.empty()) return nullptr;
  return Json{{"file", fs::path(path).filename().string()}, {"digest", file_digest(path)}};
}

inline RunSummary make_summary(const Settings& s, Json effective, Json inputs) {
  RunSummary r;
  r.command = s.command;
  r.model_name = s.model_name;
  r.dataset = s.dataset;
  r.effective_config = std::move(effective);
  r.inputs = std::move(inputs);
  r.config_digest = fnv1a_hex(dump_line(Json{{"command", s.command}, {"config", r.effective_config}, {"inputs", r.inputs}}));
  r.run_id = s.command + "-" + r.config_digest.substr(0, 8);
  return r;
}

inline std::vector<CandidatePool> load_pools(const std::string& path, const Settings& s, std::ostream& err) {
  auto res = read_jsonl<CandidatePool>(path, s.lenient ? ReadMode::Lenient : ReadMode::Strict);
  for (const auto& d : res.diagnostics) err << "skipped " << d << '\n';
  std::sort(res.records.begin(), res.records.end(),
            [](const auto& a, const auto& b) { return a.question_id < b.question_id; });
  for (std::size_t i = 1; i < res.records.size(); ++i) {
    if (res.records[i].question_id == res.records[i - 1].question_id) {
      throw Error(path + ": duplicate question_id " + res.records[i].question_id);
    }
  }
  return res.records;
}

inline TaskFormat pools_format(const std::vector<CandidatePool>& pools) {
  if (pools.empty()) return TaskFormat::Numeric;
  for (const auto& p : pools) {
    if (p.format != pools.front().format) throw Error("pools mix task formats");
  }
  return pools.front().format;
}

inline void split_raw(const CandidatePool& pool, CandidatePool& baseline, CandidatePool& evidence) {
  baseline = {pool.question_id, pool.format, {}};
  evidence = {pool.question_id, pool.format, {}};
  for (const auto& c : pool.candidates) {
    (c.source == Source::Raw || c.source == Source::Greedy ? baseline : evidence).candidates.push_back(c);
  }
}

inline int raw_k(const std::vector<CandidatePool>& pools) {
  int k = 0;
  for (const auto& p : pools) {
    int n = 0;
    for (const auto& c : p.candidates) n += c.source == Source::Raw;
    k = std::max(k, n);
  }
  return k;
}

inline bool any_greedy(const std::vector<CandidatePool>& pools) {
  for (const auto& p : pools) {
    for (const auto& c : p.candidates) {
      if (c.source == Source::Greedy) return true;
    }
  }
  return false;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string signed_int(int v) { return v > 0 ? "+" + std::to_string(v) : std::to_string(v); }

inline void print_report(const CorrectionReport& r, std::ostream& out) {
  out << "questions: " << r.n << '\n';
  if (r.n == 0) return;
  out << "raw consensus: " << format_percent(r.baseline_correct, r.n) << "% (" << r.baseline_correct << ")\n";
  out << "arbitrated:    " << format_percent(r.final_correct, r.n) << "% (" << r.final_correct << ")\n";
  out << "gain (pp):     " << format_percent(r.net, r.n, true) << '\n';
  out << "overrides / recovered / degraded: " << r.overrides << " / " << r.recovered << " / " << r.degraded
      << "  (wrong->wrong " << r.wrong_to_wrong << ")\n";
  out << "net: " << signed_int(r.net) << '\n';
  for (const auto& [k, o] : r.oracle_at) {
    out << "O@" << k << ": " << format_percent(o.correct, r.n) << "% (+" << o.extra << ")\n";
  }
  out << "wrong-majority questions: " << r.wm_count << '\n';
}

// ---------------------------------------------------------------- commands

inline int cmd_simulate(const Settings& s, std::ostream& out) {
  Stopwatch clock;
  SimConfig cfg = s.sim;
  cfg.basin_count_weights = parse_weights(s.basin_weights);
  if (s.fidelity) cfg.framed_fidelity = cfg.guided_fidelity = cfg.panel_fidelity = *s.fidelity;
  const auto instances = generate(cfg, s.jobs);
  std::map<std::string, double> timings{{"generate", clock.lap()}};

  std::vector<Question> questions;
  std::vector<GoldLabel> gold;
  std::vector<CandidatePool> baseline(instances.size());
  std::vector<CandidatePool> evidence(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    questions.push_back({instances[i].pool.question_id, instances[i].question_text});
    gold.push_back(instances[i].gold);
    split_raw(instances[i].pool, baseline[i], evidence[i]);
  }
  const fs::path dir(s.out_dir);
  write_jsonl(dir / files::kQuestions, questions);
  write_jsonl(dir / files::kGold, gold);
  write_jsonl(dir / files::kBaselinePool, baseline);
  write_jsonl(dir / files::kEvidencePool, evidence);
  timings["write"] = clock.lap();

  Json weights = Json::array();
  for (double w : cfg.basin_count_weights) weights.push_back(w);
  // Keys are flag names, so the block can be passed back through --config.
  Json effective{{"seed", cfg.rng_seed},
                 {"n", cfg.n_questions},
                 {"k-raw", cfg.k_raw},
                 {"basin-weights", std::move(weights)},
                 {"wm-rate", cfg.wrong_majority_rate},
                 {"absent-rate", cfg.gold_absent_rate},
                 {"framed-fidelity", cfg.framed_fidelity},
                 {"guided-fidelity", cfg.guided_fidelity},
                 {"panel-fidelity", cfg.panel_fidelity},
                 {"off-pair", cfg.off_pair_rate},
                 {"raw-invalid", cfg.raw_invalid_rate},
                 {"framed", cfg.framed_trials},
                 {"guided", cfg.guided_trials},
                 {"panel", cfg.panel_trials},
                 {"greedy", cfg.greedy_anchor},
                 {"temperature", cfg.temperature},
                 {"model-name", s.model_name},
                 {"dataset", s.dataset}};
  auto summary = make_summary(s, std::move(effective), Json::object());
  summary.raw_K = cfg.k_raw;
  summary.greedy_generated = cfg.greedy_anchor;
  summary.model_name = s.model_name.empty() ? "simulator" : s.model_name;
  summary.dataset = s.dataset.empty() ? "synthetic" : s.dataset;
  summary.timings = std::move(timings);
  write_json(dir / files::kRunSummary, Codec<RunSummary>::encode(summary));

  int planted[3] = {0, 0, 0};
  for (const auto& inst : instances) ++planted[static_cast<int>(inst.planted)];
  out << "simulated " << instances.size() << " questions (correct-majority " << planted[0] << ", wrong-majority "
      << planted[1] << ", gold-absent " << planted[2] << ") -> " << dir.string() << '\n';
  return 0;
}

inline int cmd_cluster(const Settings& s, std::ostream& out, std::ostream& err) {
  Stopwatch clock;
  auto pools = load_pools(s.pool_file, s, err);
  if (s.reextract) {
    for (auto& p : pools) extract_answers(p);
  }
  std::vector<BasinSet> sets(pools.size());
  std::vector<char> built(pools.size(), 0);
  parallel_for(pools.size(), s.jobs, [&](std::size_t i) {
    for (const auto& c : pools[i].candidates) {
      if (c.source == Source::Raw && c.answer.valid) {
        sets[i] = build_basins(pools[i]);
        built[i] = 1;
        return;
      }
    }
  });
  std::vector<BasinSet> kept;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (built[i]) kept.push_back(std::move(sets[i]));
  }
  const fs::path dir(s.out_dir);
  write_jsonl(dir / files::kClusters, kept);
  const auto slice = disagreement_slice(kept);

  auto summary = make_summary(s, Json{{"reextract", s.reextract}, {"lenient", s.lenient}},
                              Json{{"pool", input_entry(s.pool_file)}});
  summary.raw_K = raw_k(pools);
  summary.greedy_generated = any_greedy(pools);
  summary.timings["cluster"] = clock.lap();
  write_json(dir / files::kRunSummary, Codec<RunSummary>::encode(summary));
  out << "questions: " << pools.size() << "  with basins: " << kept.size()
      << "  disagreement slice (m>=2): " << slice.size() << '\n';
  return 0;
}

struct ScoreArtifacts {
  std::vector<QuestionOutcome> outcomes;
  TaskFormat format = TaskFormat::Numeric;
  RunSummary summary;
};

inline ScoreArtifacts run_scoring(const Settings& s, std::ostream& err) {
  Stopwatch clock;
  ScoreArtifacts a;
  auto pools = load_pools(s.pool_file, s, err);
  const int k = raw_k(pools);
  const bool greedy = any_greedy(pools);
  if (!s.evidence_file.empty()) {
    const auto evidence = load_pools(s.evidence_file, s, err);
    pools = merge_pools(std::move(pools), evidence);
  }
  a.format = pools_format(pools);
  if (s.reextract) {
    for (auto& p : pools) extract_answers(p);
  }
  ResidualTable residuals;
  if (!s.residual_file.empty()) {
    for (auto& r : read_jsonl<ResidualRecord>(s.residual_file).records) {
      if (!residuals.emplace(std::make_pair(r.question_id, r.rank), r.input).second) {
        throw Error(s.residual_file + ": duplicate entry for " + r.question_id + " rank " + std::to_string(r.rank));
      }
    }
  }
  const double load_secs = clock.lap();
  a.outcomes = run_pipeline(pools, s.policy.policy(), s.policy.residual(), s.residual_file.empty() ? nullptr : &residuals,
                            s.jobs);

  Json inputs{{"pool", input_entry(s.pool_file)},
              {"evidence", input_entry(s.evidence_file)},
              {"residuals", input_entry(s.residual_file)}};
  if (!s.gold_file.empty()) inputs["gold"] = input_entry(s.gold_file);
  Json effective = s.policy.json();
  effective["reextract"] = s.reextract;
  effective["lenient"] = s.lenient;
  effective["model-name"] = s.model_name;
  effective["dataset"] = s.dataset;
  a.summary = make_summary(s, std::move(effective), std::move(inputs));
  a.summary.raw_K = k;
  a.summary.greedy_generated = greedy;
  a.summary.timings["load"] = load_secs;
  a.summary.timings["arbitrate"] = clock.lap();
  return a;
}

inline void write_scoring(const ScoreArtifacts& a, const fs::path& dir) {
  std::vector<EvidenceLedger> ledgers;
  std::vector<DeltaDecision> decisions;
  std::vector<PredictionRecord> predictions;
  for (const auto& o : a.outcomes) {
    ledgers.push_back(o.ledger);
    if (o.decision) decisions.push_back(*o.decision);
    predictions.push_back({o.question_id, o.basins ? o.basins->count() : 0, o.baseline, o.prediction,
                           o.decision.has_value() && o.decision->override});
  }
  write_jsonl(dir / files::kLedgers, ledgers);
  write_jsonl(dir / files::kDiagnostics, decisions);
  write_jsonl(dir / files::kPredictions, predictions);
}

inline void print_overrides(const std::vector<QuestionOutcome>& outcomes, std::ostream& out) {
  for (const auto& o : outcomes) {
    if (!o.decision || !o.decision->override) continue;
    const auto& d = *o.decision;
    out << o.question_id << ": \xCE\x94" << d.challenger_rank << "=" << fixed(d.score, 3) << " override \xE2\x86\x92 B"
        << d.selected_rank << " (" << o.baseline << " -> " << o.prediction << ")\n";
  }
}

inline int cmd_score(const Settings& s, std::ostream& out, std::ostream& err) {
  auto a = run_scoring(s, err);
  Stopwatch clock;
  const fs::path dir(s.out_dir);
  write_scoring(a, dir);
  a.summary.timings["write"] = clock.lap();
  write_json(dir / files::kRunSummary, Codec<RunSummary>::encode(a.summary));
  int arbitrated = 0;
  int overrides = 0;
  for (const auto& o : a.outcomes) {
    arbitrated += o.decision.has_value();
    overrides += o.decision.has_value() && o.decision->override;
  }
  print_overrides(a.outcomes, out);
  out << "questions: " << a.outcomes.size() << "  arbitrated: " << arbitrated << "  overrides: " << overrides << '\n';
  return 0;
}

inline int cmd_evaluate(const Settings& s, std::ostream& out, std::ostream& err) {
  auto a = run_scoring(s, err);
  Stopwatch clock;
  std::map<std::string, GoldLabel> gold;
  for (auto& g : read_jsonl<GoldLabel>(s.gold_file, s.lenient ? ReadMode::Lenient : ReadMode::Strict).records) {
    const auto canonical = canonicalize(g.answer, a.format);
    if (!canonical.valid) throw Error(s.gold_file + ": unreadable gold answer for " + g.question_id);
    g.answer = canonical.canonical;
    if (!gold.emplace(g.question_id, g).second) throw Error(s.gold_file + ": duplicate question_id " + g.question_id);
  }
  const auto scored = score_outcomes(a.outcomes, gold, a.format);
  const fs::path dir(s.out_dir);
  write_scoring(a, dir);
  write_jsonl(dir / files::kPerExample, scored.examples);
  write_json(dir / files::kPolicySummary, Codec<CorrectionReport>::encode(scored.report));
  a.summary.timings["evaluate"] = clock.lap();
  write_json(dir / files::kRunSummary, Codec<RunSummary>::encode(a.summary));
  print_overrides(a.outcomes, out);
  print_report(scored.report, out);
  return 0;
}

inline int cmd_collect(const Settings& s, std::ostream& out, std::ostream& err) {
  Stopwatch clock;
  if (s.base_url.empty()) throw Error("collect: --base-url is required");
  if (s.model_name.empty()) throw Error("collect: --model is required");
  auto questions = read_jsonl<Question>(s.questions_file).records;
  std::sort(questions.begin(), questions.end(), [](const auto& a, const auto& b) { return a.question_id < b.question_id; });

  EndpointConfig ep;
  ep.base_url = s.base_url;
  ep.model_name = s.model_name;
  if (const char* key = std::getenv(s.api_key_env.c_str()); key != nullptr) ep.api_key = key;
  ep.timeout = std::chrono::milliseconds(static_cast<long long>(s.timeout_s * 1000.0));
  ep.max_parallel = s.max_parallel;
  ep.retry_budget = s.retries;
  ep.max_tokens = s.max_tokens;
  if (ep.max_parallel < 1) throw Error("--max-parallel must be >= 1");
  if (ep.retry_budget < 0) throw Error("--retries must be >= 0");

  PromptPlan plan;
  plan.raw_solves = s.raw_solves;
  plan.framed_solves = s.framed_solves;
  plan.panel_trials = s.panel_trials;
  plan.guided_trials = s.guided_trials;
  plan.greedy = s.greedy;
  plan.temperature = s.temperature;
  plan.seed = s.seed;
  if (!s.templates_dir.empty()) plan.templates = TemplateSet::load(s.templates_dir);
  const TaskFormat fmt = parse_task_format(s.format);

  const auto collected = collect_pool(questions, ep, plan, fmt);
  std::map<std::string, double> timings{{"collect", clock.lap()}};

  std::vector<CandidatePool> baseline(collected.size());
  std::vector<CandidatePool> evidence(collected.size());
  std::vector<FrameRecord> frames;
  std::vector<TranscriptRecord> transcript;
  for (std::size_t i = 0; i < collected.size(); ++i) {
    split_raw(collected[i].pool, baseline[i], evidence[i]);
    frames.insert(frames.end(), collected[i].frames.begin(), collected[i].frames.end());
    transcript.insert(transcript.end(), collected[i].transcript.begin(), collected[i].transcript.end());
    for (const auto& note : collected[i].notes) err << collected[i].question_id << ": " << note << '\n';
  }
  const fs::path dir(s.out_dir);
  write_jsonl(dir / files::kBaselinePool, baseline);
  write_jsonl(dir / files::kEvidencePool, evidence);
  write_jsonl(dir / files::kFrames, frames);
  if (s.transcript) write_jsonl(dir / files::kTranscript, transcript);
  timings["write"] = clock.lap();

  Json effective{{"base-url", s.base_url}, {"model", s.model_name}, {"format", s.format},
                 {"raw", s.raw_solves},     {"framed", s.framed_solves}, {"panel", s.panel_trials},
                 {"guided", s.guided_trials}, {"greedy", s.greedy},     {"temperature", s.temperature},
                 {"seed", s.seed},          {"retries", s.retries},     {"max-tokens", s.max_tokens}};
  Json inputs{{"questions", input_entry(s.questions_file)}};
  if (!s.templates_dir.empty()) {
    Json tpl = Json::object();
    for (const auto& [id, text] : plan.templates.all()) tpl[id] = fnv1a_hex(text);
    inputs["templates"] = std::move(tpl);
  }
  auto summary = make_summary(s, std::move(effective), std::move(inputs));
  summary.raw_K = s.raw_solves;
  summary.greedy_generated = s.greedy;
  summary.timings = std::move(timings);
  write_json(dir / files::kRunSummary, Codec<RunSummary>::encode(summary));

  std::size_t invalid = 0;
  std::size_t total = 0;
  for (const auto& q : collected) {
    for (const auto& c : q.pool.candidates) {
      ++total;
      invalid += !c.answer.valid;
    }
  }
  out << "collected " << total << " generations for " << collected.size() << " questions (" << invalid
      << " invalid) -> " << dir.string() << '\n';
  return 0;
}

struct ReportRow {
  std::string model;
  std::string dataset;
  CorrectionReport report;
};

inline int cmd_report(const Settings& s, std::ostream& out) {
  std::vector<ReportRow> rows;
  for (const auto& d : s.run_dirs) {
    const fs::path dir(d);
    ReportRow row;
    row.report = Codec<CorrectionReport>::decode(read_json(dir / files::kPolicySummary));
    if (fs::exists(dir / files::kRunSummary)) {
      const auto summary = Codec<RunSummary>::decode(read_json(dir / files::kRunSummary));
      row.model = summary.model_name;
      row.dataset = summary.dataset;
    }
    if (row.model.empty()) row.model = "-";
    if (row.dataset.empty()) row.dataset = dir.filename().string();
    rows.push_back(std::move(row));
  }

  const std::vector<std::string> header = {"Model", "Dataset", "N", "Raw cons.", "Arbiter-Delta", "Gain (pp)",
                                           "Overrides / Rec. / Deg.", "Net"};
  std::vector<std::vector<std::string>> table;
  for (const auto& r : rows) {
    const auto& c = r.report;
    const bool empty = c.n == 0;
    table.push_back({r.model, r.dataset, std::to_string(c.n), empty ? "-" : format_percent(c.baseline_correct, c.n),
                     empty ? "-" : format_percent(c.final_correct, c.n), empty ? "-" : format_percent(c.net, c.n, true),
                     std::to_string(c.overrides) + " / " + std::to_string(c.recovered) + " / " +
                         std::to_string(c.degraded),
                     signed_int(c.net)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const bool left = i < 2 || i == 6;
      out << (left ? std::left : std::right) << std::setw(static_cast<int>(width[i])) << row[i]
          << (i + 1 < row.size() ? "  " : "\n");
    }
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total - 2, '-') << '\n';
  for (const auto& row : table) emit(row);

  if (!s.csv_file.empty()) {
    std::ofstream csv(s.csv_file, std::ios::binary | std::ios::trunc);
    if (!csv) throw Error("cannot open " + s.csv_file + " for writing");
    csv << "model,dataset,n,raw_cons,arbiter_delta,gain_pp,overrides,recovered,degraded,wrong_to_wrong,net,"
           "o2,o2_extra,o3,o3_extra,o5,o5_extra,wm_count\n";
    auto quote = [](const std::string& v) {
      if (v.find_first_of(",\"\n") == std::string::npos) return v;
      std::string q = "\"";
      for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      return q + "\"";
    };
    for (const auto& r : rows) {
      const auto& c = r.report;
      const bool empty = c.n == 0;
      csv << quote(r.model) << ',' << quote(r.dataset) << ',' << c.n << ','
          << (empty ? "" : format_percent(c.baseline_correct, c.n)) << ','
          << (empty ? "" : format_percent(c.final_correct, c.n)) << ',' << (empty ? "" : format_percent(c.net, c.n, true))
          << ',' << c.overrides << ',' << c.recovered << ',' << c.degraded << ',' << c.wrong_to_wrong << ',' << c.net;
      for (int k : {2, 3, 5}) {
        auto it = c.oracle_at.find(k);
        if (it == c.oracle_at.end() || empty) {
          csv << ",,";
        } else {
          csv << ',' << format_percent(it->second.correct, c.n) << ',' << it->second.extra;
        }
      }
      csv << ',' << c.wm_count << '\n';
    }
    if (!csv) throw Error("write failed: " + s.csv_file);
  }
  return 0;
}

inline std::optional<std::string> find_config_arg(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace detail

// args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using detail::Settings;
  Settings s;
  CLI::App app{"Post-consensus arbitration over sampled solution pools", "arbiter"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  auto common = [&](CLI::App* sub, bool writes) {
    sub->add_option("--config", s.config_file, "Flat JSON file of option values (flags take precedence)");
    if (writes) sub->add_option("--out", s.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--jobs", s.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "Generate synthetic pools with planted gold answers");
  common(simulate, true);
  simulate->add_option("--seed", s.sim.rng_seed, "RNG seed")->capture_default_str();
  simulate->add_option("--n", s.sim.n_questions, "Number of questions")->capture_default_str();
  simulate->add_option("--k-raw", s.sim.k_raw, "Raw samples per question")->capture_default_str();
  simulate->add_option("--basin-weights", s.basin_weights, "Comma-separated weights for m(q)=1,2,...")
      ->capture_default_str();
  simulate->add_option("--wm-rate", s.sim.wrong_majority_rate, "Planted wrong-majority rate")->capture_default_str();
  simulate->add_option("--absent-rate", s.sim.gold_absent_rate, "Planted gold-absent rate")->capture_default_str();
  simulate->add_option("--fidelity", s.fidelity, "Set framed, guided and panel fidelity together");
  simulate->add_option("--framed-fidelity", s.sim.framed_fidelity)->capture_default_str();
  simulate->add_option("--guided-fidelity", s.sim.guided_fidelity)->capture_default_str();
  simulate->add_option("--panel-fidelity", s.sim.panel_fidelity)->capture_default_str();
  simulate->add_option("--off-pair", s.sim.off_pair_rate, "Probability an auxiliary output misses the top pair")
      ->capture_default_str();
  simulate->add_option("--raw-invalid", s.sim.raw_invalid_rate, "Probability a raw sample is unparseable")
      ->capture_default_str();
  simulate->add_option("--framed", s.sim.framed_trials, "Framed solves per question")->capture_default_str();
  simulate->add_option("--guided", s.sim.guided_trials, "Guided re-solves per question")->capture_default_str();
  simulate->add_option("--panel", s.sim.panel_trials, "Panel trials per question")->capture_default_str();
  simulate->add_flag("--greedy,!--no-greedy", s.sim.greedy_anchor, "Record a greedy anchor")->capture_default_str();
  simulate->add_option("--temperature", s.sim.temperature)->capture_default_str();
  simulate->add_option("--model-name", s.model_name, "Label recorded in run_summary.json");
  simulate->add_option("--dataset", s.dataset, "Label recorded in run_summary.json");

  auto* cluster = app.add_subcommand("cluster", "Build ranked answer basins from a raw pool");
  common(cluster, true);
  cluster->add_option("--pool", s.pool_file, "baseline_pool.jsonl")->required();
  cluster->add_flag("--reextract", s.reextract, "Re-derive answers from candidate text");
  cluster->add_flag("--lenient", s.lenient, "Skip malformed lines instead of failing");

  auto add_scoring = [&](CLI::App* sub) {
    common(sub, true);
    sub->add_option("--pool", s.pool_file, "baseline_pool.jsonl")->required();
    sub->add_option("--evidence", s.evidence_file, "evidence_pool.jsonl with framed/panel/guided outputs");
    sub->add_option("--residuals", s.residual_file, "Residual sidecar JSONL (question_id, rank, e, gamma)");
    sub->add_flag("--reextract", s.reextract, "Re-derive answers from candidate text");
    sub->add_flag("--lenient", s.lenient, "Skip malformed lines instead of failing");
    sub->add_option("--model-name", s.model_name, "Label recorded in run_summary.json");
    sub->add_option("--dataset", s.dataset, "Label recorded in run_summary.json");
    s.policy.bind(sub);
  };
  auto* score = app.add_subcommand("score", "Apply the Delta rule (and optional residual) to pools");
  add_scoring(score);
  auto* evaluate = app.add_subcommand("evaluate", "Score pools and join predictions with gold labels");
  add_scoring(evaluate);
  evaluate->add_option("--gold", s.gold_file, "gold.jsonl")->required();

  auto* collect = app.add_subcommand("collect", "Collect raw and auxiliary generations from an endpoint");
  common(collect, true);
  collect->add_option("--questions", s.questions_file, "questions.jsonl")->required();
  collect->add_option("--format", s.format, "numeric | multiple_choice | boxed")->capture_default_str();
  collect->add_option("--base-url", s.base_url, "OpenAI-compatible base URL, e.g. http://localhost:8000/v1");
  collect->add_option("--model", s.model_name, "Model name sent with each request");
  collect->add_option("--api-key-env", s.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  collect->add_option("--templates", s.templates_dir, "Directory of <template_id>.txt overrides");
  collect->add_option("--raw", s.raw_solves, "Raw solves per question")->capture_default_str();
  collect->add_option("--framed", s.framed_solves, "Framed solves per disagreement question")->capture_default_str();
  collect->add_option("--panel", s.panel_trials, "Panel trials per disagreement question")->capture_default_str();
  collect->add_option("--guided", s.guided_trials, "Guided re-solves per disagreement question")
      ->capture_default_str();
  collect->add_flag("--greedy", s.greedy, "Also record a temperature-0 anchor");
  collect->add_option("--temperature", s.temperature)->capture_default_str();
  collect->add_option("--seed", s.seed, "Base request seed")->capture_default_str();
  collect->add_option("--max-parallel", s.max_parallel, "Bound on in-flight requests")->capture_default_str();
  collect->add_option("--retries", s.retries, "Retries per request after the first attempt")->capture_default_str();
  collect->add_option("--timeout", s.timeout_s, "Per-request timeout in seconds")->capture_default_str();
  collect->add_option("--max-tokens", s.max_tokens)->capture_default_str();
  collect->add_flag("--transcript", s.transcript, "Write every request/response pair to transcript.jsonl");

  auto* report = app.add_subcommand("report", "Render evaluated runs as a table (and CSV)");
  report->add_option("--config", s.config_file, "Flat JSON file of option values");
  report->add_option("runs", s.run_dirs, "Run directories holding policy_summary.json")->required();
  report->add_option("--csv", s.csv_file, "Also write the table as CSV");

  try {
    if (!args.empty()) {
      if (auto cfg = detail::find_config_arg(args)) {
        CLI::App* sub = app.get_subcommand_no_throw(args.front());
        if (sub == nullptr) throw CLI::ExtrasError({args.front()});
        detail::apply_config_file(sub, *cfg);
      }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const Error& e) {
    err << "arbiter: " << e.what() << '\n';
    return 2;
  }

  try {
    for (auto* sub : app.get_subcommands()) s.command = sub->get_name();
    if (s.command != "report") fs::create_directories(s.out_dir);
    if (s.command == "simulate") return detail::cmd_simulate(s, out);
    if (s.command == "cluster") return detail::cmd_cluster(s, out, err);
    if (s.command == "score") return detail::cmd_score(s, out, err);
    if (s.command == "evaluate") return detail::cmd_evaluate(s, out, err);
    if (s.command == "collect") return detail::cmd_collect(s, out, err);
    if (s.command == "report") return detail::cmd_report(s, out);
  } catch (const std::exception& e) {
    err << "arbiter " << s.command << ": " << e.what() << '\n';
    return 1;
  }
  err << "arbiter: unknown command\n";
  return 2;
}

inline int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace arbiter::cli

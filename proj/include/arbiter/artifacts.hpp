#pragma once

// JSONL/JSON artifact schemas. One record per line, keys in a fixed order,
// reals in shortest round-trip form, so re-serializing parsed output
// reproduces the input bytes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arbiter/basin.hpp"
#include "arbiter/delta.hpp"
#include "arbiter/error.hpp"
#include "arbiter/evidence.hpp"
#include "arbiter/metrics.hpp"
#include "arbiter/residual.hpp"

namespace arbiter {

using Json = nlohmann::ordered_json;

// File names of the artifact families.
namespace files {
inline constexpr std::string_view kQuestions = "questions.jsonl";
inline constexpr std::string_view kGold = "gold.jsonl";
inline constexpr std::string_view kBaselinePool = "baseline_pool.jsonl";
inline constexpr std::string_view kEvidencePool = "evidence_pool.jsonl";
inline constexpr std::string_view kClusters = "clusters.jsonl";
inline constexpr std::string_view kLedgers = "evidence_ledger.jsonl";
inline constexpr std::string_view kDiagnostics = "delta_qid_diagnostics.jsonl";
inline constexpr std::string_view kPredictions = "predictions.jsonl";
inline constexpr std::string_view kPerExample = "per_example.jsonl";
inline constexpr std::string_view kFrames = "frames.jsonl";
inline constexpr std::string_view kTranscript = "transcript.jsonl";
inline constexpr std::string_view kPolicySummary = "policy_summary.json";
inline constexpr std::string_view kRunSummary = "run_summary.json";
}  // namespace files

struct Question {
  std::string question_id;
  std::string question;

  bool operator==(const Question&) const = default;
};

struct PredictionRecord {
  std::string question_id;
  int basin_count = 0;
  std::string baseline;
  std::string prediction;
  bool override = false;

  bool operator==(const PredictionRecord&) const = default;
};

struct ResidualRecord {
  std::string question_id;
  int rank = 2;
  ResidualInput input;
};

struct FrameRecord {
  std::string question_id;
  int rank = 1;
  std::string answer;
  std::string frame;

  bool operator==(const FrameRecord&) const = default;
};

struct TranscriptRecord {
  std::string question_id;
  std::string stage;  // a source name, or "frame" for basin descriptions
  int trial = 0;
  std::string template_id;
  std::string prompt;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  int status = 0;  // last HTTP status, 0 on transport failure
  int attempts = 0;
  std::string response;
  std::string error;

  bool operator==(const TranscriptRecord&) const = default;
};

struct RunSummary {
  std::string run_id;
  std::string command;
  int raw_K = 0;
  bool greedy_generated = false;
  bool greedy_in_consensus = false;
  std::string model_name;
  std::string dataset;
  std::string config_digest;
  Json effective_config = Json::object();
  Json inputs = Json::object();
  std::map<std::string, double> timings;  // seconds per stage; not reproducible
};

namespace detail {

inline const Json& field(const Json& j, std::string_view name) {
  if (!j.is_object()) throw SchemaError("record is not a JSON object");
  auto it = j.find(std::string(name));
  if (it == j.end()) throw SchemaError("missing field '" + std::string(name) + "'");
  return *it;
}

inline std::string get_string(const Json& j, std::string_view name) {
  const auto& v = field(j, name);
  if (!v.is_string()) throw SchemaError("field '" + std::string(name) + "' must be a string");
  return v.get<std::string>();
}

inline std::int64_t get_int(const Json& j, std::string_view name) {
  const auto& v = field(j, name);
  if (!v.is_number_integer()) throw SchemaError("field '" + std::string(name) + "' must be an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t get_uint(const Json& j, std::string_view name) {
  const auto& v = field(j, name);
  if (!v.is_number_unsigned()) throw SchemaError("field '" + std::string(name) + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline int get_count(const Json& j, std::string_view name) {
  const auto v = get_int(j, name);
  if (v < 0 || v > INT32_MAX) throw SchemaError("field '" + std::string(name) + "' must be a count");
  return static_cast<int>(v);
}

inline double get_real(const Json& j, std::string_view name) {
  const auto& v = field(j, name);
  if (!v.is_number()) throw SchemaError("field '" + std::string(name) + "' must be a number");
  return v.get<double>();
}

inline bool get_bool(const Json& j, std::string_view name) {
  const auto& v = field(j, name);
  if (!v.is_boolean()) throw SchemaError("field '" + std::string(name) + "' must be a boolean");
  return v.get<bool>();
}

inline const Json& get_array(const Json& j, std::string_view name) {
  const auto& v = field(j, name);
  if (!v.is_array()) throw SchemaError("field '" + std::string(name) + "' must be an array");
  return v;
}

inline const Json& get_object(const Json& j, std::string_view name) {
  const auto& v = field(j, name);
  if (!v.is_object()) throw SchemaError("field '" + std::string(name) + "' must be an object");
  return v;
}

inline std::string require_qid(const Json& j) {
  auto qid = get_string(j, "question_id");
  if (qid.empty()) throw SchemaError("field 'question_id' must be non-empty");
  return qid;
}

template <class Fn>
auto enum_field(const Json& j, std::string_view name, Fn parse) {
  try {
    return parse(get_string(j, name));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError("field '" + std::string(name) + "': " + e.what());
  }
}

}  // namespace detail

// Encode/decode pair per record type.
template <class T>
struct Codec;

template <>
struct Codec<Question> {
  static Json encode(const Question& q) { return Json{{"question_id", q.question_id}, {"question", q.question}}; }
  static Question decode(const Json& j) { return {detail::require_qid(j), detail::get_string(j, "question")}; }
};

template <>
struct Codec<GoldLabel> {
  static Json encode(const GoldLabel& g) { return Json{{"question_id", g.question_id}, {"answer", g.answer}}; }
  static GoldLabel decode(const Json& j) { return {detail::require_qid(j), detail::get_string(j, "answer")}; }
};

template <>
struct Codec<Candidate> {
  static Json encode(const Candidate& c) {
    return Json{{"index", c.index},
                {"source", to_string(c.source)},
                {"text", c.text},
                {"answer", c.answer.canonical},
                {"valid", c.answer.valid},
                {"temperature", c.temperature},
                {"seed", c.seed},
                {"template_id", c.template_id},
                {"error", c.error}};
  }
  static Candidate decode(const Json& j) {
    Candidate c;
    c.index = detail::get_count(j, "index");
    c.source = detail::enum_field(j, "source", parse_source);
    c.text = detail::get_string(j, "text");
    c.answer.canonical = detail::get_string(j, "answer");
    c.answer.valid = detail::get_bool(j, "valid");
    if (c.answer.valid == c.answer.canonical.empty()) {
      throw SchemaError("field 'answer' must be non-empty exactly when 'valid' is true");
    }
    c.temperature = detail::get_real(j, "temperature");
    c.seed = detail::get_uint(j, "seed");
    c.template_id = detail::get_string(j, "template_id");
    c.error = detail::get_string(j, "error");
    return c;
  }
};

template <>
struct Codec<CandidatePool> {
  static Json encode(const CandidatePool& p) {
    Json cands = Json::array();
    for (const auto& c : p.candidates) cands.push_back(Codec<Candidate>::encode(c));
    return Json{{"question_id", p.question_id}, {"format", to_string(p.format)}, {"candidates", std::move(cands)}};
  }
  static CandidatePool decode(const Json& j) {
    CandidatePool p;
    p.question_id = detail::require_qid(j);
    p.format = detail::enum_field(j, "format", parse_task_format);
    for (const auto& c : detail::get_array(j, "candidates")) p.candidates.push_back(Codec<Candidate>::decode(c));
    return p;
  }
};

template <>
struct Codec<BasinSet> {
  static Json encode(const BasinSet& b) {
    Json basins = Json::array();
    int rank = 1;
    for (const auto& basin : b.basins) {
      basins.push_back(Json{{"rank", rank++}, {"answer", basin.answer}, {"size", basin.size()}, {"members", basin.members}});
    }
    return Json{{"question_id", b.question_id},
                {"consensus_answer", b.consensus_answer},
                {"m", b.count()},
                {"raw_attempted", b.raw_attempted},
                {"invalid_count", b.invalid_count},
                {"greedy_answer", b.greedy_answer ? Json(*b.greedy_answer) : Json(nullptr)},
                {"basins", std::move(basins)}};
  }
  static BasinSet decode(const Json& j) {
    BasinSet b;
    b.question_id = detail::require_qid(j);
    b.consensus_answer = detail::get_string(j, "consensus_answer");
    b.raw_attempted = detail::get_count(j, "raw_attempted");
    b.invalid_count = detail::get_count(j, "invalid_count");
    const auto& greedy = detail::field(j, "greedy_answer");
    if (greedy.is_string()) {
      b.greedy_answer = greedy.get<std::string>();
    } else if (!greedy.is_null()) {
      throw SchemaError("field 'greedy_answer' must be a string or null");
    }
    for (const auto& e : detail::get_array(j, "basins")) {
      Basin basin;
      basin.answer = detail::get_string(e, "answer");
      for (const auto& m : detail::get_array(e, "members")) {
        if (!m.is_number_integer()) throw SchemaError("field 'members' must hold integers");
        basin.members.push_back(m.get<int>());
      }
      if (detail::get_count(e, "size") != basin.size()) throw SchemaError("field 'size' disagrees with 'members'");
      b.basins.push_back(std::move(basin));
    }
    if (detail::get_count(j, "m") != b.count()) throw SchemaError("field 'm' disagrees with 'basins'");
    return b;
  }
};

template <>
struct Codec<EvidenceLedger> {
  static Json encode_tally(const SourceTally& t) {
    Json counts = Json::object();
    for (const auto& [answer, n] : t.counts) counts[answer] = n;
    return Json{{"attempted", t.attempted}, {"counts", std::move(counts)}};
  }
  static SourceTally decode_tally(const Json& j) {
    SourceTally t;
    t.attempted = detail::get_count(j, "attempted");
    int total = 0;
    for (const auto& [answer, n] : detail::get_object(j, "counts").items()) {
      if (!n.is_number_integer() || n.get<int>() < 0) throw SchemaError("field 'counts' must hold counts");
      t.counts[answer] = n.get<int>();
      total += n.get<int>();
    }
    if (total > t.attempted) throw SchemaError("field 'counts' sums above 'attempted'");
    return t;
  }
  static Json encode(const EvidenceLedger& l) {
    Json sources = Json::object();
    for (Source s : {Source::Raw, Source::Framed, Source::Guided, Source::PanelOriginal, Source::PanelSwapped}) {
      sources[std::string(to_string(s))] = encode_tally(l.tally(s));
    }
    return Json{{"question_id", l.question_id}, {"alpha", l.alpha}, {"sources", std::move(sources)}};
  }
  static EvidenceLedger decode(const Json& j) {
    EvidenceLedger l;
    l.question_id = detail::require_qid(j);
    l.alpha = detail::get_real(j, "alpha");
    const auto& sources = detail::get_object(j, "sources");
    for (Source s : {Source::Raw, Source::Framed, Source::Guided, Source::PanelOriginal, Source::PanelSwapped}) {
      l.tally(s) = decode_tally(detail::get_object(sources, to_string(s)));
    }
    return l;
  }
};

template <>
struct Codec<DeltaDecision> {
  static Json encode(const DeltaDecision& d) {
    const auto& c = d.counts;
    const auto& r = d.reliabilities;
    return Json{{"question_id", d.question_id},
                {"challenger_rank", d.challenger_rank},
                {"counts",
                 Json{{"b1", c.b1}, {"br", c.br}, {"f1", c.f1}, {"fr", c.fr}, {"g1", c.g1}, {"gr", c.gr}, {"p1", c.p1}, {"pr", c.pr}}},
                {"reliabilities", Json{{"r_f", r.r_f}, {"r_g", r.r_g}, {"rho_p", r.rho_p}}},
                {"terms",
                 Json{{"raw", d.raw_term},
                      {"framed", d.framed_term},
                      {"guided", d.guided_term},
                      {"panel", d.panel_term},
                      {"residual", d.residual_term}}},
                {"score", d.score},
                {"selected_rank", d.selected_rank},
                {"override", d.override}};
  }
  static DeltaDecision decode(const Json& j) {
    using namespace detail;
    DeltaDecision d;
    d.question_id = require_qid(j);
    d.challenger_rank = get_count(j, "challenger_rank");
    const auto& c = get_object(j, "counts");
    d.counts = {get_count(c, "b1"), get_count(c, "br"), get_count(c, "f1"), get_count(c, "fr"),
                get_count(c, "g1"), get_count(c, "gr"), get_count(c, "p1"), get_count(c, "pr")};
    const auto& r = get_object(j, "reliabilities");
    d.reliabilities = {get_real(r, "r_f"), get_real(r, "r_g"), get_real(r, "rho_p")};
    const auto& t = get_object(j, "terms");
    d.raw_term = get_real(t, "raw");
    d.framed_term = get_real(t, "framed");
    d.guided_term = get_real(t, "guided");
    d.panel_term = get_real(t, "panel");
    d.residual_term = get_real(t, "residual");
    d.score = get_real(j, "score");
    d.selected_rank = get_count(j, "selected_rank");
    d.override = get_bool(j, "override");
    if (d.override != (d.selected_rank != 1)) throw SchemaError("field 'override' disagrees with 'selected_rank'");
    return d;
  }
};

template <>
struct Codec<PredictionRecord> {
  static Json encode(const PredictionRecord& p) {
    return Json{{"question_id", p.question_id},
                {"m", p.basin_count},
                {"baseline", p.baseline},
                {"prediction", p.prediction},
                {"override", p.override}};
  }
  static PredictionRecord decode(const Json& j) {
    return {detail::require_qid(j), detail::get_count(j, "m"), detail::get_string(j, "baseline"),
            detail::get_string(j, "prediction"), detail::get_bool(j, "override")};
  }
};

template <>
struct Codec<ResidualRecord> {
  static Json encode(const ResidualRecord& r) {
    return Json{{"question_id", r.question_id}, {"rank", r.rank}, {"e", r.input.e}, {"gamma", r.input.gamma}};
  }
  static ResidualRecord decode(const Json& j) {
    ResidualRecord r;
    r.question_id = detail::require_qid(j);
    r.rank = detail::get_count(j, "rank");
    r.input.e = detail::get_real(j, "e");
    r.input.gamma = detail::get_real(j, "gamma");
    if (!(r.input.gamma >= 0.0 && r.input.gamma <= 1.0)) throw SchemaError("field 'gamma' must lie in [0,1]");
    return r;
  }
};

template <>
struct Codec<FrameRecord> {
  static Json encode(const FrameRecord& f) {
    return Json{{"question_id", f.question_id}, {"rank", f.rank}, {"answer", f.answer}, {"frame", f.frame}};
  }
  static FrameRecord decode(const Json& j) {
    return {detail::require_qid(j), detail::get_count(j, "rank"), detail::get_string(j, "answer"),
            detail::get_string(j, "frame")};
  }
};

template <>
struct Codec<TranscriptRecord> {
  static Json encode(const TranscriptRecord& t) {
    return Json{{"question_id", t.question_id}, {"stage", t.stage}, {"trial", t.trial},
                {"template_id", t.template_id}, {"prompt", t.prompt},           {"temperature", t.temperature},
                {"seed", t.seed},               {"status", t.status},           {"attempts", t.attempts},
                {"response", t.response},       {"error", t.error}};
  }
  static TranscriptRecord decode(const Json& j) {
    using namespace detail;
    TranscriptRecord t;
    t.question_id = require_qid(j);
    t.stage = get_string(j, "stage");
    t.trial = get_count(j, "trial");
    t.template_id = get_string(j, "template_id");
    t.prompt = get_string(j, "prompt");
    t.temperature = get_real(j, "temperature");
    t.seed = get_uint(j, "seed");
    t.status = get_count(j, "status");
    t.attempts = get_count(j, "attempts");
    t.response = get_string(j, "response");
    t.error = get_string(j, "error");
    return t;
  }
};

template <>
struct Codec<ExampleResult> {
  static Json encode(const ExampleResult& e) {
    Json oracle = Json::object();
    for (const auto& [k, hit] : e.oracle) oracle["o@" + std::to_string(k)] = hit;
    return Json{{"question_id", e.question_id},
                {"baseline", e.baseline},
                {"prediction", e.prediction},
                {"gold", e.gold},
                {"baseline_correct", e.baseline_correct},
                {"final_correct", e.final_correct},
                {"override", e.override},
                {"outcome", to_string(e.outcome)},
                {"has_basins", e.has_basins},
                {"wrong_majority", e.wrong_majority},
                {"oracle", std::move(oracle)}};
  }
  static ExampleResult decode(const Json& j) {
    using namespace detail;
    ExampleResult e;
    e.question_id = require_qid(j);
    e.baseline = get_string(j, "baseline");
    e.prediction = get_string(j, "prediction");
    e.gold = get_string(j, "gold");
    e.baseline_correct = get_bool(j, "baseline_correct");
    e.final_correct = get_bool(j, "final_correct");
    e.override = get_bool(j, "override");
    const auto outcome = get_string(j, "outcome");
    bool known = false;
    for (auto o : {Outcome::Unchanged, Outcome::Recovered, Outcome::Degraded, Outcome::WrongToWrong}) {
      if (to_string(o) == outcome) {
        e.outcome = o;
        known = true;
      }
    }
    if (!known) throw SchemaError("field 'outcome' has unknown value '" + outcome + "'");
    e.has_basins = get_bool(j, "has_basins");
    e.wrong_majority = get_bool(j, "wrong_majority");
    for (const auto& [key, hit] : get_object(j, "oracle").items()) {
      if (!key.starts_with("o@") || !hit.is_boolean()) throw SchemaError("field 'oracle' must map o@k to booleans");
      e.oracle[std::stoi(key.substr(2))] = hit.get<bool>();
    }
    return e;
  }
};

template <>
struct Codec<CorrectionReport> {
  static Json encode(const CorrectionReport& r) {
    Json oracle = Json::object();
    for (const auto& [k, o] : r.oracle_at) {
      oracle["o@" + std::to_string(k)] = Json{{"correct", o.correct}, {"extra", o.extra}, {"rate", o.rate}};
    }
    return Json{{"n", r.n},
                {"baseline_correct", r.baseline_correct},
                {"final_correct", r.final_correct},
                {"overrides", r.overrides},
                {"recovered", r.recovered},
                {"degraded", r.degraded},
                {"wrong_to_wrong", r.wrong_to_wrong},
                {"net", r.net},
                {"accuracy_baseline", r.accuracy_baseline},
                {"accuracy_final", r.accuracy_final},
                {"gain_pp", r.gain_pp()},
                {"oracle_at", std::move(oracle)},
                {"wm_count", r.wm_count}};
  }
  static CorrectionReport decode(const Json& j) {
    using namespace detail;
    CorrectionReport r;
    r.n = get_count(j, "n");
    r.baseline_correct = get_count(j, "baseline_correct");
    r.final_correct = get_count(j, "final_correct");
    r.overrides = get_count(j, "overrides");
    r.recovered = get_count(j, "recovered");
    r.degraded = get_count(j, "degraded");
    r.wrong_to_wrong = get_count(j, "wrong_to_wrong");
    r.net = static_cast<int>(get_int(j, "net"));
    r.accuracy_baseline = get_real(j, "accuracy_baseline");
    r.accuracy_final = get_real(j, "accuracy_final");
    for (const auto& [key, o] : get_object(j, "oracle_at").items()) {
      if (!key.starts_with("o@")) throw SchemaError("field 'oracle_at' keys must be o@k");
      r.oracle_at[std::stoi(key.substr(2))] = {get_count(o, "correct"), static_cast<int>(get_int(o, "extra")),
                                               get_real(o, "rate")};
    }
    r.wm_count = get_count(j, "wm_count");
    if (r.net != r.recovered - r.degraded) throw SchemaError("field 'net' must equal recovered - degraded");
    return r;
  }
};

template <>
struct Codec<RunSummary> {
  static Json encode(const RunSummary& s) {
    Json timings = Json::object();
    for (const auto& [stage, secs] : s.timings) timings[stage] = secs;
    return Json{{"run_id", s.run_id},
                {"command", s.command},
                {"raw_K", s.raw_K},
                {"greedy_generated", s.greedy_generated},
                {"greedy_in_consensus", s.greedy_in_consensus},
                {"model_name", s.model_name},
                {"dataset", s.dataset},
                {"config_digest", s.config_digest},
                {"effective_config", s.effective_config},
                {"inputs", s.inputs},
                {"timings", std::move(timings)}};
  }
  static RunSummary decode(const Json& j) {
    using namespace detail;
    RunSummary s;
    s.run_id = get_string(j, "run_id");
    s.command = get_string(j, "command");
    s.raw_K = get_count(j, "raw_K");
    s.greedy_generated = get_bool(j, "greedy_generated");
    s.greedy_in_consensus = get_bool(j, "greedy_in_consensus");
    if (s.greedy_in_consensus) throw SchemaError("field 'greedy_in_consensus' must be false");
    s.model_name = get_string(j, "model_name");
    s.dataset = get_string(j, "dataset");
    s.config_digest = get_string(j, "config_digest");
    s.effective_config = get_object(j, "effective_config");
    s.inputs = get_object(j, "inputs");
    for (const auto& [stage, secs] : get_object(j, "timings").items()) {
      if (!secs.is_number()) throw SchemaError("field 'timings' must map stages to seconds");
      s.timings[stage] = secs.get<double>();
    }
    return s;
  }
};

inline std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

template <class T>
std::string encode_line(const T& record) {
  return dump_line(Codec<T>::encode(record));
}

template <class T>
T decode_line(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return Codec<T>::decode(j);
}

template <class T>
void write_jsonl(const std::filesystem::path& path, std::span<const T> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& r : records) out << encode_line(r) << '\n';
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

template <class T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& records) {
  write_jsonl(path, std::span<const T>(records));
}

enum class ReadMode { Strict, Lenient };

template <class T>
struct ReadResult {
  std::vector<T> records;
  int skipped = 0;
  std::vector<std::string> diagnostics;  // "path:line: message"
};

// Blank lines are ignored. Strict mode throws on the first bad line; lenient
// mode skips it and records a diagnostic.
template <class T>
ReadResult<T> read_jsonl(const std::filesystem::path& path, ReadMode mode = ReadMode::Strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  ReadResult<T> result;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      result.records.push_back(decode_line<T>(line));
    } catch (const Error& e) {
      std::string where = path.string() + ":" + std::to_string(lineno) + ": " + e.what();
      if (mode == ReadMode::Strict) throw SchemaError(where);
      ++result.skipped;
      result.diagnostics.push_back(std::move(where));
    }
  }
  return result;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2, ' ', false, Json::error_handler_t::replace) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

// 64-bit FNV-1a, hex.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a_hex(buf.str());
}

}  // namespace arbiter

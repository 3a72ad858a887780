#pragma once

// Evidence collection against an OpenAI-compatible chat-completions endpoint.
//
// Collection runs in three phases over all questions: raw solves, basin
// descriptions for questions with a challenger, then framed, panel and
// guided trials for those questions. Every planned generation becomes a
// Candidate, failed ones included, so attempted denominators always equal the
// plan. Results land in pre-assigned slots, which keeps pools independent of
// response arrival order.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "arbiter/artifacts.hpp"
#include "arbiter/basin.hpp"
#include "arbiter/error.hpp"
#include "arbiter/normalize.hpp"
#include "arbiter/parallel.hpp"
#include "arbiter/templates.hpp"

namespace arbiter {

struct EndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string model_name;
  std::optional<std::string> api_key;
  std::chrono::milliseconds timeout{120000};
  int max_parallel = 4;
  int retry_budget = 2;  // retries after the first attempt
  std::chrono::milliseconds retry_backoff{250};
  int max_tokens = 1024;
};

struct PromptPlan {
  int raw_solves = 24;
  int framed_solves = 24;
  int panel_trials = 12;  // alternates original / swapped frame order
  int guided_trials = 4;  // alternates the B1 / B2 frame as the hypothesis
  bool greedy = false;    // extra temperature-0 anchor, never voted
  double temperature = 0.7;
  std::map<Source, double> temperature_overrides;
  std::uint64_t seed = 0;
  TemplateSet templates = TemplateSet::defaults();

  double temperature_for(Source s) const {
    if (s == Source::Greedy) return 0.0;
    auto it = temperature_overrides.find(s);
    return it == temperature_overrides.end() ? temperature : it->second;
  }
};

struct ChatRequest {
  std::string prompt;
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

struct ChatResult {
  bool ok = false;
  std::string text;
  int status = 0;
  int attempts = 0;
  std::string error;
};

// Must be safe to call from several threads at once.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual ChatResult generate(const ChatRequest& request) = 0;
};

class OpenAIChatClient final : public TextGenerator {
 public:
  explicit OpenAIChatClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme = cfg_.base_url.find("://");
    if (scheme == std::string::npos) throw Error("base_url needs a scheme: " + cfg_.base_url);
    const auto slash = cfg_.base_url.find('/', scheme + 3);
    origin_ = cfg_.base_url.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : cfg_.base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/chat/completions";
  }

  const std::string& path() const { return path_; }

  ChatResult generate(const ChatRequest& request) override {
    nlohmann::json body = {
        {"model", cfg_.model_name},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"seed", request.seed},
        {"max_tokens", cfg_.max_tokens},
        {"n", 1},
    };
    const std::string payload = body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    httplib::Headers headers;
    if (cfg_.api_key && !cfg_.api_key->empty()) headers.emplace("Authorization", "Bearer " + *cfg_.api_key);

    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    ChatResult result;
    for (int attempt = 0; attempt <= cfg_.retry_budget; ++attempt) {
      if (attempt > 0 && cfg_.retry_backoff.count() > 0) std::this_thread::sleep_for(cfg_.retry_backoff * attempt);
      ++result.attempts;
      auto res = client.Post(path_, headers, payload, "application/json");
      if (!res) {
        result.status = 0;
        result.error = "transport: " + httplib::to_string(res.error());
        continue;
      }
      result.status = res->status;
      if (res->status == 401 || res->status == 403) {
        throw AuthError("endpoint " + origin_ + path_ + " rejected credentials (HTTP " + std::to_string(res->status) +
                        ")");
      }
      if (res->status == 429 || res->status >= 500) {
        result.error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        result.error = "HTTP " + std::to_string(res->status);
        return result;
      }
      if (auto text = extract_content(res->body)) {
        result.ok = true;
        result.text = std::move(*text);
        result.error.clear();
      } else {
        result.error = "unreadable response body";
      }
      return result;
    }
    return result;
  }

 private:
  static std::optional<std::string> extract_content(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
      return std::nullopt;
    }
    const auto& choice = j["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) {
      const auto& content = choice["message"]["content"];
      if (content.is_string()) return content.get<std::string>();
      if (content.is_null()) return std::string();
    }
    if (choice.contains("text") && choice["text"].is_string()) return choice["text"].get<std::string>();
    return std::nullopt;
  }

  EndpointConfig cfg_;
  std::string origin_;
  std::string path_;
};

struct CollectedQuestion {
  std::string question_id;
  CandidatePool pool;  // raw, greedy and auxiliary candidates
  std::vector<FrameRecord> frames;
  std::vector<TranscriptRecord> transcript;
  std::vector<std::string> notes;  // skipped stages and similar
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t request_seed(std::uint64_t base, std::string_view qid, std::string_view stage, int trial) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : qid) h = (h ^ c) * 0x100000001b3ULL;
  h = (h ^ 0xff) * 0x100000001b3ULL;
  for (unsigned char c : stage) h = (h ^ c) * 0x100000001b3ULL;
  // Keep within 31 bits; some servers reject larger seeds.
  return splitmix64(base ^ splitmix64(h) ^ static_cast<std::uint64_t>(trial)) & 0x7fffffffULL;
}

struct GenerationTask {
  std::size_t question = 0;
  std::string stage;
  Source source = Source::Raw;
  int trial = 0;
  std::string template_id;
  std::string prompt;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  int frame_rank = 0;  // describe tasks only
  ChatResult result;
};

inline void run_tasks(std::vector<GenerationTask>& tasks, TextGenerator& gen, int max_parallel) {
  parallel_for(tasks.size(), max_parallel, [&](std::size_t i) {
    auto& t = tasks[i];
    t.result = gen.generate(ChatRequest{t.prompt, t.temperature, t.seed});
  });
}

inline TranscriptRecord transcript_of(const GenerationTask& t, const std::string& qid) {
  return TranscriptRecord{qid,         t.stage,          t.trial,          t.template_id,     t.prompt,       t.temperature,
                          t.seed,      t.result.status,  t.result.attempts, t.result.text,    t.result.error};
}

inline Candidate candidate_of(const GenerationTask& t, TaskFormat fmt) {
  Candidate c;
  c.index = t.trial;
  c.source = t.source;
  c.temperature = t.temperature;
  c.seed = t.seed;
  c.template_id = t.template_id;
  if (t.result.ok) {
    c.text = t.result.text;
    c.answer = extract_answer(c.text, fmt);
  } else {
    c.error = t.result.error.empty() ? "generation failed" : t.result.error;
  }
  return c;
}

inline std::string first_line(std::string_view text) {
  std::size_t at = 0;
  while (at < text.size()) {
    auto nl = text.find('\n', at);
    auto line = trim(text.substr(at, nl == std::string_view::npos ? std::string_view::npos : nl - at));
    if (!line.empty()) return std::string(line);
    if (nl == std::string_view::npos) break;
    at = nl + 1;
  }
  return {};
}

inline int source_order(Source s) {
  for (int i = 0; i < static_cast<int>(std::size(kAllSources)); ++i) {
    if (kAllSources[i] == s) return i;
  }
  return 0;
}

inline void sort_candidates(std::vector<Candidate>& cands) {
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.source != b.source) return source_order(a.source) < source_order(b.source);
    return a.index < b.index;
  });
}

inline GenerationTask describe_task(std::size_t qi, const Question& q, const BasinSet& basins,
                                    const CandidatePool& pool, int rank, const PromptPlan& plan) {
  const auto& basin = basins.at_rank(rank);
  const int representative = basin.members.front();
  std::string solution;
  for (const auto& c : pool.candidates) {
    if (c.source == Source::Raw && c.index == representative) solution = c.text;
  }
  GenerationTask t;
  t.question = qi;
  t.stage = "frame";
  t.trial = rank;
  t.template_id = std::string(template_id::kFrameExtract);
  t.prompt = plan.templates.render(template_id::kFrameExtract,
                                   {{"question", q.question}, {"solution", solution}, {"answer", basin.answer}});
  t.temperature = plan.temperature_for(Source::Raw);
  t.seed = request_seed(plan.seed, q.question_id, "frame", rank);
  t.frame_rank = rank;
  return t;
}

}  // namespace detail

// One frame per top-2 basin; an empty string marks a failed description.
inline std::map<int, std::string> describe_basins(const Question& question, const BasinSet& basins,
                                                  const CandidatePool& pool, TextGenerator& gen,
                                                  const PromptPlan& plan, int max_parallel = 2) {
  if (basins.count() < 2) throw NoChallengerError();
  std::vector<detail::GenerationTask> tasks;
  for (int rank : {1, 2}) tasks.push_back(detail::describe_task(0, question, basins, pool, rank, plan));
  detail::run_tasks(tasks, gen, max_parallel);
  std::map<int, std::string> frames;
  for (const auto& t : tasks) frames[t.frame_rank] = t.result.ok ? detail::first_line(t.result.text) : std::string();
  return frames;
}

inline std::vector<CollectedQuestion> collect_pool(std::span<const Question> questions, TextGenerator& gen,
                                                   const PromptPlan& plan, TaskFormat fmt, int max_parallel) {
  using detail::GenerationTask;
  if (max_parallel < 1) throw Error("max_parallel must be >= 1");
  if (plan.raw_solves < 0 || plan.framed_solves < 0 || plan.panel_trials < 0 || plan.guided_trials < 0) {
    throw Error("trial counts must be >= 0");
  }
  const std::string& answer_format = plan.templates.answer_format(fmt);
  std::vector<CollectedQuestion> out(questions.size());
  std::vector<std::vector<GenerationTask>> transcript_tasks(questions.size());
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    out[qi].question_id = questions[qi].question_id;
    out[qi].pool.question_id = questions[qi].question_id;
    out[qi].pool.format = fmt;
  }

  auto make = [&](std::size_t qi, Source src, int trial, std::string_view tpl,
                  std::map<std::string, std::string> values) {
    const auto& q = questions[qi];
    values.emplace("question", q.question);
    values.emplace("answer_format", answer_format);
    GenerationTask t;
    t.question = qi;
    t.stage = std::string(to_string(src));
    t.source = src;
    t.trial = trial;
    t.template_id = std::string(tpl);
    t.prompt = plan.templates.render(tpl, values);
    t.temperature = plan.temperature_for(src);
    t.seed = detail::request_seed(plan.seed, q.question_id, t.stage, trial);
    return t;
  };
  auto absorb = [&](std::vector<GenerationTask>& tasks) {
    for (auto& t : tasks) {
      if (t.frame_rank == 0) out[t.question].pool.candidates.push_back(detail::candidate_of(t, fmt));
      transcript_tasks[t.question].push_back(std::move(t));
    }
  };

  // Phase 1: raw pool (and the greedy anchor).
  std::vector<GenerationTask> tasks;
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    for (int t = 0; t < plan.raw_solves; ++t) {
      tasks.push_back(make(qi, Source::Raw, t, kRawTemplateIds[static_cast<std::size_t>(t) % std::size(kRawTemplateIds)], {}));
    }
    if (plan.greedy) tasks.push_back(make(qi, Source::Greedy, 0, template_id::kRawStep, {}));
  }
  detail::run_tasks(tasks, gen, max_parallel);
  absorb(tasks);

  // Phase 2: describe the top-2 basins where arbitration will be needed.
  std::vector<std::optional<BasinSet>> basins(questions.size());
  tasks.clear();
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    bool any_valid = false;
    for (const auto& c : out[qi].pool.candidates) any_valid |= c.source == Source::Raw && c.answer.valid;
    if (!any_valid) {
      out[qi].notes.push_back("no valid raw answer; auxiliary evidence skipped");
      continue;
    }
    basins[qi] = build_basins(out[qi].pool);
    if (basins[qi]->count() < 2) continue;
    for (int rank : {1, 2}) {
      tasks.push_back(detail::describe_task(qi, questions[qi], *basins[qi], out[qi].pool, rank, plan));
    }
  }
  detail::run_tasks(tasks, gen, max_parallel);
  std::vector<std::map<int, std::string>> frames(questions.size());
  for (const auto& t : tasks) {
    frames[t.question][t.frame_rank] = t.result.ok ? detail::first_line(t.result.text) : std::string();
    out[t.question].frames.push_back(
        FrameRecord{questions[t.question].question_id, t.frame_rank, basins[t.question]->at_rank(t.frame_rank).answer,
                    frames[t.question][t.frame_rank]});
  }
  absorb(tasks);

  // Phase 3: framed, panel and guided evidence.
  tasks.clear();
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    if (!basins[qi] || basins[qi]->count() < 2) continue;
    for (int t = 0; t < plan.framed_solves; ++t) tasks.push_back(make(qi, Source::Framed, t, template_id::kFramed, {}));
    const auto& f = frames[qi];
    const bool described = f.contains(1) && f.contains(2) && !f.at(1).empty() && !f.at(2).empty();
    if (!described) {
      if (plan.panel_trials + plan.guided_trials > 0) {
        out[qi].notes.push_back("basin description failed; panel and guided trials skipped");
      }
      continue;
    }
    for (int t = 0; t < plan.panel_trials; ++t) {
      const bool original = t % 2 == 0;
      tasks.push_back(make(qi, original ? Source::PanelOriginal : Source::PanelSwapped, t / 2, template_id::kPanel,
                           {{"frame_1", original ? f.at(1) : f.at(2)}, {"frame_2", original ? f.at(2) : f.at(1)}}));
    }
    for (int t = 0; t < plan.guided_trials; ++t) {
      tasks.push_back(make(qi, Source::Guided, t, template_id::kGuided, {{"frame", f.at(t % 2 == 0 ? 1 : 2)}}));
    }
  }
  detail::run_tasks(tasks, gen, max_parallel);
  absorb(tasks);

  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    detail::sort_candidates(out[qi].pool.candidates);
    for (const auto& t : transcript_tasks[qi]) out[qi].transcript.push_back(detail::transcript_of(t, questions[qi].question_id));
  }
  return out;
}

inline std::vector<CollectedQuestion> collect_pool(std::span<const Question> questions, const EndpointConfig& cfg,
                                                   const PromptPlan& plan, TaskFormat fmt) {
  OpenAIChatClient client(cfg);
  return collect_pool(questions, client, plan, fmt, cfg.max_parallel);
}

}  // namespace arbiter

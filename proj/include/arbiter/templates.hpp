#pragma once

// Prompt families for evidence collection. Placeholders are written
// {name}; unknown placeholders are left as-is.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "arbiter/error.hpp"
#include "arbiter/normalize.hpp"

namespace arbiter {

namespace template_id {
inline constexpr std::string_view kRawStep = "raw_step";
inline constexpr std::string_view kRawEquation = "raw_equation";
inline constexpr std::string_view kRawConstraints = "raw_constraints";
inline constexpr std::string_view kRawSelfCheck = "raw_selfcheck";
inline constexpr std::string_view kFramed = "framed";
inline constexpr std::string_view kFrameExtract = "frame_extract";
inline constexpr std::string_view kPanel = "panel";
inline constexpr std::string_view kGuided = "guided";
inline constexpr std::string_view kFormatNumeric = "answer_format_numeric";
inline constexpr std::string_view kFormatChoice = "answer_format_multiple_choice";
inline constexpr std::string_view kFormatBoxed = "answer_format_boxed";
}  // namespace template_id

inline constexpr std::string_view kRawTemplateIds[] = {template_id::kRawStep, template_id::kRawEquation,
                                                       template_id::kRawConstraints, template_id::kRawSelfCheck};

// Required placeholders per template id.
inline const std::map<std::string, std::vector<std::string>>& template_placeholders() {
  static const std::map<std::string, std::vector<std::string>> kRequired = {
      {"raw_step", {"question", "answer_format"}},
      {"raw_equation", {"question", "answer_format"}},
      {"raw_constraints", {"question", "answer_format"}},
      {"raw_selfcheck", {"question", "answer_format"}},
      {"framed", {"question", "answer_format"}},
      {"frame_extract", {"question", "solution", "answer"}},
      {"panel", {"question", "frame_1", "frame_2", "answer_format"}},
      {"guided", {"question", "frame", "answer_format"}},
      {"answer_format_numeric", {}},
      {"answer_format_multiple_choice", {}},
      {"answer_format_boxed", {}},
  };
  return kRequired;
}

class TemplateSet {
 public:
  static TemplateSet defaults() {
    TemplateSet t;
    t.text_ = {
        {"raw_step",
         "Solve the following problem step by step.\n\n{question}\n\n{answer_format}"},
        {"raw_equation",
         "Translate the problem into equations first, then solve them.\n\n{question}\n\n{answer_format}"},
        {"raw_constraints",
         "List the constraints given in the problem, then reason backwards from what is asked.\n\n"
         "{question}\n\n{answer_format}"},
        {"raw_selfcheck",
         "Solve the problem, then re-check every arithmetic step before answering.\n\n{question}\n\n"
         "{answer_format}"},
        {"framed",
         "Before solving, state in one sentence what quantity is asked for, which entities and units are "
         "involved, and which operations connect them. Then solve.\n\n{question}\n\n{answer_format}"},
        {"frame_extract",
         "Here is a problem and one worked solution that reaches the answer {answer}.\n\nProblem:\n{question}\n\n"
         "Solution:\n{solution}\n\nDescribe in one sentence how this solution interprets the problem: the target "
         "quantity, the entities and units, and the operation pattern. Do not restate the answer. Reply with the "
         "sentence only."},
        {"panel",
         "Two readings of the same problem are shown below.\n\nReading 1: {frame_1}\nReading 2: {frame_2}\n\n"
         "Decide which reading matches the problem, then solve it fresh.\n\n{question}\n\n{answer_format}"},
        {"guided",
         "Hypothesis about the problem: {frame}\n\nVerify or reject this hypothesis by solving the problem again "
         "from scratch.\n\n{question}\n\n{answer_format}"},
        {"answer_format_numeric", "End your response with a final line of the form \"#### <number>\"."},
        {"answer_format_multiple_choice", "End your response with \"Answer: (X)\" where X is one of A, B, C, D."},
        {"answer_format_boxed", "Put the final answer inside \\boxed{}."},
    };
    return t;
  }

  // Defaults overridden by any <id>.txt present in dir.
  static TemplateSet load(const std::filesystem::path& dir) {
    TemplateSet t = defaults();
    if (!std::filesystem::is_directory(dir)) throw Error("template directory not found: " + dir.string());
    for (auto& [id, text] : t.text_) {
      const auto file = dir / (id + ".txt");
      if (!std::filesystem::exists(file)) continue;
      std::ifstream in(file, std::ios::binary);
      if (!in) throw Error("cannot read template " + file.string());
      std::ostringstream buf;
      buf << in.rdbuf();
      text = buf.str();
      while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    }
    t.validate();
    return t;
  }

  void validate() const {
    for (const auto& [id, required] : template_placeholders()) {
      const auto& text = get(id);
      for (const auto& name : required) {
        if (text.find("{" + name + "}") == std::string::npos) {
          throw Error("template '" + id + "' lacks placeholder {" + name + "}");
        }
      }
    }
  }

  const std::string& get(std::string_view id) const {
    auto it = text_.find(std::string(id));
    if (it == text_.end()) throw Error("unknown template '" + std::string(id) + "'");
    return it->second;
  }

  void set(std::string_view id, std::string text) {
    if (!template_placeholders().contains(std::string(id))) throw Error("unknown template '" + std::string(id) + "'");
    text_[std::string(id)] = std::move(text);
  }

  const std::string& answer_format(TaskFormat fmt) const {
    switch (fmt) {
      case TaskFormat::Numeric:
        return get(template_id::kFormatNumeric);
      case TaskFormat::MultipleChoice:
        return get(template_id::kFormatChoice);
      case TaskFormat::Boxed:
        return get(template_id::kFormatBoxed);
    }
    return get(template_id::kFormatNumeric);
  }

  // Substitutes {name} for each entry in values, in a single left-to-right pass.
  std::string render(std::string_view id, const std::map<std::string, std::string>& values) const {
    const std::string& tpl = get(id);
    std::string out;
    out.reserve(tpl.size() + 256);
    for (std::size_t i = 0; i < tpl.size();) {
      if (tpl[i] == '{') {
        const auto close = tpl.find('}', i + 1);
        if (close != std::string::npos) {
          auto it = values.find(tpl.substr(i + 1, close - i - 1));
          if (it != values.end()) {
            out += it->second;
            i = close + 1;
            continue;
          }
        }
      }
      out.push_back(tpl[i++]);
    }
    return out;
  }

  const std::map<std::string, std::string>& all() const { return text_; }

 private:
  std::map<std::string, std::string> text_;
};

}  // namespace arbiter

#pragma once

// Final-answer extraction and answer equivalence for the three task formats.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "arbiter/error.hpp"

namespace arbiter {

enum class TaskFormat { Numeric, MultipleChoice, Boxed };

inline std::string_view to_string(TaskFormat fmt) {
  switch (fmt) {
    case TaskFormat::Numeric:
      return "numeric";
    case TaskFormat::MultipleChoice:
      return "multiple_choice";
    case TaskFormat::Boxed:
      return "boxed";
  }
  return "numeric";
}

inline TaskFormat parse_task_format(std::string_view name) {
  if (name == "numeric") return TaskFormat::Numeric;
  if (name == "multiple_choice" || name == "mc") return TaskFormat::MultipleChoice;
  if (name == "boxed") return TaskFormat::Boxed;
  throw Error("unknown task format '" + std::string(name) + "'");
}

// valid == false implies canonical is empty.
struct NormalizedAnswer {
  std::string canonical;
  bool valid = false;

  static NormalizedAnswer invalid() { return {}; }
  static NormalizedAnswer of(std::string canonical) {
    if (canonical.empty()) return {};
    return {std::move(canonical), true};
  }

  bool operator==(const NormalizedAnswer&) const = default;
};

using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Byte length of a currency symbol starting at s[i], 0 if none.
inline std::size_t currency_len(std::string_view s, std::size_t i) {
  static constexpr std::string_view kSymbols[] = {"$", "\xE2\x82\xAC" /* EUR */,
                                                  "\xC2\xA3" /* GBP */,
                                                  "\xC2\xA5" /* JPY */};
  for (auto sym : kSymbols) {
    if (s.substr(i, sym.size()) == sym) return sym.size();
  }
  return 0;
}

struct NumberSpan {
  std::size_t pos = 0;
  std::size_t len = 0;
};

// Length of a number token (sign, currency, digits, commas, decimals) at i.
// Returns 0 when no token starts there.
inline std::size_t number_token_at(std::string_view s, std::size_t i) {
  const std::size_t start = i;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  if (std::size_t c = currency_len(s, i); c > 0) {
    i += c;
    if (i < s.size() && (s[i] == '-' || s[i] == '+') && start == i - c) ++i;
  }
  bool digits = false;
  while (i < s.size() && is_digit(s[i])) {
    ++i;
    digits = true;
    if (i + 1 < s.size() && s[i] == ',' && is_digit(s[i + 1]) && digits) ++i;
  }
  if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
    ++i;
    while (i < s.size() && is_digit(s[i])) {
      ++i;
      digits = true;
    }
  }
  return digits ? i - start : 0;
}

// All standalone number tokens: not glued to a preceding letter, digit or '_'.
inline std::vector<NumberSpan> find_numbers(std::string_view s) {
  std::vector<NumberSpan> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const bool glued = i > 0 && (is_alnum(s[i - 1]) || s[i - 1] == '_' || s[i - 1] == '.');
    if (!glued) {
      if (std::size_t n = number_token_at(s, i); n > 0) {
        out.push_back({i, n});
        i += n;
        continue;
      }
    }
    ++i;
  }
  return out;
}

}  // namespace detail

// Canonical decimal string for a numeric token: commas and one currency
// symbol dropped, leading zeros and trailing fractional zeros removed, a
// negative sign kept. nullopt if the token is not a number.
inline std::optional<std::string> canonical_number(std::string_view token) {
  using detail::is_digit;
  token = detail::trim(token);
  bool negative = false;
  std::size_t i = 0;
  auto take_sign = [&] {
    if (i < token.size() && (token[i] == '-' || token[i] == '+')) {
      negative = token[i] == '-';
      ++i;
      return true;
    }
    return false;
  };
  const bool signed_first = take_sign();
  if (std::size_t c = detail::currency_len(token, i); c > 0) {
    i += c;
    if (!signed_first) take_sign();
  }
  std::string integer;
  std::string fraction;
  bool seen_point = false;
  for (; i < token.size(); ++i) {
    const char ch = token[i];
    if (is_digit(ch)) {
      (seen_point ? fraction : integer).push_back(ch);
    } else if (ch == ',' && !seen_point && !integer.empty()) {
      continue;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      return std::nullopt;
    }
  }
  if (integer.empty() && fraction.empty()) return std::nullopt;
  const auto nz = integer.find_first_not_of('0');
  integer = nz == std::string::npos ? "0" : integer.substr(nz);
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
  std::string out;
  if (negative && !(integer == "0" && fraction.empty())) out.push_back('-');
  out += integer;
  if (!fraction.empty()) {
    out.push_back('.');
    out += fraction;
  }
  return out;
}

namespace detail {

inline NormalizedAnswer extract_numeric(std::string_view text) {
  // Last "#### <value>" line that carries a number.
  std::size_t end = text.size();
  while (end > 0) {
    std::size_t begin = text.rfind('\n', end - 1);
    begin = begin == std::string_view::npos ? 0 : begin + 1;
    const std::string_view line = text.substr(begin, end - begin);
    if (auto mark = line.rfind("####"); mark != std::string_view::npos) {
      const auto payload = line.substr(mark + 4);
      const auto nums = find_numbers(payload);
      if (!nums.empty()) {
        if (auto c = canonical_number(payload.substr(nums.front().pos, nums.front().len))) {
          return NormalizedAnswer::of(std::move(*c));
        }
      }
    }
    if (begin == 0) break;
    end = begin - 1;
  }
  const auto nums = find_numbers(text);
  for (auto it = nums.rbegin(); it != nums.rend(); ++it) {
    if (auto c = canonical_number(text.substr(it->pos, it->len))) {
      return NormalizedAnswer::of(std::move(*c));
    }
  }
  return NormalizedAnswer::invalid();
}

inline bool is_choice(char c) { return c >= 'A' && c <= 'D'; }

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Position just past the matching '}' for the '{' at open, or npos.
inline std::size_t match_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == '{' || s[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

struct BoxedPayload {
  std::size_t pos = 0;
  std::string_view body;
};

inline std::optional<BoxedPayload> last_boxed(std::string_view text) {
  std::optional<BoxedPayload> best;
  for (std::string_view cmd : {std::string_view("\\boxed"), std::string_view("\\fbox")}) {
    std::size_t at = text.rfind(cmd);
    while (at != std::string_view::npos) {
      std::size_t open = at + cmd.size();
      while (open < text.size() && is_space(text[open])) ++open;
      if (open < text.size() && text[open] == '{') {
        const auto close = match_brace(text, open);
        if (close != std::string_view::npos) {
          if (!best || at > best->pos) {
            best = BoxedPayload{at, text.substr(open + 1, close - open - 2)};
          }
          break;
        }
      }
      if (at == 0) break;
      at = text.rfind(cmd, at - 1);
    }
  }
  return best;
}

inline NormalizedAnswer extract_choice(std::string_view text) {
  const std::string lower = lower_ascii(text);
  std::optional<std::pair<std::size_t, char>> last;
  auto consider = [&](std::size_t pos, char letter) {
    if (!last || pos >= last->first) last = std::make_pair(pos, letter);
  };

  // "answer is (C)", "Answer: C", "final answer: **C**"
  for (std::size_t at = lower.find("answer"); at != std::string::npos;
       at = lower.find("answer", at + 1)) {
    std::size_t i = at + 6;
    auto skip = [&](auto pred) {
      while (i < text.size() && pred(text[i])) ++i;
    };
    auto skip_noise = [&] {
      skip([](char c) { return is_space(c) || c == '*' || c == ':' || c == '-'; });
    };
    skip_noise();
    if (lower.compare(i, 2, "is") == 0 && (i + 2 >= text.size() || !is_alnum(text[i + 2]))) {
      i += 2;
      skip_noise();
    }
    for (std::string_view word : {std::string_view("option"), std::string_view("choice")}) {
      if (lower.compare(i, word.size(), word) == 0) {
        i += word.size();
        skip_noise();
      }
    }
    bool bracketed = false;
    if (i < text.size() && (text[i] == '(' || text[i] == '[')) {
      bracketed = true;
      ++i;
    }
    if (i >= text.size()) continue;
    char letter = text[i];
    if (bracketed && letter >= 'a' && letter <= 'd') letter = static_cast<char>(letter - 'a' + 'A');
    if (!is_choice(letter)) continue;
    if (i + 1 < text.size() && is_alnum(text[i + 1])) continue;
    consider(i, letter);
  }

  if (auto boxed = last_boxed(text)) {
    auto body = trim(boxed->body);
    if (body.starts_with("\\text{") && body.ends_with("}")) body = trim(body.substr(6, body.size() - 7));
    if (body.size() >= 3 && body.front() == '(' && body.back() == ')') body = body.substr(1, body.size() - 2);
    if (body.size() == 1 && is_choice(body[0])) consider(boxed->pos, body[0]);
  }
  if (last) return NormalizedAnswer::of(std::string(1, last->second));

  // Last "(C)" anywhere.
  for (std::size_t at = text.rfind('('); at != std::string_view::npos;
       at = at == 0 ? std::string_view::npos : text.rfind('(', at - 1)) {
    if (at + 2 < text.size() && is_choice(text[at + 1]) && text[at + 2] == ')') {
      return NormalizedAnswer::of(std::string(1, text[at + 1]));
    }
  }

  // A final line that is just the letter.
  std::string_view rest = trim(text);
  const auto nl = rest.rfind('\n');
  std::string_view line = trim(nl == std::string_view::npos ? rest : rest.substr(nl + 1));
  while (!line.empty() && (line.front() == '*' || line.front() == '(')) line.remove_prefix(1);
  while (!line.empty() && (line.back() == '*' || line.back() == '.' || line.back() == ')')) {
    line.remove_suffix(1);
  }
  if (line.size() == 1 && is_choice(line[0])) return NormalizedAnswer::of(std::string(line));
  return NormalizedAnswer::invalid();
}

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size())) {
    s.replace(at, from.size(), to);
  }
}

// True when s has an operator at brace/paren depth 0 (ignoring a leading
// sign when allow_leading_sign).
inline bool has_top_level_operator(std::string_view s, bool allow_leading_sign) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '{' || c == '(' || c == '[') ++depth;
    if (c == '}' || c == ')' || c == ']') --depth;
    if (depth != 0) continue;
    if (c == '+' || c == '*' || c == '/' || c == '^' || c == '=' || c == ',') return true;
    if (c == '-' && !(i == 0 && allow_leading_sign)) return true;
  }
  return false;
}

inline std::string strip_outer_braces(std::string s) {
  while (s.size() >= 2 && s.front() == '{' && match_brace(s, 0) == s.size()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

// One argument of \frac: a braced group or a single character.
inline std::optional<std::pair<std::string, std::size_t>> frac_argument(const std::string& s,
                                                                        std::size_t i) {
  if (i >= s.size()) return std::nullopt;
  if (s[i] == '{') {
    const auto close = match_brace(s, i);
    if (close == std::string::npos) return std::nullopt;
    return std::make_pair(s.substr(i + 1, close - i - 2), close);
  }
  if (s[i] == '\\' || s[i] == '}') return std::nullopt;
  return std::make_pair(std::string(1, s[i]), i + 1);
}

inline std::string convert_fracs(std::string s) {
  static constexpr std::string_view kFrac = "\\frac";
  for (std::size_t at = s.rfind(kFrac); at != std::string::npos;
       at = at == 0 ? std::string::npos : s.rfind(kFrac, at - 1)) {
    const std::size_t after = at + kFrac.size();
    if (after < s.size() && is_alpha(s[after])) continue;
    const auto num = frac_argument(s, after);
    if (!num) continue;
    const auto den = frac_argument(s, num->second);
    if (!den) continue;
    std::string n = strip_outer_braces(num->first);
    std::string d = strip_outer_braces(den->first);
    if (has_top_level_operator(n, true)) n = "(" + n + ")";
    if (has_top_level_operator(d, false)) d = "(" + d + ")";
    std::string replacement = n + "/" + d;
    const std::size_t end = den->second;
    const bool glued_left = at > 0 && (is_alnum(s[at - 1]) || s[at - 1] == ')' || s[at - 1] == '}');
    const bool glued_right =
        end < s.size() && (is_alnum(s[end]) || s[end] == '(' || s[end] == '\\' || s[end] == '{');
    if (glued_left || glued_right) replacement = "(" + replacement + ")";
    s.replace(at, end - at, replacement);
  }
  return s;
}

}  // namespace detail

// Canonical form of a boxed payload. Idempotent.
inline std::string canonical_boxed(std::string_view payload) {
  std::string s;
  s.reserve(payload.size());
  for (char c : payload) {
    if (!detail::is_space(c) && c != '$') s.push_back(c);
  }
  for (std::string_view noise : {"\\left", "\\right", "\\!", "\\,", "\\;", "\\:"}) {
    detail::replace_all(s, noise, "");
  }
  detail::replace_all(s, "\\dfrac", "\\frac");
  detail::replace_all(s, "\\tfrac", "\\frac");
  s = detail::convert_fracs(std::move(s));
  return detail::strip_outer_braces(std::move(s));
}

namespace detail {

class RationalParser {
 public:
  explicit RationalParser(std::string_view s) : s_(s) {}

  std::optional<Rational> parse() {
    if (s_.empty() || s_.size() > kMaxLength) return std::nullopt;
    auto v = expr(0);
    if (!v || pos_ != s_.size()) return std::nullopt;
    return v;
  }

 private:
  static constexpr std::size_t kMaxLength = 256;
  static constexpr int kMaxDepth = 64;

  bool eat(std::string_view tok) {
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  std::optional<Rational> expr(int depth) {
    auto lhs = term(depth);
    if (!lhs) return std::nullopt;
    while (pos_ < s_.size()) {
      if (eat("+")) {
        auto rhs = term(depth);
        if (!rhs) return std::nullopt;
        *lhs += *rhs;
      } else if (eat("-")) {
        auto rhs = term(depth);
        if (!rhs) return std::nullopt;
        *lhs -= *rhs;
      } else {
        break;
      }
    }
    return lhs;
  }

  std::optional<Rational> term(int depth) {
    auto lhs = factor(depth);
    if (!lhs) return std::nullopt;
    while (pos_ < s_.size()) {
      if (eat("*") || eat("\\cdot") || eat("\\times")) {
        auto rhs = factor(depth);
        if (!rhs) return std::nullopt;
        *lhs *= *rhs;
      } else if (eat("/") || eat("\\div")) {
        auto rhs = factor(depth);
        if (!rhs || *rhs == 0) return std::nullopt;
        *lhs /= *rhs;
      } else {
        break;
      }
    }
    return lhs;
  }

  std::optional<Rational> factor(int depth) {
    if (depth > kMaxDepth) return std::nullopt;
    if (eat("-")) {
      auto v = factor(depth + 1);
      if (v) *v = -*v;
      return v;
    }
    if (eat("+")) return factor(depth + 1);
    for (auto [open, close] : {std::pair{'(', ')'}, std::pair{'{', '}'}}) {
      if (pos_ < s_.size() && s_[pos_] == open) {
        ++pos_;
        auto v = expr(depth + 1);
        if (!v || pos_ >= s_.size() || s_[pos_] != close) return std::nullopt;
        ++pos_;
        return v;
      }
    }
    return number();
  }

  std::optional<Rational> number() {
    using boost::multiprecision::cpp_int;
    cpp_int digits = 0;
    cpp_int scale = 1;
    bool any = false;
    while (pos_ < s_.size() && is_digit(s_[pos_])) {
      digits = digits * 10 + (s_[pos_++] - '0');
      any = true;
    }
    if (pos_ + 1 < s_.size() && s_[pos_] == '.' && is_digit(s_[pos_ + 1])) {
      ++pos_;
      while (pos_ < s_.size() && is_digit(s_[pos_])) {
        digits = digits * 10 + (s_[pos_++] - '0');
        scale *= 10;
        any = true;
      }
    }
    if (!any) return std::nullopt;
    return Rational(digits, scale);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Exact value of an arithmetic expression over integers, decimals and
// fractions; nullopt for anything else (symbols, roots, division by zero).
inline std::optional<Rational> evaluate_rational(std::string_view canonical) {
  return detail::RationalParser(canonical).parse();
}

inline NormalizedAnswer extract_answer(std::string_view text, TaskFormat fmt) {
  switch (fmt) {
    case TaskFormat::Numeric:
      return detail::extract_numeric(text);
    case TaskFormat::MultipleChoice:
      return detail::extract_choice(text);
    case TaskFormat::Boxed: {
      auto boxed = detail::last_boxed(text);
      if (!boxed) return NormalizedAnswer::invalid();
      return NormalizedAnswer::of(canonical_boxed(boxed->body));
    }
  }
  return NormalizedAnswer::invalid();
}

// Canonicalizes a bare reference answer (a gold label, a recorded
// prediction) without the final-line conventions of extract_answer.
inline NormalizedAnswer canonicalize(std::string_view raw, TaskFormat fmt) {
  raw = detail::trim(raw);
  if (raw.empty()) return NormalizedAnswer::invalid();
  switch (fmt) {
    case TaskFormat::Numeric:
      if (auto c = canonical_number(raw)) return NormalizedAnswer::of(std::move(*c));
      return detail::extract_numeric(raw);
    case TaskFormat::MultipleChoice:
      if (raw.size() == 1 && raw[0] >= 'a' && raw[0] <= 'd') {
        return NormalizedAnswer::of(std::string(1, static_cast<char>(raw[0] - 'a' + 'A')));
      }
      return detail::extract_choice(raw);
    case TaskFormat::Boxed:
      if (auto boxed = detail::last_boxed(raw)) return NormalizedAnswer::of(canonical_boxed(boxed->body));
      return NormalizedAnswer::of(canonical_boxed(raw));
  }
  return NormalizedAnswer::invalid();
}

// Key whose equality is exactly answers_equivalent on valid answers.
inline std::string equivalence_key(const NormalizedAnswer& a, TaskFormat fmt) {
  if (!a.valid) return {};
  if (fmt == TaskFormat::Boxed) {
    if (auto q = evaluate_rational(a.canonical)) {
      return "q:" + numerator(*q).str() + "/" + denominator(*q).str();
    }
    return "s:" + a.canonical;
  }
  return a.canonical;
}

inline bool answers_equivalent(const NormalizedAnswer& a, const NormalizedAnswer& b, TaskFormat fmt) {
  if (!a.valid || !b.valid) return false;
  if (fmt != TaskFormat::Boxed) return a.canonical == b.canonical;
  if (a.canonical == b.canonical) return true;
  return equivalence_key(a, fmt) == equivalence_key(b, fmt);
}

}  // namespace arbiter

#include <gmpxx.h>
#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "arbiter/normalize.hpp"
#include "support.hpp"

namespace arbiter {
namespace {

using testing::Gen;

NormalizedAnswer num(std::string_view text) { return extract_answer(text, TaskFormat::Numeric); }
NormalizedAnswer mc(std::string_view text) { return extract_answer(text, TaskFormat::MultipleChoice); }
NormalizedAnswer boxed(std::string_view text) { return extract_answer(text, TaskFormat::Boxed); }

TEST(Normalize, NumericFinalLine) {
  EXPECT_EQ(num("...so we get\n#### 72"), NormalizedAnswer::of("72"));
  EXPECT_EQ(num("$1,000 total\n#### 1,000"), NormalizedAnswer::of("1000"));
  EXPECT_EQ(num("blah blah no answer"), NormalizedAnswer::invalid());
  EXPECT_TRUE(num("blah blah no answer").canonical.empty());
}

TEST(Normalize, NumericCanonicalForms) {
  EXPECT_EQ(num("#### $12").canonical, "12");
  EXPECT_EQ(num("#### 3.50").canonical, "3.5");
  EXPECT_EQ(num("#### 2.0").canonical, "2");
  EXPECT_EQ(num("#### -7").canonical, "-7");
  EXPECT_EQ(num("#### 007").canonical, "7");
  EXPECT_EQ(num("#### -0.0").canonical, "0");
  EXPECT_EQ(num("#### .5").canonical, "0.5");
  EXPECT_EQ(num("#### 1,234,567.890").canonical, "1234567.89");
}

TEST(Normalize, NumericLastOccurrenceWins) {
  EXPECT_EQ(num("#### 3\nwait, recheck\n#### 5").canonical, "5");
  // the marker's value is the number right after it
  EXPECT_EQ(num("#### 4 apples or 6").canonical, "4");
  EXPECT_EQ(num("first 10 then 20 then 30").canonical, "30");
  // A marker line without a number falls back to the last number anywhere.
  EXPECT_EQ(num("she had 15 pens\n#### none").canonical, "15");
}

TEST(Normalize, NumericIgnoresNumbersInsideWords) {
  EXPECT_EQ(num("step2 gives x3 so").valid, false);
  EXPECT_EQ(num("the answer is 12 and not q7").canonical, "12");
}

TEST(Normalize, ChoicePatterns) {
  EXPECT_EQ(mc("The answer is (C)."), NormalizedAnswer::of("C"));
  EXPECT_EQ(mc("Answer: (B)").canonical, "B");
  EXPECT_EQ(mc("so the answer is D").canonical, "D");
  // lowercase would misread "the answer is a ..."
  EXPECT_FALSE(mc("so the answer is a multiple of 3").valid);
  EXPECT_EQ(mc("Reasoning here.\nA").canonical, "A");
  EXPECT_EQ(mc("I pick \\boxed{B}").canonical, "B");
  EXPECT_EQ(mc("(A) looks wrong; (D) fits").canonical, "D");
  EXPECT_EQ(mc("Answer: (A)\nOn reflection the answer is (C)").canonical, "C");
  EXPECT_FALSE(mc("none of these fit").valid);
  EXPECT_FALSE(mc("The answer is (E)").valid);
}

TEST(Normalize, BoxedCanonicalForms) {
  EXPECT_EQ(boxed("so \\boxed{\\frac{1}{2}}").canonical, "1/2");
  EXPECT_EQ(boxed("\\boxed{ \\dfrac{3}{4} }").canonical, "3/4");
  EXPECT_EQ(boxed("\\boxed{{7}}").canonical, "7");
  EXPECT_EQ(boxed("\\boxed{x + 1}").canonical, "x+1");
  EXPECT_EQ(boxed("\\boxed{1} then \\boxed{2}").canonical, "2");
  EXPECT_EQ(boxed("\\boxed{\\left(1,2\\right)}").canonical, "(1,2)");
  EXPECT_FALSE(boxed("no box here").valid);
  EXPECT_FALSE(boxed("\\boxed{}").valid);
  EXPECT_FALSE(boxed("\\boxed{unclosed").valid);
}

TEST(Normalize, Equivalence) {
  const auto fmt = TaskFormat::Boxed;
  EXPECT_TRUE(answers_equivalent(NormalizedAnswer::of("1/2"), NormalizedAnswer::of("0.5"), fmt));
  EXPECT_TRUE(answers_equivalent(NormalizedAnswer::of("42"), NormalizedAnswer::of("42"), TaskFormat::Numeric));
  EXPECT_FALSE(answers_equivalent(NormalizedAnswer::of("\\sqrt{2}"), NormalizedAnswer::of("1.414"), fmt));
  EXPECT_TRUE(answers_equivalent(boxed("\\boxed{\\frac{6}{4}}"), NormalizedAnswer::of("3/2"), fmt));
  EXPECT_TRUE(answers_equivalent(NormalizedAnswer::of("2*3"), NormalizedAnswer::of("6"), fmt));
  EXPECT_FALSE(answers_equivalent(NormalizedAnswer::of("1/0"), NormalizedAnswer::of("1/0.0"), fmt));
  EXPECT_FALSE(answers_equivalent(NormalizedAnswer::invalid(), NormalizedAnswer::invalid(), fmt));
  EXPECT_FALSE(answers_equivalent(NormalizedAnswer::of("5"), NormalizedAnswer::invalid(), TaskFormat::Numeric));
  // Numeric equality is on canonical strings only.
  EXPECT_FALSE(answers_equivalent(NormalizedAnswer::of("0.5"), NormalizedAnswer::of("1/2"), TaskFormat::Numeric));
}

TEST(Normalize, RationalEvaluation) {
  EXPECT_EQ(evaluate_rational("-(1/3)+2"), Rational(5, 3));
  EXPECT_EQ(evaluate_rational("1.25\\cdot4"), Rational(5));
  EXPECT_EQ(evaluate_rational("7\\div2"), Rational(7, 2));
  EXPECT_FALSE(evaluate_rational("x+1"));
  EXPECT_FALSE(evaluate_rational("3/(2-2)"));
  EXPECT_FALSE(evaluate_rational(std::string(300, '1')));
  EXPECT_FALSE(evaluate_rational(std::string(100, '(') + "1" + std::string(100, ')')));
}

TEST(Normalize, CanonicalizeGoldLabels) {
  EXPECT_EQ(canonicalize(" 1,000 ", TaskFormat::Numeric).canonical, "1000");
  EXPECT_EQ(canonicalize("c", TaskFormat::MultipleChoice).canonical, "C");
  EXPECT_EQ(canonicalize("\\frac{1}{2}", TaskFormat::Boxed).canonical, "1/2");
  EXPECT_EQ(canonicalize("\\boxed{5}", TaskFormat::Boxed).canonical, "5");
  EXPECT_FALSE(canonicalize("   ", TaskFormat::Numeric).valid);
}

TEST(Normalize, FormatNames) {
  for (auto f : {TaskFormat::Numeric, TaskFormat::MultipleChoice, TaskFormat::Boxed}) {
    EXPECT_EQ(parse_task_format(to_string(f)), f);
  }
  EXPECT_THROW(parse_task_format("essay"), Error);
}

std::string random_number(Gen& g) {
  std::string s = g.coin(0.3) ? "-" : "";
  s += std::to_string(g.between(1, 999999));
  if (g.coin(0.4)) {
    std::string frac = std::to_string(g.between(0, 999));
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    if (!frac.empty()) s += "." + frac;
  }
  return s;
}

TEST(NormalizeProperty, CanonicalNumbersAreFixedPoints) {
  Gen g(11);
  for (int i = 0; i < 2000; ++i) {
    const std::string c = random_number(g);
    const auto text = "some work\n" + std::string(g.coin() ? "#### " : "####") + c;
    ASSERT_EQ(num(text).canonical, c) << text;
    ASSERT_EQ(canonicalize(c, TaskFormat::Numeric).canonical, c);
    ASSERT_EQ(num(text), num(text));
  }
}

TEST(NormalizeProperty, BoxedCanonicalIsIdempotent) {
  Gen g(12);
  const std::vector<std::string> pieces = {"\\frac{1}{2}", "x", "+", "3", "\\dfrac{a}{b}", "{y}", " ", "-", "2.50"};
  for (int i = 0; i < 1000; ++i) {
    std::string body;
    const int n = g.between(1, 6);
    for (int k = 0; k < n; ++k) body += pieces[static_cast<std::size_t>(g.between(0, static_cast<int>(pieces.size()) - 1))];
    const auto once = boxed("\\boxed{" + body + "}");
    if (!once.valid) continue;
    ASSERT_EQ(canonicalize(once.canonical, TaskFormat::Boxed), once) << body;
  }
}

// A random rational written in one of several surface forms; `value`
// holds the exact number the string denotes, computed with GMP.
struct RationalString {
  std::string text;
  mpq_class value;
};

RationalString random_rational_string(Gen& g, const mpq_class* near = nullptr) {
  mpz_class num;
  mpz_class den;
  if (near != nullptr && g.coin(0.6)) {
    num = near->get_num();
    den = near->get_den();
  } else {
    num = g.between(-500, 500);
    den = g.between(1, 64);
  }
  mpq_class value(num, den);
  value.canonicalize();
  const int form = g.between(0, 4);
  RationalString out{{}, value};
  const int scale = g.between(1, 9);
  const mpz_class sn = value.get_num() * scale;
  const mpz_class sd = value.get_den() * scale;
  switch (form) {
    case 0:
      out.text = sn.get_str() + "/" + sd.get_str();
      break;
    case 1: {
      const std::string sign = sn < 0 ? "-" : "";
      const mpz_class an = abs(sn);
      out.text = sign + "\\frac{" + an.get_str() + "}{" + sd.get_str() + "}";
      break;
    }
    case 2: {
      // Decimal when the denominator has only factors 2 and 5.
      mpz_class d = value.get_den();
      int twos = 0;
      int fives = 0;
      while (d % 2 == 0) {
        d /= 2;
        ++twos;
      }
      while (d % 5 == 0) {
        d /= 5;
        ++fives;
      }
      if (d != 1) {
        out.text = value.get_num().get_str() + "/" + value.get_den().get_str();
        break;
      }
      const int digits = std::max(twos, fives);
      mpz_class pow10 = 1;
      for (int i = 0; i < digits; ++i) pow10 *= 10;
      const mpz_class scaled = value.get_num() * (pow10 / value.get_den());
      const mpz_class mag = abs(scaled);
      std::string body = mag.get_str();
      if (digits > 0) {
        while (static_cast<int>(body.size()) <= digits) body.insert(0, "0");
        body.insert(body.size() - static_cast<std::size_t>(digits), ".");
      }
      out.text = (scaled < 0 ? "-" : "") + body;
      break;
    }
    case 3:
      out.text = "(" + sn.get_str() + ")/(" + sd.get_str() + ")";
      break;
    default: {
      // integer part plus a proper fraction, e.g. 2+1/3
      const mpz_class whole = value.get_num() / value.get_den();
      const mpq_class rest = value - mpq_class(whole);
      out.text = whole.get_str() + "+" + "(" + rest.get_num().get_str() + "/" + rest.get_den().get_str() + ")";
      break;
    }
  }
  return out;
}

TEST(NormalizeProperty, RationalEquivalenceMatchesGmpOracle) {
  Gen g(13);
  int equal_pairs = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_rational_string(g);
    const auto b = random_rational_string(g, &a.value);
    const auto na = boxed("\\boxed{" + a.text + "}");
    const auto nb = canonicalize(b.text, TaskFormat::Boxed);
    ASSERT_TRUE(na.valid && nb.valid) << a.text << " | " << b.text;
    const bool expected = a.value == b.value;
    equal_pairs += expected;
    ASSERT_EQ(answers_equivalent(na, nb, TaskFormat::Boxed), expected) << a.text << " vs " << b.text;
    ASSERT_EQ(answers_equivalent(nb, na, TaskFormat::Boxed), expected);
  }
  EXPECT_GT(equal_pairs, 300);
}

TEST(NormalizeProperty, EquivalenceIsAnEquivalenceRelation) {
  Gen g(14);
  const auto fmt = TaskFormat::Boxed;
  for (int i = 0; i < 500; ++i) {
    const auto a = random_rational_string(g);
    const auto b = random_rational_string(g, &a.value);
    const auto c = random_rational_string(g, &b.value);
    const auto na = canonicalize(a.text, fmt);
    const auto nb = canonicalize(b.text, fmt);
    const auto nc = canonicalize(c.text, fmt);
    ASSERT_TRUE(answers_equivalent(na, na, fmt));
    ASSERT_EQ(answers_equivalent(na, nb, fmt), answers_equivalent(nb, na, fmt));
    if (answers_equivalent(na, nb, fmt) && answers_equivalent(nb, nc, fmt)) {
      ASSERT_TRUE(answers_equivalent(na, nc, fmt)) << a.text << " " << b.text << " " << c.text;
    }
    ASSERT_EQ(answers_equivalent(na, nb, fmt), equivalence_key(na, fmt) == equivalence_key(nb, fmt));
  }
}

}  // namespace
}  // namespace arbiter

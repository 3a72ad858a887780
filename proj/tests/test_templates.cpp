#include <gtest/gtest.h>

#include <string>

#include "arbiter/templates.hpp"
#include "support.hpp"

namespace arbiter {
namespace {

using testing::slurp;
using testing::spit;
using testing::TempDir;

TEST(Templates, ShippedFilesMatchBuiltIns) {
  const auto dir = testing::source_dir() / "templates";
  const auto defaults = TemplateSet::defaults();
  for (const auto& [id, text] : defaults.all()) {
    const auto file = dir / (id + ".txt");
    ASSERT_TRUE(std::filesystem::exists(file)) << file;
    EXPECT_EQ(slurp(file), text + "\n") << id;
  }
  const auto loaded = TemplateSet::load(dir);
  EXPECT_EQ(loaded.all(), defaults.all());
}

TEST(Templates, DefaultsCarryRequiredPlaceholders) {
  EXPECT_NO_THROW(TemplateSet::defaults().validate());
  EXPECT_EQ(template_placeholders().size(), TemplateSet::defaults().all().size());
}

TEST(Templates, RenderSubstitutesOnce) {
  const auto t = TemplateSet::defaults();
  const auto out = t.render(template_id::kGuided, {{"question", "What is {frame}?"}, {"frame", "F"},
                                                   {"answer_format", "fmt"}});
  EXPECT_NE(out.find("Hypothesis about the problem: F"), std::string::npos);
  // substituted text is not rescanned
  EXPECT_NE(out.find("What is {frame}?"), std::string::npos);
  EXPECT_EQ(out.substr(out.size() - 3), "fmt");
  const auto partial = t.render(template_id::kPanel, {{"frame_1", "a"}});
  EXPECT_NE(partial.find("{frame_2}"), std::string::npos);
}

TEST(Templates, AnswerFormatPerTask) {
  const auto t = TemplateSet::defaults();
  EXPECT_NE(t.answer_format(TaskFormat::Numeric).find("####"), std::string::npos);
  EXPECT_NE(t.answer_format(TaskFormat::MultipleChoice).find("Answer: (X)"), std::string::npos);
  EXPECT_NE(t.answer_format(TaskFormat::Boxed).find("\\boxed{}"), std::string::npos);
}

TEST(Templates, DirectoryOverrides) {
  TempDir dir;
  spit(dir / "guided.txt", "Check: {frame}\n{question}\n{answer_format}\r\n\n");
  spit(dir / "unrelated.txt", "ignored");
  const auto t = TemplateSet::load(dir.path());
  EXPECT_EQ(t.get("guided"), "Check: {frame}\n{question}\n{answer_format}");
  EXPECT_EQ(t.get("panel"), TemplateSet::defaults().get("panel"));
}

TEST(Templates, MissingPlaceholderRejected) {
  TempDir dir;
  spit(dir / "panel.txt", "{question} {frame_1} {answer_format}");
  try {
    TemplateSet::load(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("frame_2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(TemplateSet::load(dir / "nope"), Error);
}

TEST(Templates, UnknownIds) {
  auto t = TemplateSet::defaults();
  EXPECT_THROW(t.get("nope"), Error);
  EXPECT_THROW(t.set("nope", "x"), Error);
  t.set("framed", "{question}");
  EXPECT_THROW(t.validate(), Error);
}

}  // namespace
}  // namespace arbiter

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "elicit/catalog.hpp"
#include "elicit/error.hpp"
#include "elicit/prompts.hpp"
#include "support.hpp"

namespace elicit {
namespace {

using nlohmann::json;

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ParseError;
}

const std::string kSpeech = "I first check whether the clinic takes my insurance.";
const std::string kQuestion = "What EHR integration standard should the check-in use?";

std::vector<Turn> two_turns() {
  return {{0, Speaker::Interviewer, "How do you find an apartment?", {}, {}},
          {1, Speaker::Interviewee, "I mostly look on listing sites and filter by price first.", {}, {}}};
}

json minimal_entry(std::string id) {
  return {{"id", std::move(id)},
          {"category", "FOLLOW_UP"},
          {"name", "N"},
          {"mistake_statement", "M"},
          {"positive_reframing", "A good follow-up question should be kind"}};
}

TEST(Catalog, BuiltinShape) {
  const auto& c = builtin_catalog();
  ASSERT_EQ(c.size(), 14u);
  std::size_t follow = 0, shots = 0, steps = 0;
  for (const auto& m : c) {
    follow += m.category == CriterionCategory::FollowUp;
    shots += m.one_shot_example.has_value();
    steps += m.step_by_step.has_value();
    EXPECT_TRUE(negation_tokens(m.positive_reframing).empty()) << m.id;
    EXPECT_FALSE(has_lowercase_role_identifier(m.positive_reframing)) << m.id;
  }
  EXPECT_EQ(follow, 5u);
  EXPECT_EQ(c.size() - follow, 9u);
  EXPECT_EQ(shots, 4u);
  EXPECT_EQ(steps, 9u);
  EXPECT_TRUE(lint_builtin_invariants(c).empty());
}

TEST(Catalog, OneShotCarriers) {
  const auto& c = builtin_catalog();
  for (const char* id : {"ask-for-solutions", "no-clarification-when-contradictory", "ask-technical-question",
                         "ask-inappropriate-question"})
    EXPECT_TRUE(find_criterion(c, id).one_shot_example.has_value()) << id;
}

TEST(Catalog, DuplicateId) {
  json cfg{{"criteria", {minimal_entry("a"), minimal_entry("a")}}};
  EXPECT_EQ(code_of([&] { (void)load_catalog(cfg.dump()); }), ErrorCode::DuplicateId);
}

TEST(Catalog, EmptyMistakeStatement) {
  auto e = minimal_entry("a");
  e["mistake_statement"] = "";
  json cfg{{"criteria", {e}}};
  EXPECT_EQ(code_of([&] { (void)load_catalog(cfg.dump()); }), ErrorCode::MissingField);
}

TEST(Catalog, UnknownCategory) {
  auto e = minimal_entry("a");
  e["category"] = "OTHER";
  json cfg{{"criteria", {e}}};
  EXPECT_EQ(code_of([&] { (void)load_catalog(cfg.dump()); }), ErrorCode::UnknownCategory);
}

TEST(Catalog, BuiltinSourceReloads) {
  EXPECT_EQ(load_catalog(builtin_catalog_source()), builtin_catalog());
}

TEST(Catalog, NegationTokens) {
  EXPECT_EQ(negation_tokens("Do not avoid it").size(), 2u);
  EXPECT_TRUE(negation_tokens("Nothing notable").empty());
  EXPECT_FALSE(negation_tokens("You FAIL TO see").empty());
  EXPECT_TRUE(has_lowercase_role_identifier("the interviewee said"));
  EXPECT_FALSE(has_lowercase_role_identifier("the INTERVIEWEE said"));
}

TEST(Catalog, LintFlagsBrokenCatalog) {
  auto c = builtin_catalog();
  c.pop_back();
  c[0].positive_reframing = "A good follow-up question should not ramble";
  EXPECT_GE(lint_builtin_invariants(c).size(), 2u);
}

TEST(Template, FillIsSinglePass) {
  EXPECT_EQ(fill_template("{a}-{b}", {{"a", "{b}"}, {"b", "x"}}), "{b}-x");
  EXPECT_EQ(code_of([] { (void)fill_template("{a}{c}", {{"a", "1"}}); }), ErrorCode::UnfilledPlaceholder);
  EXPECT_EQ(placeholder_names("{x} {y} {x}"), (std::vector<std::string>{"x", "y"}));
}

class Golden : public ::testing::Test {
 protected:
  PromptRenderer renderer;
  const Catalog& catalog = builtin_catalog();
  std::string golden(const std::string& name) { return testing::read(testing::golden("prompts/" + name)); }
};

TEST_F(Golden, Minimal) {
  const auto turns = two_turns();
  const auto p = renderer.minimal(DomainRegistry::builtin().find("apartment"), turns);
  EXPECT_EQ(p.text, golden("minimal.txt"));
  EXPECT_TRUE(p.text.starts_with("You are an AI agent capable of generating context summaries."));
  EXPECT_TRUE(p.text.ends_with("without explanation."));
}

TEST_F(Golden, Classification) {
  for (const char* id : {"ask-for-solutions", "no-clarification-when-contradictory", "use-jargon"}) {
    const auto p = renderer.classification("clinic", kSpeech, kQuestion, find_criterion(catalog, id));
    EXPECT_EQ(p.text, golden(std::string("classification_") + id + ".txt")) << id;
  }
}

TEST_F(Golden, ClassificationGuidanceBlocks) {
  const auto sol = renderer.classification("clinic", kSpeech, kQuestion, find_criterion(catalog, "ask-for-solutions"));
  EXPECT_NE(sol.text.find("For example, it's inappropriate to ask users about how to design a specific feature"),
            std::string::npos);
  const auto con = renderer.classification("clinic", kSpeech, kQuestion,
                                           find_criterion(catalog, "no-clarification-when-contradictory"));
  EXPECT_NE(con.text.find("first consider if the INTERVIEWEE mentioned anything contradictory"), std::string::npos);
  const auto& jargon = find_criterion(catalog, "use-jargon");
  EXPECT_TRUE(criterion_guidance(jargon).empty());
  const auto bare = renderer.classification("clinic", kSpeech, kQuestion, jargon);
  EXPECT_NE(bare.text.find("Standard: " + jargon.positive_reframing + ". Please classify"), std::string::npos);
}

TEST_F(Golden, Guided) {
  const auto& c = find_criterion(catalog, "use-jargon");
  const auto p = renderer.guided("clinic", kSpeech, c);
  EXPECT_EQ(p.text, golden("guided_use-jargon.txt"));
  EXPECT_TRUE(p.text.ends_with("Criterion: " + c.positive_reframing));
}

TEST_F(Golden, MultiAvoid) {
  const auto p = renderer.multi_avoid("clinic", kSpeech, catalog);
  EXPECT_EQ(p.text, golden("multi_avoid.txt"));
  for (int i = 1; i <= 14; ++i)
    EXPECT_NE(p.text.find("\n" + std::to_string(i) + ". "), std::string::npos) << i;
}

TEST_F(Golden, SingleCriterionMultiMatchesGuided) {
  const auto& c = find_criterion(catalog, "use-jargon");
  const std::vector<MistakeCriterion> one{c};
  const auto multi = renderer.multi_avoid("clinic", kSpeech, one);
  EXPECT_NE(multi.text.find("1. " + c.positive_reframing), std::string::npos);
  EXPECT_NE(renderer.guided("clinic", kSpeech, c).text.find(c.positive_reframing), std::string::npos);
}

TEST_F(Golden, Errors) {
  const auto& c = catalog.front();
  EXPECT_EQ(code_of([&] { (void)renderer.minimal(DomainRegistry::builtin().find("apartment"), {}); }),
            ErrorCode::EmptyContext);
  EXPECT_EQ(code_of([&] { (void)renderer.guided("clinic", "  ", c); }), ErrorCode::EmptyField);
  EXPECT_EQ(code_of([&] { (void)renderer.classification("clinic", kSpeech, "", c); }), ErrorCode::EmptyField);
  EXPECT_EQ(code_of([&] { (void)renderer.multi_avoid("clinic", kSpeech, {}); }), ErrorCode::EmptyCatalog);
}

TEST_F(Golden, NoResidualPlaceholdersAndPure) {
  const auto turns = two_turns();
  for (const auto& c : catalog) {
    const auto a = renderer.classification("trail", kSpeech, kQuestion, c).text;
    const auto b = renderer.guided("trail", kSpeech, c).text;
    EXPECT_EQ(a.find('{'), std::string::npos) << c.id;
    EXPECT_EQ(b.find('{'), std::string::npos) << c.id;
    EXPECT_EQ(a, renderer.classification("trail", kSpeech, kQuestion, c).text);
  }
  EXPECT_EQ(renderer.multi_avoid("trail", kSpeech, catalog).text.find('{'), std::string::npos);
  EXPECT_EQ(renderer.minimal(DomainRegistry::builtin().find("trail"), turns).text.find('{'), std::string::npos);
}

TEST(Templates, LoadFromDirectory) {
  const auto t = PromptTemplates::load(testing::source_dir() / "resources" / "templates");
  EXPECT_EQ(t.minimal, PromptTemplates::builtin().minimal);
  EXPECT_EQ(t.multi_avoid, PromptTemplates::builtin().multi_avoid);
}

TEST(Templates, RenderTurns) {
  const auto turns = two_turns();
  EXPECT_EQ(render_turns(turns),
            "INTERVIEWER: How do you find an apartment?\n"
            "INTERVIEWEE: I mostly look on listing sites and filter by price first.");
}

}  // namespace
}  // namespace elicit

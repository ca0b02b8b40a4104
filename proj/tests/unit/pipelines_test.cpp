#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "elicit/error.hpp"
#include "elicit/pipelines.hpp"
#include "elicit/random.hpp"
#include "support.hpp"

namespace elicit {
namespace {

using testing::ScriptedGateway;

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

class Pipelines : public ::testing::Test {
 protected:
  const Catalog& catalog = builtin_catalog();
  PromptRenderer renderer;
  DomainRegistry domains = DomainRegistry::builtin();
  std::vector<QuestionRecord> pairs =
      parse_corpus(testing::read(testing::fixture("classification/pairs.tsv")));

  PipelineContext ctx(ChatGateway& gw, std::size_t parallel = 1) {
    PipelineOptions o;
    o.parallelism = parallel;
    return {gw, catalog, renderer, domains, o};
  }
  static ReplayGateway replay(const std::string& name) {
    return ReplayGateway(std::make_shared<Recording>(
        Recording::load(testing::fixture("replay/" + name + ".jsonl"))));
  }
  std::vector<ClassificationCell> human() const {
    return parse_cells(testing::read(testing::fixture("classification/human_labels.tsv")), Rater::HumanAnalyst);
  }
};

TEST_F(Pipelines, TagFormat) {
  EXPECT_EQ(make_tag("classify", "r001", std::string_view("use-jargon"), 0), "classify:r001:use-jargon:0");
  EXPECT_EQ(make_tag("minimal", "r001", std::nullopt, 2), "minimal:r001:-:2");
}

TEST_F(Pipelines, MinimalFromReplay) {
  auto gw = replay("minimal");
  const auto out = run_minimal_generation(pairs, ctx(gw));
  EXPECT_TRUE(out.residue.empty());
  ASSERT_EQ(out.items.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(out.items[i].source, QuestionSource::Model);
    EXPECT_EQ(out.items[i].id, pairs[i].id);
    EXPECT_TRUE(out.items[i].question.ends_with("?"));
  }
  std::vector<QuestionRecord> twenty(pairs.begin(), pairs.begin() + 20);
  const auto a = run_minimal_generation(twenty, ctx(gw));
  const auto b = run_minimal_generation(twenty, ctx(gw, 4));
  EXPECT_EQ(a.items.size(), 20u);
  EXPECT_EQ(a.items, b.items);
}

TEST_F(Pipelines, MinimalEmptyAndMissingTag) {
  auto gw = replay("minimal");
  EXPECT_TRUE(run_minimal_generation({}, ctx(gw)).items.empty());

  auto rec = std::make_shared<Recording>(Recording::load(testing::fixture("replay/minimal.jsonl")));
  Recording trimmed;
  for (std::size_t i = 1; i <= 20; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "r%03zu", i);
    if (i == 7) continue;
    trimmed.put(*rec->find(make_tag("minimal", id, std::nullopt, 0)));
  }
  ReplayGateway partial(std::make_shared<Recording>(trimmed));
  std::vector<QuestionRecord> twenty(pairs.begin(), pairs.begin() + 20);
  const auto out = run_minimal_generation(twenty, ctx(partial));
  EXPECT_EQ(out.items.size(), 19u);
  ASSERT_EQ(out.residue.size(), 1u);
  EXPECT_EQ(out.residue[0].record_id, "r007");
  EXPECT_EQ(out.residue[0].code, ErrorCode::ReplayMiss);
}

TEST_F(Pipelines, ClassificationFixtureReport) {
  auto gw = replay("classify");
  const auto model = run_classification_matrix(pairs, ctx(gw));
  ASSERT_TRUE(model.residue.empty());
  ASSERT_EQ(model.items.size(), 420u);
  EXPECT_TRUE(std::is_sorted(model.items.begin(), model.items.end(), [](const auto& a, const auto& b) {
    return std::tie(a.record_id, a.criterion_id) < std::tie(b.record_id, b.criterion_id);
  }));
  const auto r = agreement_report(model.items, human(), catalog);
  EXPECT_EQ(r.agreements, 340u);
  EXPECT_EQ(r.cells, 420u);
  EXPECT_EQ(r.total_agreement, Rational(340, 420));
  EXPECT_EQ(r.total_agreement.percent(), "81.0%");
  EXPECT_EQ(r.human_total, 177u);
  EXPECT_EQ(r.model_total, 163u);
  const auto& alt = r.per_criterion[1];
  EXPECT_EQ(alt.criterion_id, "fail-consider-alternatives");
  EXPECT_EQ(alt.human_count, 30u);
  EXPECT_EQ(alt.model_count, 28u);
  EXPECT_EQ(alt.agreement_rate.percent(), "93.3%");
}

TEST_F(Pipelines, InversionProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::string, bool> verdicts;
    ScriptedGateway gw([&](const ChatRequest& r) {
      return verdicts.at(r.tag) ? std::string("Yes") : std::string("no.");
    });
    std::vector<QuestionRecord> some(pairs.begin(), pairs.begin() + 3);
    for (const auto& p : some)
      for (const auto& c : catalog) verdicts[make_tag("classify", p.id, c.id, 0)] = rng.coin();
    const auto out = run_classification_matrix(some, ctx(gw));
    ASSERT_EQ(out.items.size(), 42u);
    for (const auto& cell : out.items)
      EXPECT_EQ(cell.demonstrates_mistake, !verdicts.at(make_tag("classify", cell.record_id, cell.criterion_id, 0)));
  }
}

TEST_F(Pipelines, SingleYesMeansAvoided) {
  ScriptedGateway gw([](const ChatRequest&) { return std::string("Yes"); });
  const Catalog one{catalog.front()};
  PipelineContext c{gw, one, renderer, domains, {}};
  const auto out = run_classification_matrix(std::span(pairs).first(1), c);
  ASSERT_EQ(out.items.size(), 1u);
  EXPECT_FALSE(out.items[0].demonstrates_mistake);
  EXPECT_EQ(out.items[0].rater, Rater::Model);
}

TEST_F(Pipelines, AmbiguousVerdictBecomesResidue) {
  const auto bad = make_tag("classify", "r005", std::string_view("use-jargon"), 0);
  ScriptedGateway gw([&](const ChatRequest& r) { return r.tag == bad ? std::string("maybe") : std::string("No"); });
  const auto out = run_classification_matrix(pairs, ctx(gw, 3));
  EXPECT_EQ(out.items.size(), 419u);
  ASSERT_EQ(out.residue.size(), 1u);
  EXPECT_EQ(out.residue[0].code, ErrorCode::AmbiguousVerdict);
  EXPECT_EQ(out.residue[0].tag, bad);
  EXPECT_EQ(out.items.size() + out.residue.size(), pairs.size() * catalog.size());
}

TEST_F(Pipelines, AgreementSymmetricAndIdentity) {
  auto gw = replay("classify");
  const auto model = run_classification_matrix(pairs, ctx(gw)).items;
  const auto h = human();
  const auto ab = agreement_report(model, h, catalog);
  const auto ba = agreement_report(h, model, catalog);
  EXPECT_EQ(ab.total_agreement, ba.total_agreement);
  for (std::size_t i = 0; i < ab.per_criterion.size(); ++i)
    EXPECT_EQ(ab.per_criterion[i].agreement_rate, ba.per_criterion[i].agreement_rate);
  const auto same = agreement_report(h, h, catalog);
  EXPECT_EQ(same.total_agreement, Rational(1));
  EXPECT_EQ(to_json(ab).dump(), to_json(agreement_report(model, h, catalog)).dump());
}

TEST_F(Pipelines, AgreementKeyMismatch) {
  auto h = human();
  auto fewer = h;
  fewer.pop_back();
  EXPECT_EQ(code_of([&] { (void)agreement_report(h, fewer, catalog); }), ErrorCode::KeyMismatch);
  auto dup = h;
  dup.back() = dup.front();
  EXPECT_EQ(code_of([&] { (void)agreement_report(h, dup, catalog); }), ErrorCode::KeyMismatch);
}

TEST_F(Pipelines, IntersectMatchesFlagFixture) {
  auto gw = replay("classify");
  const auto model = run_classification_matrix(pairs, ctx(gw)).items;
  const auto flags = intersect_flags(model, human());
  EXPECT_EQ(flags, parse_flags(testing::read(testing::fixture("guided/flags.tsv"))));
  EXPECT_EQ(flags.size(), 130u);
}

TEST_F(Pipelines, GuidedGeneration) {
  auto gw = replay("guided");
  const auto flags = parse_flags(testing::read(testing::fixture("guided/flags.tsv")));
  const auto out = run_guided_generation(pairs, flags, ctx(gw));
  EXPECT_TRUE(out.residue.empty());
  ASSERT_EQ(out.items.size(), flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    EXPECT_EQ(out.items[i].criterion_id, flags[i].criterion_id);
    EXPECT_EQ(out.items[i].source, QuestionSource::Model);
  }
  EXPECT_TRUE(run_guided_generation(pairs, {}, ctx(gw)).items.empty());
}

TEST_F(Pipelines, GuidedRejectsBadFlagsBeforeCalling) {
  ScriptedGateway gw([](const ChatRequest&) { return std::string("Why?"); });
  std::vector<FlagKey> dup{{"r001", "use-jargon"}, {"r001", "use-jargon"}};
  EXPECT_EQ(code_of([&] { (void)run_guided_generation(pairs, dup, ctx(gw)); }), ErrorCode::DuplicateFlag);
  std::vector<FlagKey> unknown{{"r999", "use-jargon"}};
  EXPECT_EQ(code_of([&] { (void)run_guided_generation(pairs, unknown, ctx(gw)); }), ErrorCode::KeyMismatch);
  std::vector<FlagKey> crit{{"r001", "be-rude"}};
  EXPECT_EQ(code_of([&] { (void)run_guided_generation(pairs, crit, ctx(gw)); }), ErrorCode::UnknownCriterion);
  EXPECT_TRUE(gw.tags().empty());
}

TEST_F(Pipelines, MultiAvoidanceFixture) {
  auto gw = replay("multi");
  const auto out = run_multi_avoidance(pairs, ctx(gw));
  EXPECT_TRUE(out.residue.empty());
  EXPECT_EQ(out.questions.size(), 30u);
  EXPECT_EQ(out.cells.size(), 420u);
  const auto r = avoidance_report(out.cells, out.questions.size(), catalog);
  EXPECT_EQ(r.demonstrations, 66u);
  EXPECT_EQ(r.questions_avoiding_all, 1u);
  EXPECT_EQ(r.questions_avoiding_at_least.at(11), 28u);
  for (const auto& row : r.per_criterion) {
    if (row.criterion_id == "use-jargon") EXPECT_EQ(row.avoidance_rate.percent(), "100.0%");
    if (row.criterion_id == "fail-consider-alternatives") EXPECT_EQ(row.avoidance_rate.percent(), "26.7%");
  }
}

TEST_F(Pipelines, MultiAllYesAvoidsEverything) {
  ScriptedGateway gw([](const ChatRequest& r) {
    return r.tag.starts_with("multi:") ? std::string("What do you check first?") : std::string("Yes");
  });
  const auto out = run_multi_avoidance(std::span(pairs).first(1), ctx(gw));
  const auto r = avoidance_report(out.cells, 1, catalog);
  EXPECT_EQ(r.overall_avoidance, Rational(14, 14));
  EXPECT_EQ(r.questions_avoiding_all, 1u);
  // self-classification sees the generated question, not the human one
  for (const auto& p : gw.prompts())
    if (p.find("Then the INTERVIEWER asked") != std::string::npos)
      EXPECT_NE(p.find("What do you check first?"), std::string::npos);
  EXPECT_EQ(code_of([&] { (void)run_multi_avoidance({}, ctx(gw)); }), ErrorCode::EmptyInput);
}

TEST_F(Pipelines, AvoidanceAllDemonstrate) {
  std::vector<ClassificationCell> cells;
  for (int q = 0; q < 3; ++q)
    for (const auto& c : catalog) cells.push_back({"q" + std::to_string(q), c.id, Rater::Model, true});
  const auto r = avoidance_report(cells, 3, catalog);
  for (const auto& row : r.per_criterion) EXPECT_EQ(row.avoidance_rate, Rational(0));
  EXPECT_EQ(r.overall_avoidance, Rational(0));
  cells.pop_back();
  EXPECT_EQ(code_of([&] { (void)avoidance_report(cells, 3, catalog); }), ErrorCode::IncompleteMatrix);
}

TEST_F(Pipelines, FileFormatsRoundTrip) {
  EXPECT_EQ(parse_corpus(format_corpus(pairs)), pairs);
  const auto h = human();
  EXPECT_EQ(parse_cells(format_cells(h), Rater::Model), h);
  const auto flags = parse_flags(testing::read(testing::fixture("guided/flags.tsv")));
  EXPECT_EQ(parse_flags(format_flags(flags)), flags);
  const auto qs = parse_question_records(testing::read(testing::fixture("study3/questions.jsonl")));
  EXPECT_EQ(parse_question_records(format_question_records(qs)), qs);
}

TEST_F(Pipelines, CorpusNumbersMissingIds) {
  const auto recs = parse_corpus(
      "session_id\tinterviewee_speech\tinterviewer_question\tdomain_keyword\n"
      "t1\tI walk.\tWhy?\ttrail\n"
      "t1\tI run.\tWhere?\ttrail\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].id, "r001");
  EXPECT_EQ(recs[1].id, "r002");
}

}  // namespace
}  // namespace elicit

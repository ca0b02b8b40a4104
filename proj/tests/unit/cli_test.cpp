#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "elicit/cli.hpp"
#include "elicit/gateway.hpp"
#include "elicit/pipelines.hpp"
#include "elicit/stats/models.hpp"
#include "support.hpp"

namespace elicit {
namespace {

using nlohmann::json;
using testing::fixture;
using testing::run_cli;

const std::string kPairs = fixture("classification/pairs.tsv").string();
const std::string kLabels = fixture("classification/human_labels.tsv").string();

TEST(Cli, ClassifyReportsAgreement) {
  const auto r = run_cli({"classify", "--pairs", kPairs, "--labels", kLabels, "--replay",
                          fixture("replay/classify.jsonl").string()});
  EXPECT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("agreement: 340/420 = 81.0%"), std::string::npos) << r.out;

  const auto j = run_cli({"classify", "--pairs", kPairs, "--labels", kLabels, "--replay",
                          fixture("replay/classify.jsonl").string(), "--format", "json"});
  ASSERT_EQ(j.status, cli::kOk);
  const auto doc = json::parse(j.out);
  EXPECT_EQ(doc["agreement"]["per_criterion"].size(), 14u);
}

TEST(Cli, StatsTurns) {
  const auto r = run_cli({"stats", "turns", "--annotations", fixture("context/annotations.tsv").string(),
                          "--format", "json"});
  ASSERT_EQ(r.status, cli::kOk) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["total"], 146);
  EXPECT_EQ(doc["by_required_turns"]["0"], 71);
}

TEST(Cli, EmptyCorpusWarnsAndSucceeds) {
  const auto dir = testing::scratch_dir("cli-empty");
  io::write_file(dir / "empty.tsv", "session_id\tinterviewee_speech\tinterviewer_question\tdomain_keyword\n");
  const auto r = run_cli({"generate", "minimal", "--pairs", (dir / "empty.tsv").string(), "--replay",
                          fixture("replay/minimal.jsonl").string()});
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("warning"), std::string::npos) << r.err;
}

TEST(Cli, PartialAndTotalFailure) {
  const auto dir = testing::scratch_dir("cli-partial");
  auto rec = Recording::load(fixture("replay/minimal.jsonl"));
  Recording trimmed;
  for (const char* id : {"r001", "r002", "r003"}) trimmed.put(*rec.find(make_tag("minimal", id, std::nullopt, 0)));
  io::write_file(dir / "rec.jsonl", trimmed.format());
  const auto r = run_cli({"generate", "minimal", "--pairs", kPairs, "--replay", (dir / "rec.jsonl").string(),
                          "--residue", (dir / "residue.json").string()});
  EXPECT_EQ(r.status, cli::kPartial);
  EXPECT_NE(r.err.find("ReplayMiss"), std::string::npos);
  EXPECT_EQ(json::parse(io::read_file(dir / "residue.json")).size(), 27u);

  io::write_file(dir / "none.jsonl", "");
  const auto none = run_cli({"generate", "minimal", "--pairs", kPairs, "--replay", (dir / "none.jsonl").string()});
  EXPECT_EQ(none.status, cli::kError);
}

TEST(Cli, UsageAndErrors) {
  EXPECT_EQ(run_cli({}).status, cli::kUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).status, cli::kUsage);
  EXPECT_EQ(run_cli({"classify", "--pairs"}).status, cli::kUsage);
  EXPECT_EQ(run_cli({"classify", "--pairs", kPairs, "--labels", kLabels, "--format", "xml"}).status, cli::kUsage);
  const auto dir = testing::scratch_dir("cli-err");
  io::write_file(dir / "bad.tsv", "record_id\tnope\nx\ty\n");
  const auto r = run_cli({"stats", "turns", "--annotations", (dir / "bad.tsv").string()});
  EXPECT_EQ(r.status, cli::kError);
  EXPECT_TRUE(r.err.starts_with("error: ")) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, GenerateMultiReport) {
  const auto r = run_cli({"generate", "multi", "--pairs", kPairs, "--replay", fixture("replay/multi.jsonl").string()});
  ASSERT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("demonstrating cells: 66/420"), std::string::npos);
  EXPECT_NE(r.out.find("questions avoiding all 14: 1/30"), std::string::npos);
}

TEST(Cli, GenerateGuidedFromLabels) {
  const auto dir = testing::scratch_dir("cli-guided");
  const auto cls = run_cli({"classify", "--pairs", kPairs, "--labels", kLabels, "--replay",
                            fixture("replay/classify.jsonl").string(), "--cells-out", (dir / "model.tsv").string()});
  ASSERT_EQ(cls.status, cli::kOk) << cls.err;
  const auto r = run_cli({"generate", "guided", "--pairs", kPairs, "--labels", kLabels, "--model-labels",
                          (dir / "model.tsv").string(), "--replay", fixture("replay/guided.jsonl").string()});
  ASSERT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_EQ(parse_question_records(r.out).size(), 130u);
}

TEST(Cli, SurveyBuildIngestEvaluate) {
  const auto dir = testing::scratch_dir("cli-survey");
  const auto built = run_cli({"survey", "build", "study3", "--questions", fixture("study3/questions.jsonl").string(),
                              "--out-dir", (dir / "inst").string(), "--seed", "5"});
  ASSERT_EQ(built.status, cli::kOk) << built.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "inst" / "study3-s01.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "inst" / "keys" / "study3-s01.key.json"));
  EXPECT_EQ(testing::read(dir / "inst" / "study3-s32.json").find("MODEL"), std::string::npos);

  const auto rendering = json::parse(testing::read(dir / "inst" / "study3-s01.json"));
  std::string tsv = "respondent_id\tsurvey_id\tblock_id\titem\tvalue\n";
  for (const auto& b : rendering["blocks"]) {
    tsv += "p01\tstudy3-s01\t" + b["block_id"].get<std::string>() + "\tchoice\ta\n";
    for (const auto& it : b["items"]) tsv += "p01\tstudy3-s01\t" + b["block_id"].get<std::string>() + "\t" +
                                             it["item"].get<std::string>() + "\t3\n";
  }
  io::write_file(dir / "responses.tsv", tsv);
  const auto ing = run_cli({"survey", "ingest", "--instruments", (dir / "inst").string(), "--responses",
                            (dir / "responses.tsv").string(), "--ratings-out", (dir / "ratings.tsv").string(),
                            "--comparisons-out", (dir / "comparisons.tsv").string()});
  ASSERT_EQ(ing.status, cli::kOk) << ing.err;
  EXPECT_EQ(stats::parse_comparisons(testing::read(dir / "comparisons.tsv")).size(), 4u);
  EXPECT_EQ(stats::parse_ratings(testing::read(dir / "ratings.tsv")).size(), 24u);

  const auto order = run_cli({"survey", "order", "--instrument", (dir / "inst" / "study3-s01.json").string(),
                              "--respondent", "p01"});
  EXPECT_EQ(order.status, cli::kOk) << order.err;
}

TEST(Cli, EvaluateStudy3) {
  const auto r = run_cli({"evaluate", "--study", "study3", "--ratings", fixture("study3/ratings.tsv").string(),
                          "--comparisons", fixture("study3/comparisons.tsv").string()});
  ASSERT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("64 per group"), std::string::npos);
  EXPECT_NE(r.out.find("59.4%"), std::string::npos);
  EXPECT_NE(r.out.find("MODEL chosen 87, HUMAN chosen 41"), std::string::npos);
}

TEST(Cli, EvaluateStudy1) {
  const auto r = run_cli({"evaluate", "--study", "study1", "--ratings", fixture("study1/ratings.tsv").string(),
                          "--format", "json"});
  ASSERT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_NO_THROW((void)json::parse(r.out));
}

TEST(Cli, IngestAndAnnotate) {
  const auto dir = testing::scratch_dir("cli-ingest");
  const auto ing = run_cli({"ingest", "--transcripts", fixture("context/transcripts").string(), "--domain",
                            "apartment", "--store", (dir / "store").string()});
  ASSERT_EQ(ing.status, cli::kOk) << ing.err;
  const auto ann = run_cli({"annotate", "--annotations", fixture("context/annotations.tsv").string(),
                            "--transcripts-dir", fixture("context/transcripts").string()});
  ASSERT_EQ(ann.status, cli::kOk) << ann.err;
  EXPECT_EQ(parse_annotations(ann.out).size(), 146u);
  EXPECT_NE(ann.err.find("validated 146"), std::string::npos) << ann.err;
}

}  // namespace
}  // namespace elicit

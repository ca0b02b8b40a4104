#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "elicit/catalog.hpp"
#include "elicit/core_model.hpp"
#include "elicit/pipelines.hpp"
#include "elicit/stats/models.hpp"

namespace elicit::survey {

using stats::Dimension;
using stats::Source;

enum class Study { Study1, Study3 };
std::string_view to_string(Study s) noexcept;
Study parse_study(std::string_view token);

struct Scale {
  Dimension dimension = Dimension::Relevancy;
  std::string prompt;
  std::vector<std::string> labels;  // least to greatest; size is the scale size

  [[nodiscard]] int size() const noexcept { return static_cast<int>(labels.size()); }
};

/// Relevancy, clarity and informativeness scales with 6 or 5 labels.
/// Throws InvalidParameter for any other size.
const std::vector<Scale>& scale_set(int size);

struct SurveyBlock {
  std::string block_id;
  std::string item_id;  // question record id
  std::string domain_sentence;
  std::vector<Turn> context;
  std::string question;
  Source hidden_source = Source::Model;
  std::vector<Scale> scales;
};

struct PairBlock {
  std::string block_id;
  std::string pair_id;
  std::string domain_keyword;
  std::string interviewee_speech;
  MistakeCriterion criterion;
  std::string question_a;
  std::string question_b;
  std::array<Source, 2> hidden_assignment{Source::Model, Source::Human};  // slot a, slot b
  std::vector<Scale> scales;
};

struct SurveyInstrument {
  std::string survey_id;
  Study study = Study::Study1;
  std::uint64_t seed = 0;
  std::vector<SurveyBlock> blocks;  // Study 1
  std::vector<PairBlock> pairs;     // Study 3

  [[nodiscard]] std::size_t size() const noexcept { return blocks.size() + pairs.size(); }
};

/// Two 10-block surveys per source group. Throws CountMismatch unless each
/// side has exactly 20 records, EmptyContext when a record has no context.
std::vector<SurveyInstrument> build_study1(std::span<const QuestionRecord> model_questions,
                                           std::span<const QuestionRecord> human_questions,
                                           const DomainRegistry& domains, std::uint64_t seed);

/// Pairs MODEL and HUMAN_ANALYST records sharing (id, criterion_id) and deals
/// them into 32 surveys of 4. Throws MissingCounterpart, DuplicateId,
/// CountMismatch or UnknownCriterion.
std::vector<SurveyInstrument> build_study3(std::span<const QuestionRecord> records,
                                           const Catalog& catalog, std::uint64_t seed);

/// Per-respondent block order, a pure function of its arguments.
std::vector<std::size_t> presentation_order(std::string_view survey_id,
                                            std::string_view respondent_id, std::uint64_t seed,
                                            std::size_t blocks);

/// Respondent-facing rendering. Carries no provenance.
nlohmann::json render(const SurveyInstrument& instrument);
/// Sealed key mapping blocks to sources.
nlohmann::json answer_key(const SurveyInstrument& instrument);
/// Rebuilds an instrument from its rendering and key. Throws KeyMismatch or ParseError.
SurveyInstrument load_instrument(const nlohmann::json& rendering, const nlohmann::json& key,
                                 const Catalog& catalog);

/// Source tokens found in the text (whole words MODEL, HUMAN, GPT, any case).
std::vector<std::string> blinding_violations(std::string_view text);

struct ResponseRow {
  std::string respondent_id;
  std::string survey_id;
  std::string block_id;
  std::string item;  // relevancy | clarity | informativeness | choice | a.<dim> | b.<dim>
  std::string value;
};

std::vector<ResponseRow> parse_responses(std::string_view tsv);
std::string format_responses(std::span<const ResponseRow> rows);

struct Ingested {
  std::vector<stats::RatingRecord> ratings;
  std::vector<stats::PairedComparison> comparisons;
};

/// De-blinds responses. Throws UnknownBlock, OutOfScaleScore, DuplicateResponse
/// or ParseError.
Ingested ingest_responses(std::span<const ResponseRow> rows,
                          std::span<const SurveyInstrument> instruments);

}  // namespace elicit::survey

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "elicit/catalog.hpp"
#include "elicit/core_model.hpp"
#include "elicit/error.hpp"
#include "elicit/gateway.hpp"
#include "elicit/prompts.hpp"
#include "elicit/rational.hpp"

namespace elicit {

enum class QuestionSource { HumanInterviewer, HumanAnalyst, Model };

std::string_view to_string(QuestionSource s) noexcept;
QuestionSource parse_question_source(std::string_view token);

struct QuestionRecord {
  std::string id;
  std::string session_id;
  std::string domain_keyword;
  std::vector<Turn> context;
  std::string interviewee_speech;
  std::string question;
  QuestionSource source = QuestionSource::HumanInterviewer;
  std::optional<std::string> criterion_id;

  friend bool operator==(const QuestionRecord&, const QuestionRecord&) = default;
};

enum class Rater { HumanAnalyst, Model };

std::string_view to_string(Rater r) noexcept;
Rater parse_rater(std::string_view token);

struct ClassificationCell {
  std::string record_id;
  std::string criterion_id;
  Rater rater = Rater::Model;
  bool demonstrates_mistake = false;

  friend bool operator==(const ClassificationCell&, const ClassificationCell&) = default;
};

struct FlagKey {
  std::string record_id;
  std::string criterion_id;

  friend auto operator<=>(const FlagKey&, const FlagKey&) = default;
};

/// A batch item that failed (gateway error or non-conforming output). Never imputed.
struct ResidueEntry {
  std::string tag;
  std::string record_id;
  std::optional<std::string> criterion_id;
  ErrorCode code = ErrorCode::TransportError;
  std::string message;
};

template <class T>
struct BatchResult {
  std::vector<T> items;
  std::vector<ResidueEntry> residue;
};

struct PipelineOptions {
  std::string model_id{kDefaultModelId};
  double temperature = kDefaultTemperature;
  std::size_t parallelism = 1;  // concurrent gateway calls
  int attempt = 0;              // part of every replay tag
  bool lenient_questions = false;
};

/// "<kind>:<record>:<criterion or ->:<attempt>".
std::string make_tag(std::string_view kind, std::string_view record_id,
                     std::optional<std::string_view> criterion_id, int attempt);

/// Bundles what every pipeline needs.
struct PipelineContext {
  ChatGateway& gateway;
  const Catalog& catalog;
  const PromptRenderer& renderer;
  const DomainRegistry& domains;
  PipelineOptions options;
};

[[nodiscard]] BatchResult<QuestionRecord> run_minimal_generation(
    std::span<const QuestionRecord> records, const PipelineContext& ctx);

/// |pairs| x |catalog| cells with demonstrates_mistake = !verdict; items sorted
/// by (record id, criterion id). `tag_kind` distinguishes self-classification.
[[nodiscard]] BatchResult<ClassificationCell> run_classification_matrix(
    std::span<const QuestionRecord> pairs, const PipelineContext& ctx,
    std::string_view tag_kind = "classify");

struct CriterionAgreement {
  std::string criterion_id;
  std::string name;
  std::size_t human_count = 0;
  std::size_t model_count = 0;
  std::size_t agreements = 0;
  std::size_t cells = 0;
  Rational agreement_rate;
};

struct AgreementReport {
  std::vector<CriterionAgreement> per_criterion;  // catalog order
  std::size_t human_total = 0;
  std::size_t model_total = 0;
  std::size_t agreements = 0;
  std::size_t cells = 0;
  Rational total_agreement;
};

/// Throws KeyMismatch when the two cell sets cover different (record, criterion)
/// keys or either contains a duplicate key.
[[nodiscard]] AgreementReport agreement_report(std::span<const ClassificationCell> model_cells,
                                               std::span<const ClassificationCell> human_cells,
                                               const Catalog& catalog);

/// Keys where both raters say the mistake is demonstrated, sorted.
[[nodiscard]] std::vector<FlagKey> intersect_flags(std::span<const ClassificationCell> model_cells,
                                                   std::span<const ClassificationCell> human_cells);

/// One MODEL question per flag via the guided prompt. Throws DuplicateFlag,
/// KeyMismatch (unknown record) or UnknownCriterion before any gateway call.
[[nodiscard]] BatchResult<QuestionRecord> run_guided_generation(
    std::span<const QuestionRecord> pairs, std::span<const FlagKey> flagged,
    const PipelineContext& ctx);

struct MultiAvoidanceResult {
  std::vector<QuestionRecord> questions;
  std::vector<ClassificationCell> cells;
  std::vector<ResidueEntry> residue;
};

/// One multi-avoid question per pair, then self-classification of each
/// generated question against every criterion. Throws EmptyInput.
[[nodiscard]] MultiAvoidanceResult run_multi_avoidance(std::span<const QuestionRecord> pairs,
                                                       const PipelineContext& ctx);

struct CriterionAvoidance {
  std::string criterion_id;
  std::string name;
  std::size_t demonstrations = 0;
  std::size_t questions = 0;
  Rational avoidance_rate;
};

struct AvoidanceReport {
  std::vector<CriterionAvoidance> per_criterion;  // catalog order
  std::size_t demonstrations = 0;
  std::size_t cells = 0;
  Rational overall_avoidance;
  std::size_t questions_avoiding_all = 0;
  std::map<std::size_t, std::size_t> questions_avoiding_at_least;  // threshold -> count
};

/// Throws IncompleteMatrix unless cells cover exactly question_count records
/// times every catalog criterion.
[[nodiscard]] AvoidanceReport avoidance_report(std::span<const ClassificationCell> cells,
                                               std::size_t question_count,
                                               const Catalog& catalog);

// --- file formats -----------------------------------------------------------------

/// Corpus TSV: [record_id,] session_id, interviewee_speech, interviewer_question,
/// domain_keyword. Missing record ids are numbered r001, r002, ...
[[nodiscard]] std::vector<QuestionRecord> parse_corpus(std::string_view tsv);
[[nodiscard]] std::string format_corpus(std::span<const QuestionRecord> records);

/// Label TSV: record_id, criterion_id, demonstrates_mistake [, rater].
[[nodiscard]] std::vector<ClassificationCell> parse_cells(std::string_view tsv,
                                                          Rater default_rater);
[[nodiscard]] std::string format_cells(std::span<const ClassificationCell> cells);

[[nodiscard]] std::vector<FlagKey> parse_flags(std::string_view tsv);
[[nodiscard]] std::string format_flags(std::span<const FlagKey> flags);

/// One JSON QuestionRecord per line.
[[nodiscard]] std::vector<QuestionRecord> parse_question_records(std::string_view jsonl);
[[nodiscard]] std::string format_question_records(std::span<const QuestionRecord> records);

nlohmann::json to_json(const AgreementReport& report);
nlohmann::json to_json(const AvoidanceReport& report);
nlohmann::json to_json(std::span<const ResidueEntry> residue);

/// Fixed-width table with the mistake-type rows, Human / Model counts,
/// agreement rate and (when given) avoidance rate, plus a Total row.
[[nodiscard]] std::string format_classification_table(const AgreementReport* agreement,
                                                      const AvoidanceReport* avoidance);

}  // namespace elicit

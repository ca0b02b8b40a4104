#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace elicit {

enum class Speaker { Interviewer, Interviewee };

/// Upper-case token ("INTERVIEWER" / "INTERVIEWEE"), the only serialized form.
std::string_view to_string(Speaker s) noexcept;
Speaker parse_speaker(std::string_view token);

/// How a suggested question was produced.
enum class GenerationMode { Minimal, Guided, MultiAvoid };

std::string_view to_string(GenerationMode m) noexcept;
GenerationMode parse_generation_mode(std::string_view token);

// Provenance of an interviewer turn that was accepted from a suggestion.
struct Provenance {
  std::string suggestion_id;
  GenerationMode mode = GenerationMode::MultiAvoid;
  std::optional<std::string> criterion_id;
  std::string original_text;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Turn {
  std::size_t index = 0;
  Speaker speaker = Speaker::Interviewee;
  std::string text;
  std::optional<std::string> timestamp;  // ISO-8601, kept verbatim
  std::optional<Provenance> accepted_from;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct InterviewDomain {
  std::string keyword;
  std::string seed_question;
  std::string description;  // one sentence, shown to survey respondents
  std::string activity;     // noun phrase, fills "conducts {interview domain}"

  friend bool operator==(const InterviewDomain&, const InterviewDomain&) = default;
};

class DomainRegistry {
 public:
  /// apartment, restaurant, trail, clinic.
  static DomainRegistry builtin();

  void add(InterviewDomain domain);
  [[nodiscard]] const InterviewDomain& find(std::string_view keyword) const;
  [[nodiscard]] bool contains(std::string_view keyword) const;
  [[nodiscard]] const std::vector<InterviewDomain>& all() const noexcept { return domains_; }

 private:
  std::vector<InterviewDomain> domains_;
};

enum class SessionStatus { Open, Closed };

std::string_view to_string(SessionStatus s) noexcept;
SessionStatus parse_session_status(std::string_view token);

/// An interview: ordered turns indexed 0..n-1 with no gaps.
class Session {
 public:
  Session() = default;
  Session(std::string id, InterviewDomain domain);

  /// Throws SessionClosed or EmptyText. Text is stored trimmed.
  const Turn& append(Speaker speaker, std::string_view text,
                     std::optional<std::string> timestamp = std::nullopt,
                     std::optional<Provenance> provenance = std::nullopt);
  void close() noexcept { status_ = SessionStatus::Closed; }

  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] const InterviewDomain& domain() const noexcept { return domain_; }
  [[nodiscard]] const std::vector<Turn>& turns() const noexcept { return turns_; }
  [[nodiscard]] SessionStatus status() const noexcept { return status_; }
  [[nodiscard]] std::size_t size() const noexcept { return turns_.size(); }

  /// Rebuilds a session from already-indexed turns; indices must be 0..n-1.
  static Session from_turns(std::string id, InterviewDomain domain, std::vector<Turn> turns,
                            SessionStatus status = SessionStatus::Open);

  friend bool operator==(const Session&, const Session&) = default;

 private:
  std::string id_;
  InterviewDomain domain_;
  std::vector<Turn> turns_;
  SessionStatus status_ = SessionStatus::Open;
};

/// Value-semantics append: returns a copy of the session with one more turn.
[[nodiscard]] Session append_turn(const Session& session, Speaker speaker, std::string_view text);

/// Up to k turns immediately preceding end_index, in order. Never includes
/// the turn at end_index. Throws IndexOutOfRange.
[[nodiscard]] std::vector<Turn> window(const Session& session, std::size_t end_index, std::size_t k);

/// Last min(k, size) turns of the session (context for the next question).
[[nodiscard]] std::vector<Turn> tail_window(const Session& session, std::size_t k);

enum class QuestionType {
  TopicChange,
  AnswerProbing,
  Confirmation,
  QuestionProbing,
  AlternativeSeeking,
  PreferenceSeeking,
  Clarification,
};

inline constexpr std::size_t kQuestionTypeCount = 7;

std::string_view to_string(QuestionType t) noexcept;
QuestionType parse_question_type(std::string_view token);
std::string_view definition(QuestionType t) noexcept;
std::span<const QuestionType> all_question_types() noexcept;

struct ContextAnnotation {
  std::string session_id;
  std::size_t question_turn_index = 0;
  std::size_t required_turns = 0;
  QuestionType question_type = QuestionType::TopicChange;

  friend bool operator==(const ContextAnnotation&, const ContextAnnotation&) = default;
};

/// Checks required_turns <= index, index in range, and that the turn is the
/// interviewer's. Throws InvalidAnnotation / IndexOutOfRange.
void validate_annotation(const Session& session, const ContextAnnotation& annotation);

struct TurnStats {
  std::map<std::size_t, std::size_t> by_required_turns;
  std::map<QuestionType, std::size_t> by_type;
  std::size_t total = 0;

  /// Number of annotations with required_turns <= k.
  [[nodiscard]] std::size_t at_most(std::size_t k) const;
};

/// Throws EmptyInput.
[[nodiscard]] TurnStats turn_stats(std::span<const ContextAnnotation> annotations);

// --- serialization -------------------------------------------------------

void to_json(nlohmann::json& j, const Turn& t);
void from_json(const nlohmann::json& j, Turn& t);
void to_json(nlohmann::json& j, const InterviewDomain& d);
void from_json(const nlohmann::json& j, InterviewDomain& d);
nlohmann::json session_to_json(const Session& s);
Session session_from_json(const nlohmann::json& j);

/// Transcript file: one JSON turn object per line.
[[nodiscard]] std::vector<Turn> parse_transcript(std::string_view jsonl);
[[nodiscard]] std::string format_transcript(std::span<const Turn> turns);

/// Annotation file: TSV with header session_id, question_turn_index,
/// required_turns, question_type.
[[nodiscard]] std::vector<ContextAnnotation> parse_annotations(std::string_view tsv);
[[nodiscard]] std::string format_annotations(std::span<const ContextAnnotation> annotations);

std::string trim(std::string_view text);

}  // namespace elicit

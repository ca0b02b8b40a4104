#include "elicit/core_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <nlohmann/json.hpp>

#include "elicit/error.hpp"
#include "elicit/io.hpp"

namespace elicit {

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = text.size();
  while (b < e && is_space(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string_view to_string(Speaker s) noexcept {
  return s == Speaker::Interviewer ? "INTERVIEWER" : "INTERVIEWEE";
}

Speaker parse_speaker(std::string_view token) {
  if (token == "INTERVIEWER") return Speaker::Interviewer;
  if (token == "INTERVIEWEE") return Speaker::Interviewee;
  throw Error(ErrorCode::ParseError, "unknown speaker '" + std::string(token) + "'");
}

std::string_view to_string(GenerationMode m) noexcept {
  switch (m) {
    case GenerationMode::Minimal: return "MINIMAL";
    case GenerationMode::Guided: return "GUIDED";
    case GenerationMode::MultiAvoid: return "MULTI_AVOID";
  }
  return "MULTI_AVOID";
}

GenerationMode parse_generation_mode(std::string_view token) {
  if (token == "MINIMAL") return GenerationMode::Minimal;
  if (token == "GUIDED") return GenerationMode::Guided;
  if (token == "MULTI_AVOID") return GenerationMode::MultiAvoid;
  throw Error(ErrorCode::ParseError, "unknown mode '" + std::string(token) + "'");
}

std::string_view to_string(SessionStatus s) noexcept {
  return s == SessionStatus::Open ? "OPEN" : "CLOSED";
}

SessionStatus parse_session_status(std::string_view token) {
  if (token == "OPEN") return SessionStatus::Open;
  if (token == "CLOSED") return SessionStatus::Closed;
  throw Error(ErrorCode::ParseError, "unknown session status '" + std::string(token) + "'");
}

// --- domains ---------------------------------------------------------------

DomainRegistry DomainRegistry::builtin() {
  DomainRegistry r;
  r.add({"apartment", "How do you find an apartment?",
         "This interview is about how people find an apartment to rent.", "apartment finding"});
  r.add({"restaurant", "How do you choose a restaurant to eat at?",
         "This interview is about how people choose a restaurant to eat at.",
         "restaurant finding"});
  r.add({"trail", "How do you plan a trail hike in a park?",
         "This interview is about how people plan a trail hike in a park.",
         "hiking trail finding"});
  r.add({"clinic", "How do you choose a clinic to visit when you get sick?",
         "This interview is about how people choose a clinic to visit when they get sick.",
         "clinic finding"});
  return r;
}

void DomainRegistry::add(InterviewDomain domain) {
  if (trim(domain.keyword).empty()) throw Error(ErrorCode::MissingField, "domain keyword is empty");
  if (contains(domain.keyword))
    throw Error(ErrorCode::DuplicateId, "domain '" + domain.keyword + "' already registered");
  domains_.push_back(std::move(domain));
}

bool DomainRegistry::contains(std::string_view keyword) const {
  return std::any_of(domains_.begin(), domains_.end(),
                     [&](const InterviewDomain& d) { return d.keyword == keyword; });
}

const InterviewDomain& DomainRegistry::find(std::string_view keyword) const {
  for (const auto& d : domains_)
    if (d.keyword == keyword) return d;
  throw Error(ErrorCode::UnknownDomain, "unknown domain '" + std::string(keyword) + "'");
}

// --- session -----------------------------------------------------------------

Session::Session(std::string id, InterviewDomain domain)
    : id_(std::move(id)), domain_(std::move(domain)) {}

const Turn& Session::append(Speaker speaker, std::string_view text,
                            std::optional<std::string> timestamp,
                            std::optional<Provenance> provenance) {
  if (status_ == SessionStatus::Closed)
    throw Error(ErrorCode::SessionClosed, "session '" + id_ + "' is closed");
  auto trimmed = trim(text);
  if (trimmed.empty()) throw Error(ErrorCode::EmptyText, "turn text is empty");
  turns_.push_back(Turn{turns_.size(), speaker, std::move(trimmed), std::move(timestamp),
                        std::move(provenance)});
  return turns_.back();
}

Session Session::from_turns(std::string id, InterviewDomain domain, std::vector<Turn> turns,
                            SessionStatus status) {
  Session s(std::move(id), std::move(domain));
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (turns[i].index != i)
      throw Error(ErrorCode::InvalidAnnotation,
                  "turn indices must be 0..n-1 without gaps; found " +
                      std::to_string(turns[i].index) + " at position " + std::to_string(i));
    if (trim(turns[i].text).empty())
      throw Error(ErrorCode::EmptyText, "turn " + std::to_string(i) + " has empty text");
  }
  s.turns_ = std::move(turns);
  s.status_ = status;
  return s;
}

Session append_turn(const Session& session, Speaker speaker, std::string_view text) {
  Session copy = session;
  copy.append(speaker, text);
  return copy;
}

std::vector<Turn> window(const Session& session, std::size_t end_index, std::size_t k) {
  if (end_index >= session.size())
    throw Error(ErrorCode::IndexOutOfRange, "end_index " + std::to_string(end_index) +
                                                " outside session of " +
                                                std::to_string(session.size()) + " turns");
  const std::size_t count = std::min(k, end_index);
  const auto& turns = session.turns();
  return {turns.begin() + static_cast<std::ptrdiff_t>(end_index - count),
          turns.begin() + static_cast<std::ptrdiff_t>(end_index)};
}

std::vector<Turn> tail_window(const Session& session, std::size_t k) {
  const auto& turns = session.turns();
  const std::size_t count = std::min(k, turns.size());
  return {turns.end() - static_cast<std::ptrdiff_t>(count), turns.end()};
}

// --- typology ------------------------------------------------------------------

namespace {

struct TypeInfo {
  QuestionType type;
  std::string_view token;
  std::string_view definition;
};

constexpr std::array<TypeInfo, kQuestionTypeCount> kTypes{{
    {QuestionType::TopicChange, "TOPIC_CHANGE",
     "The interviewer changes the conversation topic to a different and unrelated topic than "
     "the one represented by the prior turns."},
    {QuestionType::AnswerProbing, "ANSWER_PROBING",
     "The interviewer further probes a concept that the interviewee mentioned in their last "
     "turn."},
    {QuestionType::Confirmation, "CONFIRMATION",
     "The interviewer repeats or paraphrases the interviewee response to ensure they correctly "
     "understand the interviewee's statement."},
    {QuestionType::QuestionProbing, "QUESTION_PROBING",
     "The interviewer asks about a concept within the current topic scope that was missing from "
     "the interviewee's last turn(s)."},
    {QuestionType::AlternativeSeeking, "ALTERNATIVE_SEEKING",
     "The interviewer broadly asks about alternatives to a concept being discussed (what else "
     "questions)."},
    {QuestionType::PreferenceSeeking, "PREFERENCE_SEEKING",
     "The interviewer expects a yes/no answer to accept or reject an otherwise provisional "
     "interviewee preference."},
    {QuestionType::Clarification, "CLARIFICATION",
     "The interviewer asks about an ambiguous or vague concept in the interviewee's last turn."},
}};

constexpr std::array<QuestionType, kQuestionTypeCount> kTypeList{
    QuestionType::TopicChange,       QuestionType::AnswerProbing,
    QuestionType::Confirmation,      QuestionType::QuestionProbing,
    QuestionType::AlternativeSeeking, QuestionType::PreferenceSeeking,
    QuestionType::Clarification};

const TypeInfo& info(QuestionType t) {
  return kTypes[static_cast<std::size_t>(t)];
}

}  // namespace

std::string_view to_string(QuestionType t) noexcept { return info(t).token; }
std::string_view definition(QuestionType t) noexcept { return info(t).definition; }
std::span<const QuestionType> all_question_types() noexcept { return kTypeList; }

QuestionType parse_question_type(std::string_view token) {
  for (const auto& ti : kTypes)
    if (ti.token == token) return ti.type;
  throw Error(ErrorCode::ParseError, "unknown question type '" + std::string(token) + "'");
}

// --- annotations ---------------------------------------------------------------

void validate_annotation(const Session& session, const ContextAnnotation& a) {
  if (a.session_id != session.id())
    throw Error(ErrorCode::InvalidAnnotation,
                "annotation for '" + a.session_id + "' checked against '" + session.id() + "'");
  if (a.question_turn_index >= session.size())
    throw Error(ErrorCode::IndexOutOfRange, "question turn " +
                                                std::to_string(a.question_turn_index) +
                                                " not in session '" + session.id() + "'");
  if (a.required_turns > a.question_turn_index)
    throw Error(ErrorCode::InvalidAnnotation,
                "required_turns " + std::to_string(a.required_turns) + " exceeds turn index " +
                    std::to_string(a.question_turn_index));
  if (session.turns()[a.question_turn_index].speaker != Speaker::Interviewer)
    throw Error(ErrorCode::InvalidAnnotation, "turn " + std::to_string(a.question_turn_index) +
                                                  " of '" + session.id() +
                                                  "' is not an INTERVIEWER turn");
}

std::size_t TurnStats::at_most(std::size_t k) const {
  std::size_t n = 0;
  for (const auto& [turns, count] : by_required_turns)
    if (turns <= k) n += count;
  return n;
}

TurnStats turn_stats(std::span<const ContextAnnotation> annotations) {
  if (annotations.empty()) throw Error(ErrorCode::EmptyInput, "no annotations");
  TurnStats s;
  for (const auto& a : annotations) {
    ++s.by_required_turns[a.required_turns];
    ++s.by_type[a.question_type];
  }
  s.total = annotations.size();
  return s;
}

// --- serialization -------------------------------------------------------------

void to_json(nlohmann::json& j, const Turn& t) {
  j = nlohmann::json{{"index", t.index}, {"speaker", to_string(t.speaker)}, {"text", t.text}};
  if (t.timestamp) j["timestamp"] = *t.timestamp;
  if (t.accepted_from) {
    const auto& p = *t.accepted_from;
    nlohmann::json pj{{"suggestion_id", p.suggestion_id},
                      {"mode", to_string(p.mode)},
                      {"original_text", p.original_text}};
    pj["criterion_id"] = p.criterion_id ? nlohmann::json(*p.criterion_id) : nlohmann::json();
    j["accepted_from"] = std::move(pj);
  }
}

void from_json(const nlohmann::json& j, Turn& t) {
  try {
    t.index = j.at("index").get<std::size_t>();
    t.speaker = parse_speaker(j.at("speaker").get<std::string>());
    t.text = j.at("text").get<std::string>();
    t.timestamp.reset();
    if (auto it = j.find("timestamp"); it != j.end() && !it->is_null())
      t.timestamp = it->get<std::string>();
    t.accepted_from.reset();
    if (auto it = j.find("accepted_from"); it != j.end() && !it->is_null()) {
      Provenance p;
      p.suggestion_id = it->at("suggestion_id").get<std::string>();
      p.mode = parse_generation_mode(it->at("mode").get<std::string>());
      p.original_text = it->at("original_text").get<std::string>();
      if (auto c = it->find("criterion_id"); c != it->end() && !c->is_null())
        p.criterion_id = c->get<std::string>();
      t.accepted_from = std::move(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("turn record: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const InterviewDomain& d) {
  j = nlohmann::json{{"keyword", d.keyword},
                     {"seed_question", d.seed_question},
                     {"description", d.description},
                     {"activity", d.activity}};
}

void from_json(const nlohmann::json& j, InterviewDomain& d) {
  d.keyword = j.at("keyword").get<std::string>();
  d.seed_question = j.value("seed_question", "");
  d.description = j.value("description", "");
  d.activity = j.value("activity", "");
}

nlohmann::json session_to_json(const Session& s) {
  return nlohmann::json{{"session_id", s.id()},
                        {"domain", s.domain()},
                        {"status", to_string(s.status())},
                        {"turns", s.turns()}};
}

Session session_from_json(const nlohmann::json& j) {
  try {
    return Session::from_turns(j.at("session_id").get<std::string>(),
                               j.at("domain").get<InterviewDomain>(),
                               j.at("turns").get<std::vector<Turn>>(),
                               parse_session_status(j.at("status").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("session record: ") + e.what());
  }
}

std::vector<Turn> parse_transcript(std::string_view jsonl) {
  std::vector<Turn> turns;
  auto lines = io::split_lines(jsonl);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[n]);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "transcript line " + std::to_string(n + 1) + ": " +
                                             e.what());
    }
    turns.push_back(j.get<Turn>());
  }
  return turns;
}

std::string format_transcript(std::span<const Turn> turns) {
  std::string out;
  for (const auto& t : turns) {
    out += nlohmann::json(t).dump();
    out += '\n';
  }
  return out;
}

std::vector<ContextAnnotation> parse_annotations(std::string_view tsv) {
  auto table = io::Table::parse(tsv);
  std::vector<ContextAnnotation> out;
  out.reserve(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    try {
      ContextAnnotation a;
      a.session_id = table.at(r, "session_id");
      a.question_turn_index = std::stoul(table.at(r, "question_turn_index"));
      a.required_turns = std::stoul(table.at(r, "required_turns"));
      a.question_type = parse_question_type(table.at(r, "question_type"));
      if (a.required_turns > a.question_turn_index)
        throw Error(ErrorCode::InvalidAnnotation, "required_turns exceeds question_turn_index");
      out.push_back(std::move(a));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError,
                  "annotation line " + std::to_string(table.line_of(r)) + ": bad integer");
    }
  }
  return out;
}

std::string format_annotations(std::span<const ContextAnnotation> annotations) {
  io::Table t({"session_id", "question_turn_index", "required_turns", "question_type"});
  for (const auto& a : annotations)
    t.add_row({a.session_id, std::to_string(a.question_turn_index),
               std::to_string(a.required_turns), std::string(to_string(a.question_type))});
  return t.format();
}

}  // namespace elicit

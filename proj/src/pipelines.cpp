#include "elicit/pipelines.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "elicit/io.hpp"

namespace elicit {

std::string_view to_string(QuestionSource s) noexcept {
  switch (s) {
    case QuestionSource::HumanInterviewer: return "HUMAN_INTERVIEWER";
    case QuestionSource::HumanAnalyst: return "HUMAN_ANALYST";
    case QuestionSource::Model: return "MODEL";
  }
  return "MODEL";
}

QuestionSource parse_question_source(std::string_view token) {
  if (token == "HUMAN_INTERVIEWER") return QuestionSource::HumanInterviewer;
  if (token == "HUMAN_ANALYST") return QuestionSource::HumanAnalyst;
  if (token == "MODEL") return QuestionSource::Model;
  throw Error(ErrorCode::ParseError, "unknown question source '" + std::string(token) + "'");
}

std::string_view to_string(Rater r) noexcept {
  return r == Rater::Model ? "MODEL" : "HUMAN_ANALYST";
}

Rater parse_rater(std::string_view token) {
  if (token == "MODEL") return Rater::Model;
  if (token == "HUMAN_ANALYST" || token == "HUMAN") return Rater::HumanAnalyst;
  throw Error(ErrorCode::ParseError, "unknown rater '" + std::string(token) + "'");
}

std::string make_tag(std::string_view kind, std::string_view record_id,
                     std::optional<std::string_view> criterion_id, int attempt) {
  std::string tag(kind);
  tag += ':';
  tag += record_id;
  tag += ':';
  tag += criterion_id ? *criterion_id : std::string_view("-");
  tag += ':';
  tag += std::to_string(attempt);
  return tag;
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `parallelism` threads. Each call writes
/// only its own slot so results do not depend on completion order.
template <class Fn>
void parallel_for(std::size_t n, std::size_t parallelism, Fn&& fn) {
  if (parallelism <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  const auto count = std::min(parallelism, n);
  workers.reserve(count);
  for (std::size_t w = 0; w < count; ++w)
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
}

ChatRequest request_for(const PipelineContext& ctx, std::string tag, std::string prompt) {
  auto req = ChatRequest::user(std::move(tag), std::move(prompt));
  req.model_id = ctx.options.model_id;
  req.temperature = ctx.options.temperature;
  return req;
}

struct Outcome {
  std::optional<std::string> content;
  std::optional<ResidueEntry> residue;
};

template <class Parse>
auto call_and_parse(const PipelineContext& ctx, const std::string& tag, std::string prompt,
                    const std::string& record_id, std::optional<std::string> criterion_id,
                    Parse&& parse) -> std::pair<std::optional<decltype(parse(std::string()))>,
                                                std::optional<ResidueEntry>> {
  try {
    auto response = ctx.gateway.complete(request_for(ctx, tag, std::move(prompt)));
    return {parse(response.content), std::nullopt};
  } catch (const Error& e) {
    return {std::nullopt, ResidueEntry{tag, record_id, std::move(criterion_id), e.code(), e.what()}};
  }
}

std::vector<const QuestionRecord*> canonical(std::span<const QuestionRecord> records) {
  std::vector<const QuestionRecord*> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto* a, const auto* b) { return a->id < b->id; });
  return out;
}

std::vector<const MistakeCriterion*> canonical(const Catalog& catalog) {
  std::vector<const MistakeCriterion*> out;
  for (const auto& c : catalog) out.push_back(&c);
  std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  return out;
}

}  // namespace

BatchResult<QuestionRecord> run_minimal_generation(std::span<const QuestionRecord> records,
                                                   const PipelineContext& ctx) {
  const auto order = canonical(records);
  std::vector<std::optional<QuestionRecord>> produced(order.size());
  std::vector<std::optional<ResidueEntry>> failed(order.size());

  parallel_for(order.size(), ctx.options.parallelism, [&](std::size_t i) {
    const auto& rec = *order[i];
    const auto tag = make_tag("minimal", rec.id, std::nullopt, ctx.options.attempt);
    try {
      const auto& domain = ctx.domains.find(rec.domain_keyword);
      auto prompt = ctx.renderer.minimal(domain, rec.context);
      auto response = ctx.gateway.complete(request_for(ctx, tag, std::move(prompt.text)));
      QuestionRecord out = rec;
      out.question = parse_question(response.content, ctx.options.lenient_questions);
      out.source = QuestionSource::Model;
      out.criterion_id.reset();
      produced[i] = std::move(out);
    } catch (const Error& e) {
      failed[i] = ResidueEntry{tag, rec.id, std::nullopt, e.code(), e.what()};
    }
  });

  BatchResult<QuestionRecord> result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (produced[i]) result.items.push_back(std::move(*produced[i]));
    if (failed[i]) result.residue.push_back(std::move(*failed[i]));
  }
  return result;
}

BatchResult<ClassificationCell> run_classification_matrix(std::span<const QuestionRecord> pairs,
                                                          const PipelineContext& ctx,
                                                          std::string_view tag_kind) {
  const auto records = canonical(pairs);
  const auto criteria = canonical(ctx.catalog);
  const std::size_t n = records.size() * criteria.size();
  std::vector<std::optional<ClassificationCell>> cells(n);
  std::vector<std::optional<ResidueEntry>> failed(n);

  parallel_for(n, ctx.options.parallelism, [&](std::size_t k) {
    const auto& rec = *records[k / criteria.size()];
    const auto& crit = *criteria[k % criteria.size()];
    const auto tag = make_tag(tag_kind, rec.id, crit.id, ctx.options.attempt);
    try {
      auto prompt = ctx.renderer.classification(rec.domain_keyword, rec.interviewee_speech,
                                                rec.question, crit);
      auto response = ctx.gateway.complete(request_for(ctx, tag, std::move(prompt.text)));
      const auto verdict = parse_yes_no(response.content);
      // The prompt asks whether the positive standard is met; a met standard
      // means the mistake is absent.
      cells[k] = ClassificationCell{rec.id, crit.id, Rater::Model, !verdict.value};
    } catch (const Error& e) {
      failed[k] = ResidueEntry{tag, rec.id, crit.id, e.code(), e.what()};
    }
  });

  BatchResult<ClassificationCell> result;
  for (std::size_t k = 0; k < n; ++k) {
    if (cells[k]) result.items.push_back(std::move(*cells[k]));
    if (failed[k]) result.residue.push_back(std::move(*failed[k]));
  }
  return result;
}

namespace {

std::map<FlagKey, bool> index_cells(std::span<const ClassificationCell> cells, const char* which) {
  std::map<FlagKey, bool> out;
  for (const auto& c : cells) {
    if (!out.emplace(FlagKey{c.record_id, c.criterion_id}, c.demonstrates_mistake).second)
      throw Error(ErrorCode::KeyMismatch, std::string(which) + " cells repeat (" + c.record_id +
                                              ", " + c.criterion_id + ")");
  }
  return out;
}

}  // namespace

AgreementReport agreement_report(std::span<const ClassificationCell> model_cells,
                                 std::span<const ClassificationCell> human_cells,
                                 const Catalog& catalog) {
  const auto model = index_cells(model_cells, "model");
  const auto human = index_cells(human_cells, "human");
  if (model.size() != human.size())
    throw Error(ErrorCode::KeyMismatch, "model has " + std::to_string(model.size()) +
                                            " cells, human has " + std::to_string(human.size()));

  std::map<std::string, CriterionAgreement> rows;
  for (const auto& c : catalog) rows[c.id] = CriterionAgreement{c.id, c.name, 0, 0, 0, 0, Rational(0)};

  AgreementReport report;
  for (const auto& [key, model_flag] : model) {
    auto h = human.find(key);
    if (h == human.end())
      throw Error(ErrorCode::KeyMismatch,
                  "(" + key.record_id + ", " + key.criterion_id + ") has no human label");
    auto row = rows.find(key.criterion_id);
    if (row == rows.end())
      throw Error(ErrorCode::KeyMismatch, "criterion '" + key.criterion_id + "' not in catalog");
    auto& r = row->second;
    r.model_count += model_flag;
    r.human_count += h->second;
    r.agreements += model_flag == h->second;
    ++r.cells;
  }
  for (const auto& c : catalog) {
    auto& r = rows[c.id];
    r.agreement_rate = r.cells ? Rational(static_cast<std::int64_t>(r.agreements),
                                          static_cast<std::int64_t>(r.cells))
                               : Rational(0);
    report.human_total += r.human_count;
    report.model_total += r.model_count;
    report.agreements += r.agreements;
    report.cells += r.cells;
    report.per_criterion.push_back(r);
  }
  report.total_agreement = report.cells ? Rational(static_cast<std::int64_t>(report.agreements),
                                                   static_cast<std::int64_t>(report.cells))
                                        : Rational(0);
  return report;
}

std::vector<FlagKey> intersect_flags(std::span<const ClassificationCell> model_cells,
                                     std::span<const ClassificationCell> human_cells) {
  const auto model = index_cells(model_cells, "model");
  const auto human = index_cells(human_cells, "human");
  std::vector<FlagKey> out;
  for (const auto& [key, flag] : model) {
    auto h = human.find(key);
    if (flag && h != human.end() && h->second) out.push_back(key);
  }
  return out;
}

BatchResult<QuestionRecord> run_guided_generation(std::span<const QuestionRecord> pairs,
                                                  std::span<const FlagKey> flagged,
                                                  const PipelineContext& ctx) {
  std::map<std::string, const QuestionRecord*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.id, &p);

  std::vector<FlagKey> order(flagged.begin(), flagged.end());
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i && order[i] == order[i - 1])
      throw Error(ErrorCode::DuplicateFlag,
                  "(" + order[i].record_id + ", " + order[i].criterion_id + ") flagged twice");
    if (!by_id.count(order[i].record_id))
      throw Error(ErrorCode::KeyMismatch, "flag references unknown record '" +
                                              order[i].record_id + "'");
    (void)find_criterion(ctx.catalog, order[i].criterion_id);
  }

  std::vector<std::optional<QuestionRecord>> produced(order.size());
  std::vector<std::optional<ResidueEntry>> failed(order.size());
  parallel_for(order.size(), ctx.options.parallelism, [&](std::size_t i) {
    const auto& flag = order[i];
    const auto& rec = *by_id.at(flag.record_id);
    const auto& crit = find_criterion(ctx.catalog, flag.criterion_id);
    const auto tag = make_tag("guided", rec.id, crit.id, ctx.options.attempt);
    try {
      auto prompt = ctx.renderer.guided(rec.domain_keyword, rec.interviewee_speech, crit);
      auto response = ctx.gateway.complete(request_for(ctx, tag, std::move(prompt.text)));
      QuestionRecord out = rec;
      out.id = rec.id + "/" + crit.id;
      out.question = parse_question(response.content, ctx.options.lenient_questions);
      out.source = QuestionSource::Model;
      out.criterion_id = crit.id;
      produced[i] = std::move(out);
    } catch (const Error& e) {
      failed[i] = ResidueEntry{tag, rec.id, crit.id, e.code(), e.what()};
    }
  });

  BatchResult<QuestionRecord> result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (produced[i]) result.items.push_back(std::move(*produced[i]));
    if (failed[i]) result.residue.push_back(std::move(*failed[i]));
  }
  return result;
}

MultiAvoidanceResult run_multi_avoidance(std::span<const QuestionRecord> pairs,
                                         const PipelineContext& ctx) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no pairs for multi-avoidance");
  const auto order = canonical(pairs);
  std::vector<std::optional<QuestionRecord>> produced(order.size());
  std::vector<std::optional<ResidueEntry>> failed(order.size());

  parallel_for(order.size(), ctx.options.parallelism, [&](std::size_t i) {
    const auto& rec = *order[i];
    const auto tag = make_tag("multi", rec.id, std::nullopt, ctx.options.attempt);
    try {
      auto prompt = ctx.renderer.multi_avoid(rec.domain_keyword, rec.interviewee_speech,
                                             ctx.catalog);
      auto response = ctx.gateway.complete(request_for(ctx, tag, std::move(prompt.text)));
      QuestionRecord out = rec;
      out.question = parse_question(response.content, ctx.options.lenient_questions);
      out.source = QuestionSource::Model;
      produced[i] = std::move(out);
    } catch (const Error& e) {
      failed[i] = ResidueEntry{tag, rec.id, std::nullopt, e.code(), e.what()};
    }
  });

  MultiAvoidanceResult result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (produced[i]) result.questions.push_back(std::move(*produced[i]));
    if (failed[i]) result.residue.push_back(std::move(*failed[i]));
  }
  auto matrix = run_classification_matrix(result.questions, ctx, "multi-classify");
  result.cells = std::move(matrix.items);
  for (auto& r : matrix.residue) result.residue.push_back(std::move(r));
  return result;
}

AvoidanceReport avoidance_report(std::span<const ClassificationCell> cells,
                                 std::size_t question_count, const Catalog& catalog) {
  std::map<std::string, std::map<std::string, bool>> by_record;
  for (const auto& c : cells) {
    if (!by_record[c.record_id].emplace(c.criterion_id, c.demonstrates_mistake).second)
      throw Error(ErrorCode::IncompleteMatrix,
                  "duplicate cell (" + c.record_id + ", " + c.criterion_id + ")");
  }
  if (by_record.size() != question_count)
    throw Error(ErrorCode::IncompleteMatrix, "cells cover " + std::to_string(by_record.size()) +
                                                 " questions, expected " +
                                                 std::to_string(question_count));

  AvoidanceReport report;
  std::map<std::string, std::size_t> demos;
  for (const auto& [record, row] : by_record) {
    if (row.size() != catalog.size())
      throw Error(ErrorCode::IncompleteMatrix, "record '" + record + "' has " +
                                                   std::to_string(row.size()) + " of " +
                                                   std::to_string(catalog.size()) + " criteria");
    std::size_t demonstrated = 0;
    for (const auto& c : catalog) {
      auto it = row.find(c.id);
      if (it == row.end())
        throw Error(ErrorCode::IncompleteMatrix,
                    "record '" + record + "' lacks criterion '" + c.id + "'");
      demonstrated += it->second;
      demos[c.id] += it->second;
    }
    const std::size_t avoided = catalog.size() - demonstrated;
    if (demonstrated == 0) ++report.questions_avoiding_all;
    for (std::size_t t = 0; t <= catalog.size(); ++t)
      if (avoided >= t) ++report.questions_avoiding_at_least[t];
      else report.questions_avoiding_at_least.try_emplace(t, 0);
  }
  if (by_record.empty())
    for (std::size_t t = 0; t <= catalog.size(); ++t) report.questions_avoiding_at_least[t] = 0;

  const auto q = static_cast<std::int64_t>(question_count);
  for (const auto& c : catalog) {
    const auto d = demos[c.id];
    report.per_criterion.push_back(CriterionAvoidance{
        c.id, c.name, d, question_count,
        q ? Rational(1) - Rational(static_cast<std::int64_t>(d), q) : Rational(0)});
    report.demonstrations += d;
  }
  report.cells = question_count * catalog.size();
  report.overall_avoidance =
      report.cells ? Rational(1) - Rational(static_cast<std::int64_t>(report.demonstrations),
                                            static_cast<std::int64_t>(report.cells))
                   : Rational(0);
  return report;
}

// --- file formats --------------------------------------------------------------------

std::vector<QuestionRecord> parse_corpus(std::string_view tsv) {
  auto table = io::Table::parse(tsv);
  const bool has_id = table.has_column("record_id");
  std::vector<QuestionRecord> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.size(); ++r) {
    QuestionRecord q;
    if (has_id) {
      q.id = table.at(r, "record_id");
    } else {
      std::ostringstream id;
      id << 'r' << std::setw(3) << std::setfill('0') << (r + 1);
      q.id = id.str();
    }
    if (!seen.insert(q.id).second) throw Error(ErrorCode::DuplicateId, "record '" + q.id + "'");
    q.session_id = table.at(r, "session_id");
    q.interviewee_speech = table.at(r, "interviewee_speech");
    q.question = table.at(r, "interviewer_question");
    q.domain_keyword = table.at(r, "domain_keyword");
    if (trim(q.interviewee_speech).empty() || trim(q.question).empty())
      throw Error(ErrorCode::EmptyField,
                  "corpus line " + std::to_string(table.line_of(r)) + " has an empty text");
    q.context = {Turn{0, Speaker::Interviewee, q.interviewee_speech, std::nullopt, std::nullopt}};
    q.source = QuestionSource::HumanInterviewer;
    out.push_back(std::move(q));
  }
  return out;
}

std::string format_corpus(std::span<const QuestionRecord> records) {
  io::Table t({"record_id", "session_id", "interviewee_speech", "interviewer_question",
               "domain_keyword"});
  for (const auto& r : records)
    t.add_row({r.id, r.session_id, r.interviewee_speech, r.question, r.domain_keyword});
  return t.format();
}

namespace {

bool parse_flag(const std::string& v) {
  if (v == "1" || v == "true" || v == "TRUE" || v == "yes" || v == "Yes") return true;
  if (v == "0" || v == "false" || v == "FALSE" || v == "no" || v == "No") return false;
  throw Error(ErrorCode::ParseError, "expected boolean, got '" + v + "'");
}

}  // namespace

std::vector<ClassificationCell> parse_cells(std::string_view tsv, Rater default_rater) {
  auto table = io::Table::parse(tsv);
  const bool has_rater = table.has_column("rater");
  std::vector<ClassificationCell> out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    out.push_back(ClassificationCell{
        table.at(r, "record_id"), table.at(r, "criterion_id"),
        has_rater ? parse_rater(table.at(r, "rater")) : default_rater,
        parse_flag(table.at(r, "demonstrates_mistake"))});
  }
  return out;
}

std::string format_cells(std::span<const ClassificationCell> cells) {
  io::Table t({"record_id", "criterion_id", "rater", "demonstrates_mistake"});
  for (const auto& c : cells)
    t.add_row({c.record_id, c.criterion_id, std::string(to_string(c.rater)),
               c.demonstrates_mistake ? "1" : "0"});
  return t.format();
}

std::vector<FlagKey> parse_flags(std::string_view tsv) {
  auto table = io::Table::parse(tsv);
  std::vector<FlagKey> out;
  for (std::size_t r = 0; r < table.size(); ++r)
    out.push_back({table.at(r, "record_id"), table.at(r, "criterion_id")});
  return out;
}

std::string format_flags(std::span<const FlagKey> flags) {
  io::Table t({"record_id", "criterion_id"});
  for (const auto& f : flags) t.add_row({f.record_id, f.criterion_id});
  return t.format();
}

namespace {

nlohmann::json record_to_json(const QuestionRecord& r) {
  nlohmann::json j{{"id", r.id},
                   {"session_id", r.session_id},
                   {"domain_keyword", r.domain_keyword},
                   {"context", r.context},
                   {"interviewee_speech", r.interviewee_speech},
                   {"question", r.question},
                   {"source", to_string(r.source)}};
  j["criterion_id"] = r.criterion_id ? nlohmann::json(*r.criterion_id) : nlohmann::json();
  return j;
}

nlohmann::json rate_json(Rational r) {
  return nlohmann::json{{"num", r.num()}, {"den", r.den()}, {"percent", r.percent()}};
}

}  // namespace

std::vector<QuestionRecord> parse_question_records(std::string_view jsonl) {
  std::vector<QuestionRecord> out;
  auto lines = io::split_lines(jsonl);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    try {
      auto j = nlohmann::json::parse(lines[n]);
      QuestionRecord r;
      r.id = j.at("id").get<std::string>();
      r.session_id = j.value("session_id", "");
      r.domain_keyword = j.at("domain_keyword").get<std::string>();
      r.context = j.value("context", std::vector<Turn>{});
      r.interviewee_speech = j.value("interviewee_speech", "");
      if (r.interviewee_speech.empty()) {
        for (auto it = r.context.rbegin(); it != r.context.rend(); ++it)
          if (it->speaker == Speaker::Interviewee) {
            r.interviewee_speech = it->text;
            break;
          }
      }
      r.question = j.value("question", "");
      r.source = parse_question_source(j.value("source", "HUMAN_INTERVIEWER"));
      if (auto c = j.find("criterion_id"); c != j.end() && !c->is_null())
        r.criterion_id = c->get<std::string>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "question record line " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return out;
}

std::string format_question_records(std::span<const QuestionRecord> records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

nlohmann::json to_json(const AgreementReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.per_criterion)
    rows.push_back({{"criterion_id", r.criterion_id},
                    {"mistake_type", r.name},
                    {"human", r.human_count},
                    {"model", r.model_count},
                    {"agreements", r.agreements},
                    {"cells", r.cells},
                    {"agreement_rate", rate_json(r.agreement_rate)}});
  return nlohmann::json{{"per_criterion", std::move(rows)},
                        {"total",
                         {{"human", report.human_total},
                          {"model", report.model_total},
                          {"agreements", report.agreements},
                          {"cells", report.cells},
                          {"agreement_rate", rate_json(report.total_agreement)}}}};
}

nlohmann::json to_json(const AvoidanceReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.per_criterion)
    rows.push_back({{"criterion_id", r.criterion_id},
                    {"mistake_type", r.name},
                    {"demonstrations", r.demonstrations},
                    {"questions", r.questions},
                    {"avoidance_rate", rate_json(r.avoidance_rate)}});
  nlohmann::json at_least = nlohmann::json::object();
  for (const auto& [t, n] : report.questions_avoiding_at_least) at_least[std::to_string(t)] = n;
  return nlohmann::json{{"per_criterion", std::move(rows)},
                        {"total",
                         {{"demonstrations", report.demonstrations},
                          {"cells", report.cells},
                          {"avoidance_rate", rate_json(report.overall_avoidance)}}},
                        {"questions_avoiding_all", report.questions_avoiding_all},
                        {"questions_avoiding_at_least", std::move(at_least)}};
}

nlohmann::json to_json(std::span<const ResidueEntry> residue) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : residue) {
    nlohmann::json j{{"tag", r.tag},
                     {"record_id", r.record_id},
                     {"code", to_string(r.code)},
                     {"message", r.message}};
    j["criterion_id"] = r.criterion_id ? nlohmann::json(*r.criterion_id) : nlohmann::json();
    out.push_back(std::move(j));
  }
  return out;
}

std::string format_classification_table(const AgreementReport* agreement,
                                        const AvoidanceReport* avoidance) {
  std::vector<std::string> names;
  if (agreement)
    for (const auto& r : agreement->per_criterion) names.push_back(r.name);
  else if (avoidance)
    for (const auto& r : avoidance->per_criterion) names.push_back(r.name);
  std::size_t width = 5;
  for (const auto& n : names) width = std::max(width, n.size());

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Mistake Type";
  if (agreement) out << "  " << std::right << std::setw(5) << "Human" << "  " << std::setw(5)
                     << "Model" << "  " << std::setw(9) << "Agreement";
  if (avoidance) out << "  " << std::right << std::setw(9) << "Avoidance";
  out << '\n';
  auto row = [&](const std::string& name, const CriterionAgreement* a, std::size_t h, std::size_t m,
                 Rational ar, std::optional<Rational> av) {
    out << std::left << std::setw(static_cast<int>(width)) << name;
    if (agreement) out << "  " << std::right << std::setw(5) << h << "  " << std::setw(5) << m
                       << "  " << std::setw(9) << ar.percent();
    if (av) out << "  " << std::right << std::setw(9) << av->percent();
    out << '\n';
    (void)a;
  };
  for (std::size_t i = 0; i < names.size(); ++i) {
    const CriterionAgreement* a = agreement ? &agreement->per_criterion[i] : nullptr;
    std::optional<Rational> av;
    if (avoidance) av = avoidance->per_criterion.at(i).avoidance_rate;
    row(names[i], a, a ? a->human_count : 0, a ? a->model_count : 0,
        a ? a->agreement_rate : Rational(0), av);
  }
  std::optional<Rational> total_av;
  if (avoidance) total_av = avoidance->overall_avoidance;
  row("Total", nullptr, agreement ? agreement->human_total : 0,
      agreement ? agreement->model_total : 0,
      agreement ? agreement->total_agreement : Rational(0), total_av);
  return out.str();
}

}  // namespace elicit

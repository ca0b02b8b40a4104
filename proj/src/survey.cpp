#include "elicit/survey.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "elicit/error.hpp"
#include "elicit/io.hpp"
#include "elicit/random.hpp"

namespace elicit::survey {

namespace {

constexpr std::size_t kStudy1PerSource = 20;
constexpr std::size_t kStudy1PerSurvey = 10;
constexpr std::size_t kStudy3Pairs = 128;
constexpr std::size_t kStudy3PerSurvey = 4;

constexpr std::string_view kChoicePrompt =
    "Which of the two questions better avoids the mistake described above?";

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string two_digits(std::size_t n) { return (n < 10 ? "0" : "") + std::to_string(n); }

}  // namespace

std::string_view to_string(Study s) noexcept { return s == Study::Study1 ? "STUDY1" : "STUDY3"; }

Study parse_study(std::string_view token) {
  if (token == "STUDY1") return Study::Study1;
  if (token == "STUDY3") return Study::Study3;
  throw Error(ErrorCode::ParseError, "unknown study '" + std::string(token) + "'");
}

const std::vector<Scale>& scale_set(int size) {
  static const std::vector<Scale> six{
      {Dimension::Relevancy, "How relevant is the question to the interview conversation so far?",
       {"very irrelevant", "irrelevant", "somewhat irrelevant", "somewhat relevant", "relevant",
        "very relevant"}},
      {Dimension::Clarity, "How clear is the question?",
       {"very unclear", "unclear", "somewhat unclear", "somewhat clear", "clear", "very clear"}},
      {Dimension::Informativeness,
       "How well does the question invite an informative answer from the interviewee?",
       {"very uninformative", "uninformative", "somewhat uninformative", "somewhat informative",
        "informative", "very informative"}}};
  static const std::vector<Scale> five{
      {Dimension::Relevancy, six[0].prompt,
       {"very irrelevant", "somewhat irrelevant", "neutral", "somewhat relevant", "very relevant"}},
      {Dimension::Clarity, six[1].prompt,
       {"very unclear", "somewhat unclear", "neutral", "somewhat clear", "very clear"}},
      {Dimension::Informativeness, six[2].prompt,
       {"very uninformative", "somewhat uninformative", "neutral", "somewhat informative",
        "very informative"}}};
  if (size == 6) return six;
  if (size == 5) return five;
  throw Error(ErrorCode::InvalidParameter, "no label set for a " + std::to_string(size) + "-point scale");
}

std::vector<SurveyInstrument> build_study1(std::span<const QuestionRecord> model_questions,
                                           std::span<const QuestionRecord> human_questions,
                                           const DomainRegistry& domains, std::uint64_t seed) {
  for (auto [side, n] : {std::pair{"model", model_questions.size()},
                         std::pair{"human", human_questions.size()}})
    if (n != kStudy1PerSource)
      throw Error(ErrorCode::CountMismatch, std::string(side) + " side has " + std::to_string(n) +
                                                " questions, expected " +
                                                std::to_string(kStudy1PerSource));

  auto blocks_for = [&](std::span<const QuestionRecord> qs, Source source, std::string_view label) {
    std::vector<SurveyBlock> blocks;
    for (const auto& q : qs) {
      if (q.context.empty())
        throw Error(ErrorCode::EmptyContext, "record '" + q.id + "' has no transcript context");
      blocks.push_back({"", q.id, domains.find(q.domain_keyword).description, q.context,
                        q.question, source, scale_set(6)});
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
    Rng rng(derive_seed(seed, {"study1", label}));
    rng.shuffle(std::span(blocks));
    return blocks;
  };
  auto model = blocks_for(model_questions, Source::Model, "model");
  auto human = blocks_for(human_questions, Source::Human, "human");

  // Group numbers are drawn so the survey ids say nothing about provenance.
  Rng rng(derive_seed(seed, {"study1", "groups"}));
  std::array<std::vector<SurveyBlock>*, 2> groups{&model, &human};
  if (rng.coin()) std::swap(groups[0], groups[1]);

  std::vector<SurveyInstrument> out;
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t s = 0; s < kStudy1PerSource / kStudy1PerSurvey; ++s) {
      SurveyInstrument inst;
      inst.survey_id = "study1-g" + std::to_string(g + 1) + "-s" + std::to_string(s + 1);
      inst.study = Study::Study1;
      inst.seed = seed;
      for (std::size_t b = 0; b < kStudy1PerSurvey; ++b) {
        auto block = (*groups[g])[s * kStudy1PerSurvey + b];
        block.block_id = "b" + two_digits(b + 1);
        inst.blocks.push_back(std::move(block));
      }
      out.push_back(std::move(inst));
    }
  return out;
}

std::vector<SurveyInstrument> build_study3(std::span<const QuestionRecord> records,
                                           const Catalog& catalog, std::uint64_t seed) {
  struct Slots {
    const QuestionRecord* model = nullptr;
    const QuestionRecord* human = nullptr;
  };
  std::map<std::pair<std::string, std::string>, Slots> by;
  for (const auto& r : records) {
    if (!r.criterion_id)
      throw Error(ErrorCode::MissingField, "record '" + r.id + "' has no criterion_id");
    auto& s = by[{r.id, *r.criterion_id}];
    auto& slot = r.source == QuestionSource::Model ? s.model : s.human;
    if (slot)
      throw Error(ErrorCode::DuplicateId, "record '" + r.id + "' appears twice for source " +
                                              std::string(to_string(r.source)));
    slot = &r;
  }
  std::vector<PairBlock> pairs;
  for (const auto& [key, s] : by) {
    if (!s.model || !s.human)
      throw Error(ErrorCode::MissingCounterpart, "pair (" + key.first + ", " + key.second +
                                                     ") lacks its " +
                                                     (s.model ? "human" : "model") + " question");
    PairBlock p;
    p.pair_id = key.first;
    p.domain_keyword = s.model->domain_keyword;
    p.interviewee_speech = s.model->interviewee_speech;
    p.criterion = find_criterion(catalog, key.second);
    p.question_a = s.model->question;
    p.question_b = s.human->question;
    p.scales = scale_set(5);
    pairs.push_back(std::move(p));
  }
  if (pairs.size() != kStudy3Pairs)
    throw Error(ErrorCode::CountMismatch, std::to_string(pairs.size()) + " pairs, expected " +
                                              std::to_string(kStudy3Pairs));

  Rng rng(derive_seed(seed, {"study3"}));
  rng.shuffle(std::span(pairs));
  std::vector<SurveyInstrument> out(kStudy3Pairs / kStudy3PerSurvey);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto& p = pairs[i];
    if (rng.coin()) {
      std::swap(p.question_a, p.question_b);
      p.hidden_assignment = {Source::Human, Source::Model};
    }
    auto& inst = out[i / kStudy3PerSurvey];
    if (inst.survey_id.empty()) {
      inst.survey_id = "study3-s" + two_digits(i / kStudy3PerSurvey + 1);
      inst.study = Study::Study3;
      inst.seed = seed;
    }
    p.block_id = "b" + std::to_string(i % kStudy3PerSurvey + 1);
    inst.pairs.push_back(std::move(p));
  }
  return out;
}

std::vector<std::size_t> presentation_order(std::string_view survey_id,
                                            std::string_view respondent_id, std::uint64_t seed,
                                            std::size_t blocks) {
  std::vector<std::size_t> order(blocks);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {"order", survey_id, respondent_id}));
  rng.shuffle(std::span(order));
  return order;
}

namespace {

nlohmann::json scale_items(const std::vector<Scale>& scales, std::string_view prefix) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& s : scales)
    items.push_back({{"item", std::string(prefix) + lower(stats::to_string(s.dimension))},
                     {"prompt", s.prompt},
                     {"labels", s.labels}});
  return items;
}

nlohmann::json context_json(const std::vector<Turn>& turns) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : turns) out.push_back({{"speaker", to_string(t.speaker)}, {"text", t.text}});
  return out;
}

std::vector<Scale> scales_from(const nlohmann::json& items, std::string_view prefix) {
  std::vector<Scale> out;
  for (const auto& it : items) {
    auto name = it.at("item").get<std::string>();
    if (!name.starts_with(prefix)) continue;
    Scale s;
    std::string dim = name.substr(prefix.size());
    for (auto& c : dim) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    s.dimension = stats::parse_dimension(dim);
    s.prompt = it.at("prompt").get<std::string>();
    s.labels = it.at("labels").get<std::vector<std::string>>();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

nlohmann::json render(const SurveyInstrument& inst) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : inst.blocks)
    blocks.push_back({{"block_id", b.block_id},
                      {"domain", b.domain_sentence},
                      {"context", context_json(b.context)},
                      {"question", b.question},
                      {"items", scale_items(b.scales, "")}});
  for (const auto& p : inst.pairs) {
    nlohmann::json items = nlohmann::json::array();
    for (auto slot : {"a.", "b."})
      for (auto& it : scale_items(p.scales, slot)) items.push_back(std::move(it));
    blocks.push_back({{"block_id", p.block_id},
                      {"domain", p.domain_keyword},
                      {"interviewee_speech", p.interviewee_speech},
                      {"mistake", p.criterion.mistake_statement},
                      {"questions", {{"a", p.question_a}, {"b", p.question_b}}},
                      {"choice", {{"item", "choice"}, {"prompt", kChoicePrompt}, {"options", {"a", "b"}}}},
                      {"items", std::move(items)}});
  }
  return {{"survey_id", inst.survey_id}, {"study", to_string(inst.study)}, {"blocks", std::move(blocks)}};
}

nlohmann::json answer_key(const SurveyInstrument& inst) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& b : inst.blocks)
    entries.push_back({{"block_id", b.block_id},
                       {"item_id", b.item_id},
                       {"source", stats::to_string(b.hidden_source)}});
  for (const auto& p : inst.pairs)
    entries.push_back({{"block_id", p.block_id},
                       {"pair_id", p.pair_id},
                       {"criterion_id", p.criterion.id},
                       {"a", stats::to_string(p.hidden_assignment[0])},
                       {"b", stats::to_string(p.hidden_assignment[1])}});
  return {{"survey_id", inst.survey_id},
          {"study", to_string(inst.study)},
          {"seed", inst.seed},
          {"key", std::move(entries)}};
}

SurveyInstrument load_instrument(const nlohmann::json& rendering, const nlohmann::json& key,
                                 const Catalog& catalog) {
  try {
    SurveyInstrument inst;
    inst.survey_id = rendering.at("survey_id").get<std::string>();
    inst.study = parse_study(rendering.at("study").get<std::string>());
    if (key.at("survey_id").get<std::string>() != inst.survey_id)
      throw Error(ErrorCode::KeyMismatch, "answer key belongs to survey '" +
                                              key.at("survey_id").get<std::string>() + "'");
    inst.seed = key.at("seed").get<std::uint64_t>();
    std::map<std::string, nlohmann::json> entries;
    for (const auto& e : key.at("key")) entries[e.at("block_id").get<std::string>()] = e;
    const auto& blocks = rendering.at("blocks");
    if (blocks.size() != entries.size())
      throw Error(ErrorCode::KeyMismatch, "answer key and rendering list different blocks");
    for (const auto& b : blocks) {
      const auto id = b.at("block_id").get<std::string>();
      auto e = entries.find(id);
      if (e == entries.end()) throw Error(ErrorCode::KeyMismatch, "block '" + id + "' has no key");
      const auto& k = e->second;
      if (inst.study == Study::Study1) {
        SurveyBlock sb;
        sb.block_id = id;
        sb.item_id = k.at("item_id").get<std::string>();
        sb.domain_sentence = b.at("domain").get<std::string>();
        std::size_t index = 0;
        for (const auto& t : b.at("context"))
          sb.context.push_back(Turn{index++, parse_speaker(t.at("speaker").get<std::string>()),
                                    t.at("text").get<std::string>(), std::nullopt, std::nullopt});
        sb.question = b.at("question").get<std::string>();
        sb.hidden_source = stats::parse_source(k.at("source").get<std::string>());
        sb.scales = scales_from(b.at("items"), "");
        inst.blocks.push_back(std::move(sb));
      } else {
        PairBlock p;
        p.block_id = id;
        p.pair_id = k.at("pair_id").get<std::string>();
        p.domain_keyword = b.at("domain").get<std::string>();
        p.interviewee_speech = b.at("interviewee_speech").get<std::string>();
        p.criterion = find_criterion(catalog, k.at("criterion_id").get<std::string>());
        p.question_a = b.at("questions").at("a").get<std::string>();
        p.question_b = b.at("questions").at("b").get<std::string>();
        p.hidden_assignment = {stats::parse_source(k.at("a").get<std::string>()),
                               stats::parse_source(k.at("b").get<std::string>())};
        if (p.hidden_assignment[0] == p.hidden_assignment[1])
          throw Error(ErrorCode::KeyMismatch, "block '" + id + "' assigns one source to both slots");
        p.scales = scales_from(b.at("items"), "a.");
        inst.pairs.push_back(std::move(p));
      }
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("instrument: ") + e.what());
  }
}

std::vector<std::string> blinding_violations(std::string_view text) {
  static const std::set<std::string> tokens{"model", "human", "gpt"};
  std::vector<std::string> found;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalnum(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
    const auto word = lower(text.substr(i, j - i));
    if (tokens.count(word)) found.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return found;
}

std::vector<ResponseRow> parse_responses(std::string_view tsv) {
  auto t = io::Table::parse(tsv);
  std::vector<ResponseRow> out;
  for (std::size_t r = 0; r < t.size(); ++r)
    out.push_back({t.at(r, "respondent_id"), t.at(r, "survey_id"), t.at(r, "block_id"),
                   t.at(r, "item"), t.at(r, "value")});
  return out;
}

std::string format_responses(std::span<const ResponseRow> rows) {
  io::Table t({"respondent_id", "survey_id", "block_id", "item", "value"});
  for (const auto& r : rows) t.add_row({r.respondent_id, r.survey_id, r.block_id, r.item, r.value});
  return t.format();
}

Ingested ingest_responses(std::span<const ResponseRow> rows,
                          std::span<const SurveyInstrument> instruments) {
  std::map<std::string, const SurveyInstrument*> by_id;
  for (const auto& inst : instruments) by_id[inst.survey_id] = &inst;

  auto parse_score = [](const ResponseRow& r, int size) {
    int v = 0;
    const auto* end = r.value.data() + r.value.size();
    auto [ptr, ec] = std::from_chars(r.value.data(), end, v);
    if (ec != std::errc() || ptr != end || r.value.empty())
      throw Error(ErrorCode::ParseError, "respondent " + r.respondent_id + ", block " + r.block_id +
                                             ": '" + r.value + "' is not a score");
    if (v < 1 || v > size)
      throw Error(ErrorCode::OutOfScaleScore, "respondent " + r.respondent_id + ", block " +
                                                  r.block_id + ": score " + r.value + " outside 1.." +
                                                  std::to_string(size));
    return v;
  };
  auto dimension_of = [](const ResponseRow& r, std::string_view item,
                         const std::vector<Scale>& scales) -> const Scale& {
    for (const auto& s : scales)
      if (lower(stats::to_string(s.dimension)) == item) return s;
    throw Error(ErrorCode::ParseError, "block " + r.block_id + " has no item '" + r.item + "'");
  };

  Ingested out;
  std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
  for (const auto& r : rows) {
    auto it = by_id.find(r.survey_id);
    if (it == by_id.end())
      throw Error(ErrorCode::UnknownBlock, "unknown survey '" + r.survey_id + "'");
    const auto& inst = *it->second;
    if (!seen.emplace(r.respondent_id, r.survey_id, r.block_id, r.item).second)
      throw Error(ErrorCode::DuplicateResponse, "respondent " + r.respondent_id + " answered " +
                                                    r.survey_id + "/" + r.block_id + " " + r.item +
                                                    " twice");
    if (inst.study == Study::Study1) {
      auto b = std::find_if(inst.blocks.begin(), inst.blocks.end(),
                            [&](const auto& x) { return x.block_id == r.block_id; });
      if (b == inst.blocks.end())
        throw Error(ErrorCode::UnknownBlock, "unknown block '" + r.survey_id + "/" + r.block_id + "'");
      const auto& scale = dimension_of(r, r.item, b->scales);
      out.ratings.push_back({r.respondent_id, b->item_id, b->hidden_source, scale.dimension,
                             parse_score(r, scale.size()), scale.size()});
      continue;
    }
    auto p = std::find_if(inst.pairs.begin(), inst.pairs.end(),
                          [&](const auto& x) { return x.block_id == r.block_id; });
    if (p == inst.pairs.end())
      throw Error(ErrorCode::UnknownBlock, "unknown block '" + r.survey_id + "/" + r.block_id + "'");
    if (r.item == "choice") {
      if (r.value != "a" && r.value != "b")
        throw Error(ErrorCode::ParseError, "choice must be 'a' or 'b', got '" + r.value + "'");
      out.comparisons.push_back(
          {r.respondent_id, p->pair_id, p->hidden_assignment[r.value == "a" ? 0 : 1]});
      continue;
    }
    if (r.item.size() < 3 || (r.item[0] != 'a' && r.item[0] != 'b') || r.item[1] != '.')
      throw Error(ErrorCode::ParseError, "block " + r.block_id + " has no item '" + r.item + "'");
    const auto& scale = dimension_of(r, std::string_view(r.item).substr(2), p->scales);
    out.ratings.push_back({r.respondent_id, p->pair_id, p->hidden_assignment[r.item[0] == 'a' ? 0 : 1],
                           scale.dimension, parse_score(r, scale.size()), scale.size()});
  }
  return out;
}

}  // namespace elicit::survey

#include "elicit/prompts.hpp"

#include <algorithm>
#include <optional>

#include "elicit/error.hpp"
#include "elicit/io.hpp"
#include "resources.hpp"

namespace elicit {

std::string_view to_string(PromptKind k) noexcept {
  switch (k) {
    case PromptKind::MinimalGeneration: return "MINIMAL_GENERATION";
    case PromptKind::MistakeClassification: return "MISTAKE_CLASSIFICATION";
    case PromptKind::MistakeGuidedGeneration: return "MISTAKE_GUIDED_GENERATION";
    case PromptKind::MultiAvoidGeneration: return "MULTI_AVOID_GENERATION";
  }
  return "MINIMAL_GENERATION";
}

namespace {

std::string strip_one_newline(std::string_view s) {
  if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return std::string(s);
}

// Placeholder grammar: '{' [a-z ]+ '}'.
std::optional<std::size_t> placeholder_end(std::string_view tmpl, std::size_t open) {
  std::size_t i = open + 1;
  while (i < tmpl.size() && ((tmpl[i] >= 'a' && tmpl[i] <= 'z') || tmpl[i] == ' ')) ++i;
  if (i == open + 1 || i >= tmpl.size() || tmpl[i] != '}') return std::nullopt;
  return i;
}

void require_text(std::string_view value, const char* what) {
  if (trim(value).empty()) throw Error(ErrorCode::EmptyField, std::string(what) + " is empty");
}

}  // namespace

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates t{strip_one_newline(resources::template_minimal),
                                 strip_one_newline(resources::template_classification),
                                 strip_one_newline(resources::template_guided),
                                 strip_one_newline(resources::template_multi_avoid)};
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return PromptTemplates{strip_one_newline(io::read_file(dir / "minimal.txt")),
                         strip_one_newline(io::read_file(dir / "classification.txt")),
                         strip_one_newline(io::read_file(dir / "guided.txt")),
                         strip_one_newline(io::read_file(dir / "multi_avoid.txt"))};
}

std::vector<std::string> placeholder_names(std::string_view tmpl) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '{') continue;
    if (auto end = placeholder_end(tmpl, i)) {
      std::string name(tmpl.substr(i + 1, *end - i - 1));
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      i = *end;
    }
  }
  return names;
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      if (auto end = placeholder_end(tmpl, i)) {
        const std::string name(tmpl.substr(i + 1, *end - i - 1));
        auto it = values.find(name);
        if (it == values.end())
          throw Error(ErrorCode::UnfilledPlaceholder, "no value for {" + name + "}");
        out += it->second;
        i = *end;
        continue;
      }
    }
    out += tmpl[i];
  }
  return out;
}

std::string render_turns(std::span<const Turn> turns) {
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) out += '\n';
    out += to_string(turns[i].speaker);
    out += ": ";
    out += turns[i].text;
  }
  return out;
}

std::string criterion_guidance(const MistakeCriterion& criterion) {
  std::string out;
  if (criterion.one_shot_example) out += " " + *criterion.one_shot_example;
  if (criterion.step_by_step) out += " " + *criterion.step_by_step;
  return out;
}

RenderedPrompt PromptRenderer::minimal(const InterviewDomain& domain,
                                       std::span<const Turn> turns) const {
  if (turns.empty()) throw Error(ErrorCode::EmptyContext, "no turns to condition on");
  std::map<std::string, std::string> values{{"interview domain", domain.activity},
                                            {"interview turns", render_turns(turns)}};
  auto text = fill_template(templates_->minimal, values);
  return {PromptKind::MinimalGeneration, std::move(text), std::move(values)};
}

RenderedPrompt PromptRenderer::classification(std::string_view domain_keyword,
                                              std::string_view interviewee_speech,
                                              std::string_view interviewer_question,
                                              const MistakeCriterion& criterion) const {
  require_text(domain_keyword, "domain keyword");
  require_text(interviewee_speech, "interviewee speech");
  require_text(interviewer_question, "interviewer question");
  require_text(criterion.positive_reframing, "criterion reframing");
  std::map<std::string, std::string> values{
      {"domain keyword", std::string(domain_keyword)},
      {"interviewee speech", std::string(interviewee_speech)},
      {"interviewer question", std::string(interviewer_question)},
      {"mistake criterion", criterion.positive_reframing},
      {"criterion guidance", criterion_guidance(criterion)}};
  auto text = fill_template(templates_->classification, values);
  return {PromptKind::MistakeClassification, std::move(text), std::move(values)};
}

RenderedPrompt PromptRenderer::guided(std::string_view domain_keyword,
                                      std::string_view interviewee_speech,
                                      const MistakeCriterion& criterion) const {
  require_text(domain_keyword, "domain keyword");
  require_text(interviewee_speech, "interviewee speech");
  require_text(criterion.positive_reframing, "criterion reframing");
  std::map<std::string, std::string> values{
      {"domain keyword", std::string(domain_keyword)},
      {"interviewee speech", std::string(interviewee_speech)},
      {"mistake criterion", criterion.positive_reframing}};
  auto text = fill_template(templates_->guided, values);
  return {PromptKind::MistakeGuidedGeneration, std::move(text), std::move(values)};
}

RenderedPrompt PromptRenderer::multi_avoid(std::string_view domain_keyword,
                                           std::string_view interviewee_speech,
                                           std::span<const MistakeCriterion> catalog) const {
  if (catalog.empty()) throw Error(ErrorCode::EmptyCatalog, "no criteria to avoid");
  require_text(domain_keyword, "domain keyword");
  require_text(interviewee_speech, "interviewee speech");
  std::string list;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    require_text(catalog[i].positive_reframing, "criterion reframing");
    if (i) list += '\n';
    list += std::to_string(i + 1) + ". " + catalog[i].positive_reframing;
  }
  std::map<std::string, std::string> values{
      {"domain keyword", std::string(domain_keyword)},
      {"interviewee speech", std::string(interviewee_speech)},
      {"mistake criteria", std::move(list)}};
  auto text = fill_template(templates_->multi_avoid, values);
  return {PromptKind::MultiAvoidGeneration, std::move(text), std::move(values)};
}

}  // namespace elicit

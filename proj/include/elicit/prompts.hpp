#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "elicit/catalog.hpp"
#include "elicit/core_model.hpp"

namespace elicit {

enum class PromptKind {
  MinimalGeneration,
  MistakeClassification,
  MistakeGuidedGeneration,
  MultiAvoidGeneration,
};

std::string_view to_string(PromptKind k) noexcept;

struct RenderedPrompt {
  PromptKind kind = PromptKind::MinimalGeneration;
  std::string text;
  std::map<std::string, std::string> placeholders_filled;
};

/// Template texts with `{name}` placeholders. Loaded from resource files;
/// the defaults are compiled in from resources/templates.
struct PromptTemplates {
  std::string minimal;
  std::string classification;
  std::string guided;
  std::string multi_avoid;

  [[nodiscard]] static const PromptTemplates& builtin();
  /// Reads minimal.txt, classification.txt, guided.txt, multi_avoid.txt from
  /// `dir`; a single trailing newline in each file is dropped.
  [[nodiscard]] static PromptTemplates load(const std::filesystem::path& dir);
};

/// Single-pass substitution of `{name}` placeholders. Substituted values are
/// never rescanned. Throws UnfilledPlaceholder when the template names a
/// placeholder absent from `values`.
[[nodiscard]] std::string fill_template(std::string_view tmpl,
                                        const std::map<std::string, std::string>& values);

/// Placeholder names appearing in a template, in order of first appearance.
[[nodiscard]] std::vector<std::string> placeholder_names(std::string_view tmpl);

/// "SPEAKER: text" lines joined with '\n'.
[[nodiscard]] std::string render_turns(std::span<const Turn> turns);

/// Sentence(s) appended after the "Standard:" sentence: one-shot example then
/// step-by-step instruction, each preceded by a space. Empty when neither exists.
[[nodiscard]] std::string criterion_guidance(const MistakeCriterion& criterion);

class PromptRenderer {
 public:
  PromptRenderer() : templates_(&PromptTemplates::builtin()) {}
  explicit PromptRenderer(const PromptTemplates& templates) : templates_(&templates) {}

  /// Throws EmptyContext.
  [[nodiscard]] RenderedPrompt minimal(const InterviewDomain& domain,
                                       std::span<const Turn> turns) const;
  /// Throws EmptyField.
  [[nodiscard]] RenderedPrompt classification(std::string_view domain_keyword,
                                              std::string_view interviewee_speech,
                                              std::string_view interviewer_question,
                                              const MistakeCriterion& criterion) const;
  /// Throws EmptyField.
  [[nodiscard]] RenderedPrompt guided(std::string_view domain_keyword,
                                      std::string_view interviewee_speech,
                                      const MistakeCriterion& criterion) const;
  /// Numbered criteria list "1. ...\n2. ...". Throws EmptyCatalog / EmptyField.
  [[nodiscard]] RenderedPrompt multi_avoid(std::string_view domain_keyword,
                                           std::string_view interviewee_speech,
                                           std::span<const MistakeCriterion> catalog) const;

  [[nodiscard]] const PromptTemplates& templates() const noexcept { return *templates_; }

 private:
  const PromptTemplates* templates_;
};

}  // namespace elicit

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/core_model.hpp"

namespace elicit {

enum class CriterionCategory { FollowUp, QuestionFraming };

std::string_view to_string(CriterionCategory c) noexcept;

struct MistakeCriterion {
  std::string id;
  CriterionCategory category = CriterionCategory::FollowUp;
  std::string name;
  std::string mistake_statement;
  std::string positive_reframing;
  std::optional<std::string> one_shot_example;
  std::optional<std::string> step_by_step;
  std::vector<std::string> citations;
  bool editorial = false;  // guidance text authored for this tool, not published

  friend bool operator==(const MistakeCriterion&, const MistakeCriterion&) = default;
};

using Catalog = std::vector<MistakeCriterion>;

/// Parses a catalog config (JSON: {"criteria": [...]}) and validates it.
/// Throws DuplicateId, MissingField, UnknownCategory or ParseError.
[[nodiscard]] Catalog load_catalog(std::string_view source);
[[nodiscard]] Catalog load_catalog_file(const std::filesystem::path& path);

/// The 14 built-in criteria, compiled into the library from resources/catalog.json.
[[nodiscard]] const Catalog& builtin_catalog();
[[nodiscard]] std::string_view builtin_catalog_source() noexcept;

[[nodiscard]] const MistakeCriterion& find_criterion(const Catalog& catalog, std::string_view id);

inline constexpr std::string_view kNegationDenyList[] = {"not", "fail to", "avoid", "without"};

/// Negation tokens (whole-word, case-insensitive) present in `text`.
[[nodiscard]] std::vector<std::string> negation_tokens(std::string_view text);

/// Lower-case or mixed-case "interviewer"/"interviewee" occurrences; role
/// identifiers inside criterion texts must be upper-case.
[[nodiscard]] bool has_lowercase_role_identifier(std::string_view text);

/// Structural lint of the built-in invariants: 14 entries split 5/9, exactly the
/// four named one-shot carriers, nine step-by-step blocks, positive framing and
/// upper-case role identifiers. Returns human-readable findings; empty when clean.
[[nodiscard]] std::vector<std::string> lint_builtin_invariants(const Catalog& catalog);

}  // namespace elicit

#include "elicit/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "elicit/error.hpp"
#include "elicit/io.hpp"
#include "resources.hpp"

namespace elicit {

std::string_view to_string(CriterionCategory c) noexcept {
  return c == CriterionCategory::FollowUp ? "FOLLOW_UP" : "QUESTION_FRAMING";
}

namespace {

CriterionCategory parse_category(const std::string& token) {
  if (token == "FOLLOW_UP") return CriterionCategory::FollowUp;
  if (token == "QUESTION_FRAMING") return CriterionCategory::QuestionFraming;
  throw Error(ErrorCode::UnknownCategory, "unknown category '" + token + "'");
}

std::string required_text(const nlohmann::json& entry, const char* field, std::size_t pos) {
  auto it = entry.find(field);
  if (it == entry.end() || !it->is_string() || trim(it->get<std::string>()).empty())
    throw Error(ErrorCode::MissingField,
                "criterion #" + std::to_string(pos) + " has no '" + field + "'");
  return it->get<std::string>();
}

std::optional<std::string> optional_text(const nlohmann::json& entry, const char* field) {
  auto it = entry.find(field);
  if (it == entry.end() || it->is_null()) return std::nullopt;
  auto text = it->get<std::string>();
  if (trim(text).empty()) return std::nullopt;
  return text;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '\''; }

}  // namespace

Catalog load_catalog(std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("catalog: ") + e.what());
  }
  const auto criteria = doc.find("criteria");
  if (criteria == doc.end() || !criteria->is_array())
    throw Error(ErrorCode::MissingField, "catalog has no 'criteria' array");

  Catalog out;
  std::set<std::string> ids;
  std::size_t pos = 0;
  for (const auto& entry : *criteria) {
    MistakeCriterion c;
    c.id = required_text(entry, "id", pos);
    if (!ids.insert(c.id).second)
      throw Error(ErrorCode::DuplicateId, "duplicate criterion id '" + c.id + "'");
    c.category = parse_category(required_text(entry, "category", pos));
    c.name = required_text(entry, "name", pos);
    c.mistake_statement = required_text(entry, "mistake_statement", pos);
    c.positive_reframing = required_text(entry, "positive_reframing", pos);
    c.one_shot_example = optional_text(entry, "one_shot_example");
    c.step_by_step = optional_text(entry, "step_by_step");
    if (auto it = entry.find("citations"); it != entry.end())
      c.citations = it->get<std::vector<std::string>>();
    c.editorial = entry.value("editorial", false);
    out.push_back(std::move(c));
    ++pos;
  }
  return out;
}

Catalog load_catalog_file(const std::filesystem::path& path) {
  return load_catalog(io::read_file(path));
}

std::string_view builtin_catalog_source() noexcept { return resources::catalog_json; }

const Catalog& builtin_catalog() {
  static const Catalog catalog = load_catalog(resources::catalog_json);
  return catalog;
}

const MistakeCriterion& find_criterion(const Catalog& catalog, std::string_view id) {
  for (const auto& c : catalog)
    if (c.id == id) return c;
  throw Error(ErrorCode::UnknownCriterion, "unknown criterion '" + std::string(id) + "'");
}

std::vector<std::string> negation_tokens(std::string_view text) {
  const std::string hay = lower(text);
  std::vector<std::string> found;
  for (std::string_view token : kNegationDenyList) {
    std::size_t at = 0;
    while ((at = hay.find(token, at)) != std::string::npos) {
      const bool left = at == 0 || !is_word_char(hay[at - 1]);
      const std::size_t end = at + token.size();
      const bool right = end >= hay.size() || !is_word_char(hay[end]);
      if (left && right) {
        found.emplace_back(token);
        break;
      }
      ++at;
    }
  }
  return found;
}

bool has_lowercase_role_identifier(std::string_view text) {
  const std::string hay = lower(text);
  for (std::string_view role : {"interviewer", "interviewee"}) {
    std::size_t at = 0;
    while ((at = hay.find(role, at)) != std::string::npos) {
      if (text.substr(at, role.size()) != (role == "interviewer" ? "INTERVIEWER" : "INTERVIEWEE"))
        return true;
      at += role.size();
    }
  }
  return false;
}

std::vector<std::string> lint_builtin_invariants(const Catalog& catalog) {
  std::vector<std::string> findings;
  if (catalog.size() != 14)
    findings.push_back("expected 14 criteria, found " + std::to_string(catalog.size()));
  const auto follow_up = std::count_if(catalog.begin(), catalog.end(), [](const auto& c) {
    return c.category == CriterionCategory::FollowUp;
  });
  if (follow_up != 5 || catalog.size() - static_cast<std::size_t>(follow_up) != 9)
    findings.push_back("expected 5 FOLLOW_UP + 9 QUESTION_FRAMING, found " +
                       std::to_string(follow_up) + " + " +
                       std::to_string(catalog.size() - static_cast<std::size_t>(follow_up)));

  const std::set<std::string> one_shot_names{
      "No clarification when contradictory", "Ask a technical question",
      "Ask a question inappropriate to user's profile", "Ask for solutions"};
  std::size_t steps = 0;
  for (const auto& c : catalog) {
    const bool expects = one_shot_names.count(c.name) > 0;
    if (expects != c.one_shot_example.has_value())
      findings.push_back("'" + c.name + (expects ? "' lacks" : "' unexpectedly has") +
                         " a one-shot example");
    if (c.step_by_step) ++steps;
    for (const auto& tok : negation_tokens(c.positive_reframing))
      findings.push_back("'" + c.name + "' reframing contains negation '" + tok + "'");
    for (const std::string& text : {c.positive_reframing, c.one_shot_example.value_or(""),
                                    c.step_by_step.value_or("")}) {
      if (has_lowercase_role_identifier(text))
        findings.push_back("'" + c.name + "' has a non-upper-case role identifier");
    }
  }
  if (steps != 9)
    findings.push_back("expected 9 step-by-step blocks, found " + std::to_string(steps));
  return findings;
}

}  // namespace elicit

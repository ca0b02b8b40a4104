#pragma once

#include <string_view>

// Generated at configure time from resources/ (see resources.cpp.in).
namespace elicit::resources {

extern const std::string_view catalog_json;
extern const std::string_view template_minimal;
extern const std::string_view template_classification;
extern const std::string_view template_guided;
extern const std::string_view template_multi_avoid;

}  // namespace elicit::resources

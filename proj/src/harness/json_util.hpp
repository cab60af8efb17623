#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mixguide/harness/config.hpp"
#include "mixguide/harness/model_io.hpp"

// Internal JSON helpers shared by config/model parsing. Not installed.
namespace mixguide::harness::detail {

using nlohmann::json;

// Parses with byte-offset errors translated to origin:line:column.
json parse_json_document(const std::string& text, const std::string& origin);

[[noreturn]] void config_fail(const std::string& origin, const std::string& what);

// Rejects keys outside `allowed` so typos fail loudly.
void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& origin, const std::string& where);

double get_finite(const json& v, const std::string& origin, const std::string& where);

ModelSpec model_from_json(const json& j, const std::string& origin);

}  // namespace mixguide::harness::detail

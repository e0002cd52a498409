#pragma once

#include <string>

#include <json.hpp>

#include "greenshield/metrics.hpp"
#include "greenshield/models.hpp"

namespace greenshield::detail {

using nlohmann::json;

/// Sorted keys, reals printed with 17 significant digits. indent < 0 is compact.
std::string dump_canonical(const json& value, int indent = -1);

/// Parse helpers that turn schema violations into MalformedDocument.
json parse_document(const std::string& text);
const json& require(const json& object, const char* key);
double require_number(const json& object, const char* key);

json report_json(const EvalReport& report);
EvalReport report_from(const json& doc);

json model_json(const FireModel& model);
FireModel model_from(const json& doc);

}  // namespace greenshield::detail

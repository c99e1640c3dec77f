#pragma once

// JSON forms of the core types. Parsers throw SchemaError naming `file` and the
// offending key.

#include <string>

#include "json.hpp"
#include "pambench/stimuli.hpp"
#include "pambench/taskgen.hpp"
#include "pambench/trial.hpp"

namespace pambench {

using Json = nlohmann::json;

Json graph_to_json(const TaskGraph& g);
TaskGraph graph_from_json(const Json& j, const std::string& file);

Json scene_to_json(const Scene& s);
Scene scene_from_json(const Json& j, const std::string& file);

Json answers_to_json(const AnswerSet& set);
AnswerSet answers_from_json(const Json& j, const std::string& file, const std::string& key);

Json canvas_to_json(const CanvasConfig& c);
CanvasConfig canvas_from_json(const Json& j, const std::string& file);

Json pam_config_to_json(const PamConfig& c);
PamConfig pam_config_from_json(const Json& j, const std::string& file);

// Typed field access with SchemaError on absence or type mismatch.
const Json& require(const Json& obj, const std::string& key, const std::string& file);
std::string require_string(const Json& obj, const std::string& key, const std::string& file);
std::int64_t require_int(const Json& obj, const std::string& key, const std::string& file);
std::uint64_t require_uint(const Json& obj, const std::string& key, const std::string& file);

// Parses text, mapping syntax errors to SchemaError.
Json parse_json_text(const std::string& text, const std::string& file);
Json read_json_file(const std::filesystem::path& p);  // MissingFile when absent

// Stable two-space dump with a trailing newline.
std::string dump_json(const Json& j);

}  // namespace pambench

#include "chaoscycle/schema.hpp"

namespace chaoscycle {

namespace {

bool type_matches(const std::string& type, const Json& value) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "null") return value.is_null();
  return false;
}

void check_node(const Json& schema, const Json& value, const std::string& where,
                std::vector<std::string>& out) {
  if (schema.contains("type")) {
    const auto type = schema.at("type").get<std::string>();
    if (!type_matches(type, value)) {
      out.push_back(where + ": expected " + type + ", got " + value.type_name());
      return;  // deeper checks would be meaningless
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& candidate : schema.at("enum"))
      if (candidate == value) found = true;
    if (!found)
      out.push_back(where + ": value " + value.dump() + " not in " + schema.at("enum").dump());
  }
  if (value.is_number()) {
    if (schema.contains("minimum") && value.get<double>() < schema.at("minimum").get<double>())
      out.push_back(where + ": " + value.dump() + " below minimum " +
                    schema.at("minimum").dump());
    if (schema.contains("maximum") && value.get<double>() > schema.at("maximum").get<double>())
      out.push_back(where + ": " + value.dump() + " above maximum " +
                    schema.at("maximum").dump());
  }
  if (value.is_string() && schema.contains("minLength")) {
    if (value.get<std::string>().size() < schema.at("minLength").get<size_t>())
      out.push_back(where + ": string shorter than minLength " +
                    schema.at("minLength").dump());
  }
  if (value.is_array()) {
    if (schema.contains("minItems") && value.size() < schema.at("minItems").get<size_t>())
      out.push_back(where + ": fewer than minItems " + schema.at("minItems").dump());
    if (schema.contains("items")) {
      for (size_t i = 0; i < value.size(); ++i)
        check_node(schema.at("items"), value[i], where + "[" + std::to_string(i) + "]", out);
    }
  }
  if (value.is_object()) {
    const Json props = schema.value("properties", Json::object());
    if (schema.contains("required")) {
      for (const auto& key : schema.at("required")) {
        if (!value.contains(key.get<std::string>()))
          out.push_back(where + ": missing required property '" + key.get<std::string>() + "'");
      }
    }
    for (auto it = value.begin(); it != value.end(); ++it) {
      if (props.contains(it.key())) {
        check_node(props.at(it.key()), it.value(), where + "." + it.key(), out);
      } else if (schema.contains("additionalProperties") &&
                 schema.at("additionalProperties").is_boolean() &&
                 !schema.at("additionalProperties").get<bool>()) {
        out.push_back(where + ": unexpected property '" + it.key() + "'");
      }
    }
  }
}

}  // namespace

std::vector<std::string> schema_violations(const Json& schema, const Json& value) {
  std::vector<std::string> out;
  check_node(schema, value, "$", out);
  return out;
}

}  // namespace chaoscycle

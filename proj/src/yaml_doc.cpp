#include "chaoscycle/yaml_doc.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <regex>
#include <sstream>

namespace chaoscycle {

namespace {

// Plain-scalar typing follows the YAML core schema: ints, floats, bools and
// null keep their type; everything else stays a string. Quoted scalars are
// always strings.
Json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // explicitly quoted

  static const std::regex int_re(R"(^[-+]?\d+$)");
  static const std::regex float_re(R"(^[-+]?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?$)");
  if (s == "null" || s == "Null" || s == "NULL" || s == "~" || s.empty())
    return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (std::regex_match(s, int_re)) {
    try {
      return static_cast<long long>(std::stoll(s));
    } catch (const std::out_of_range&) {
      return s;
    }
  }
  if (std::regex_match(s, float_re) && s.find_first_of(".eE") != std::string::npos) {
    try {
      return std::stod(s);
    } catch (const std::out_of_range&) {
      return s;
    }
  }
  return s;
}

Json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      Json arr = Json::array();
      for (const auto& item : node) arr.push_back(node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      Json obj = Json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = node_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

bool scalar_needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  // Anything that would reparse as a different type or break the syntax.
  static const std::regex ambiguous(
      R"(^([-+]?\d+|[-+]?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?|true|True|TRUE|false|False|FALSE|null|Null|NULL|~|yes|Yes|no|No|on|On|off|Off)$)");
  if (std::regex_match(s, ambiguous)) return true;
  if (std::isspace(static_cast<unsigned char>(s.front())) ||
      std::isspace(static_cast<unsigned char>(s.back())))
    return true;
  static const std::string risky = ":#{}[],&*!|>'\"%@`";
  if (risky.find(s.front()) != std::string::npos) return true;
  if (s.find(": ") != std::string::npos || s.find(" #") != std::string::npos) return true;
  if (s.find('\n') != std::string::npos) return true;
  if (s.back() == ':') return true;
  return false;
}

std::string quote_scalar(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += "\"";
  return out;
}

std::string scalar_text(const Json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    return scalar_needs_quotes(s) ? quote_scalar(s) : s;
  }
  return v.dump();  // numbers: shortest round-trip form
}

void emit_node(std::ostringstream& out, const Json& node, int indent, bool fuse_first);

// Object entries at pad(indent); with fuse_first the caller already wrote the
// first line's prefix ("- " after pad(indent-1), which lines up with
// pad(indent)).
void emit_object(std::ostringstream& out, const Json& node, int indent, bool fuse_first) {
  const std::string pad(static_cast<size_t>(indent) * 2, ' ');
  bool first = true;
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key =
        scalar_needs_quotes(it.key()) ? quote_scalar(it.key()) : it.key();
    if (!(first && fuse_first)) out << pad;
    first = false;
    const Json& v = it.value();
    if ((v.is_object() || v.is_array()) && !v.empty()) {
      out << key << ":\n";
      emit_node(out, v, indent + 1, false);
    } else if (v.is_object()) {
      out << key << ": {}\n";
    } else if (v.is_array()) {
      out << key << ": []\n";
    } else {
      out << key << ": " << scalar_text(v) << "\n";
    }
  }
}

void emit_node(std::ostringstream& out, const Json& node, int indent, bool fuse_first) {
  const std::string pad(static_cast<size_t>(indent) * 2, ' ');
  if (node.is_object()) {
    emit_object(out, node, indent, fuse_first);
  } else if (node.is_array()) {
    for (const Json& v : node) {
      if (v.is_object() && !v.empty()) {
        out << pad << "- ";
        emit_object(out, v, indent + 1, true);
      } else if (v.is_array() && !v.empty()) {
        out << pad << "-\n";
        emit_node(out, v, indent + 1, false);
      } else if (v.is_object()) {
        out << pad << "- {}\n";
      } else if (v.is_array()) {
        out << pad << "- []\n";
      } else {
        out << pad << "- " << scalar_text(v) << "\n";
      }
    }
  } else {
    out << pad << scalar_text(node) << "\n";
  }
}

}  // namespace

std::vector<Json> parse_yaml_documents(const std::string& text, const std::string& path) {
  std::vector<YAML::Node> nodes;
  try {
    nodes = YAML::LoadAll(text);
  } catch (const YAML::ParserException& e) {
    fail(ErrorCode::MalformedDocument,
         path + ":" + std::to_string(e.mark.line + 1) + ":" +
             std::to_string(e.mark.column + 1) + ": " + e.msg);
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::MalformedDocument, path + ": " + e.what());
  }
  std::vector<Json> docs;
  for (const auto& node : nodes) {
    if (node.IsNull() || !node.IsDefined()) continue;
    docs.push_back(node_to_json(node));
  }
  return docs;
}

std::string emit_yaml(const Json& doc) {
  std::ostringstream out;
  emit_node(out, doc, 0, false);
  return out.str();
}

std::string emit_yaml_documents(const std::vector<Json>& docs) {
  std::ostringstream out;
  for (size_t i = 0; i < docs.size(); ++i) {
    if (i > 0) out << "---\n";
    out << emit_yaml(docs[i]);
  }
  return out.str();
}

}  // namespace chaoscycle

#pragma once

#include <string>
#include <vector>

#include "chaoscycle/model.hpp"

// YAML <-> document-tree bridge for Kubernetes manifest files. Parsing goes
// through yaml-cpp; emission is a small deterministic writer so identical
// trees always produce identical bytes.

namespace chaoscycle {

// Parses a (possibly multi-document) YAML text into one tree per document.
// Empty documents are skipped. Throws CycleError(MalformedDocument) with the
// given path and the parser's position on error.
std::vector<Json> parse_yaml_documents(const std::string& text, const std::string& path);

// Emits one document tree as YAML (block style, 2-space indent).
std::string emit_yaml(const Json& doc);

// Emits several trees as a multi-document YAML file ('---' separators).
std::string emit_yaml_documents(const std::vector<Json>& docs);

}  // namespace chaoscycle

#pragma once

#include <string>
#include <vector>

#include "chaoscycle/model.hpp"

namespace chaoscycle {

// Minimal JSON-schema checker covering the subset the agent contracts use:
// type, properties, required, additionalProperties, items, enum,
// minimum/maximum, minItems, minLength. Returns human-readable violations,
// empty when the value conforms.
std::vector<std::string> schema_violations(const Json& schema, const Json& value);

}  // namespace chaoscycle

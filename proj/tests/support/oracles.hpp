#pragma once

#include <map>
#include <string>
#include <vector>

#include "chaoscycle/model.hpp"

// Independent test oracles. These deliberately re-derive expected values with
// straight-line implementations that share no code with the library paths
// they check.

namespace chaoscycle::oracle {

// Nearest-rank p95: smallest value with at least 95% of the series at or
// below it (counting loop, no sort of the original).
double p95(const std::vector<double>& values);

// Re-aggregates a sample series per aggregation + comparator semantics.
double aggregate(const std::vector<Sample>& samples, Aggregation aggregation,
                 Comparator comparator, double threshold_value);

// Plain every-pair subset check.
bool selector_matches(const std::map<std::string, std::string>& selector,
                      const std::map<std::string, std::string>& labels);

// Recursive structural comparison of two JSON documents; returns the sorted
// list of paths whose values differ (dot/bracket notation).
std::vector<std::string> json_changed_paths(const Json& a, const Json& b);

}  // namespace chaoscycle::oracle

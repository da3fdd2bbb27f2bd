#pragma once

#include <optional>
#include <string_view>

namespace tightness {

// State-space metrics. bounded_euclidean is 1 ∧ |x-y|; exp_compactified is
// |e^-x - e^-y| on [0, +inf] (so +inf is a legal state at distance e^-x from x).
enum class Metric {
  euclidean,
  bounded_euclidean,
  exp_compactified,
};

double metric_distance(Metric m, double x, double y);

// The capped companion 1 ∧ d: euclidean maps to bounded_euclidean; the two
// metrics that never exceed 1 are their own cap.
Metric capped_metric(Metric m);

const char* metric_name(Metric m);

// Accepts canonical names plus the short CLI aliases "bounded" and "exp".
std::optional<Metric> metric_from_name(std::string_view name);

}  // namespace tightness

#include "tightness/metric.hpp"

#include <cmath>

namespace tightness {

double metric_distance(Metric m, double x, double y) {
  switch (m) {
    case Metric::euclidean:
      return std::fabs(x - y);
    case Metric::bounded_euclidean: {
      double d = std::fabs(x - y);
      return d < 1.0 ? d : 1.0;
    }
    case Metric::exp_compactified:
      return std::fabs(std::exp(-x) - std::exp(-y));
  }
  return 0.0;
}

Metric capped_metric(Metric m) {
  return m == Metric::euclidean ? Metric::bounded_euclidean : m;
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::euclidean:
      return "euclidean";
    case Metric::bounded_euclidean:
      return "bounded_euclidean";
    case Metric::exp_compactified:
      return "exp_compactified";
  }
  return "?";
}

std::optional<Metric> metric_from_name(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "bounded_euclidean" || name == "bounded")
    return Metric::bounded_euclidean;
  if (name == "exp_compactified" || name == "exp")
    return Metric::exp_compactified;
  return std::nullopt;
}

}  // namespace tightness

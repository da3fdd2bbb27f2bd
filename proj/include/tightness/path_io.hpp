#pragma once

#include <array>
#include <string>
#include <vector>

#include "tightness/monotone_control.hpp"
#include "tightness/step_path.hpp"

namespace tightness {

// Shortest exact decimal for CSV output (%.17g round-trips doubles).
std::string format_double(double v);

/**
 * CSV path format: metadata lines `# key=value` first (horizon always,
 * absorbed when set, slope for controls), then a `t,value` header, then one
 * row per value change starting with (t0, initial).
 *
 * A control is serialized as the path of its step part (cumulative atom
 * mass); the reader reconstructs atom sizes by differencing, so sizes are
 * exact up to one rounding per atom.
 */
std::string write_path_csv(const StepPath& path);
StepPath read_path_csv(const std::string& text);

std::string write_control_csv(const MonotoneControl& control);
MonotoneControl read_control_csv(const std::string& text);

// Bare two-column numeric CSV (optional header), e.g. catastrophe schedules
// as (time, theta) rows.
std::vector<std::array<double, 2>> read_pairs_csv(const std::string& text);

}  // namespace tightness

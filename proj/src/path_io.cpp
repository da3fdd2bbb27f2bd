#include "tightness/path_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace tightness {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

struct Meta {
  double horizon = 0;
  bool has_horizon = false;
  double slope = 0;
  bool has_slope = false;
  bool absorbed = false;
};

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("csv line " + std::to_string(line_no) + ": " + what);
}

double parse_number(const std::string& s, std::size_t line_no) {
  const char* c = s.c_str();
  char* end = nullptr;
  double v = std::strtod(c, &end);
  while (end && *end == ' ') ++end;
  if (end == c || (end && *end != '\0')) fail(line_no, "bad number '" + s + "'");
  return v;
}

std::string trim(std::string s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Shared scanner for the path/control CSV dialect.
void scan(const std::string& text, Meta& meta,
          std::vector<std::array<double, 2>>& rows, bool allow_slope) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = trim(line.substr(1));
      std::size_t eq = body.find('=');
      if (eq == std::string::npos) fail(line_no, "metadata without '='");
      std::string key = trim(body.substr(0, eq));
      std::string val = trim(body.substr(eq + 1));
      if (key == "horizon") {
        meta.horizon = parse_number(val, line_no);
        meta.has_horizon = true;
      } else if (key == "slope" && allow_slope) {
        meta.slope = parse_number(val, line_no);
        meta.has_slope = true;
      } else if (key == "absorbed" && !allow_slope) {
        meta.absorbed = parse_number(val, line_no) != 0;
      } else {
        fail(line_no, "unknown metadata key '" + key + "'");
      }
      continue;
    }
    if (!header_seen) {
      if (line != "t,value") fail(line_no, "expected header 't,value'");
      header_seen = true;
      continue;
    }
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) fail(line_no, "expected two columns");
    rows.push_back({parse_number(trim(line.substr(0, comma)), line_no),
                    parse_number(trim(line.substr(comma + 1)), line_no)});
  }
  if (!meta.has_horizon) throw std::runtime_error("csv: missing '# horizon='");
  if (rows.empty()) throw std::runtime_error("csv: no data rows");
}

}  // namespace

std::string write_path_csv(const StepPath& path) {
  std::string out = "# horizon=" + format_double(path.horizon()) + "\n";
  if (path.absorbed()) out += "# absorbed=1\n";
  out += "t,value\n";
  out += format_double(path.t0()) + "," + format_double(path.initial_value()) +
         "\n";
  for (const StepPath::Jump& j : path.jumps())
    out += format_double(j.time) + "," + format_double(j.value) + "\n";
  return out;
}

StepPath read_path_csv(const std::string& text) {
  Meta meta;
  std::vector<std::array<double, 2>> rows;
  scan(text, meta, rows, /*allow_slope=*/false);
  std::vector<StepPath::Jump> jumps;
  jumps.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i)
    jumps.push_back({rows[i][0], rows[i][1]});
  return StepPath(rows[0][0], rows[0][1], std::move(jumps), meta.horizon,
                  meta.absorbed);
}

std::string write_control_csv(const MonotoneControl& control) {
  std::string out = "# horizon=" + format_double(control.horizon()) + "\n";
  out += "# slope=" + format_double(control.slope()) + "\n";
  out += "t,value\n";
  out += "0,0\n";
  double cum = 0;
  for (const MonotoneControl::Atom& a : control.atoms()) {
    cum += a.size;
    out += format_double(a.time) + "," + format_double(cum) + "\n";
  }
  return out;
}

MonotoneControl read_control_csv(const std::string& text) {
  Meta meta;
  std::vector<std::array<double, 2>> rows;
  scan(text, meta, rows, /*allow_slope=*/true);
  if (!(rows[0][0] == 0 && rows[0][1] == 0))
    throw std::runtime_error("control csv: first row must be 0,0");
  std::vector<MonotoneControl::Atom> atoms;
  atoms.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double size = rows[i][1] - rows[i - 1][1];
    atoms.push_back({rows[i][0], size});
  }
  return MonotoneControl(meta.has_slope ? meta.slope : 0.0, std::move(atoms),
                         meta.horizon);
}

std::vector<std::array<double, 2>> read_pairs_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::array<double, 2>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) fail(line_no, "expected two columns");
    std::string a = trim(line.substr(0, comma));
    std::string b = trim(line.substr(comma + 1));
    // skip one optional non-numeric header line
    char* end = nullptr;
    std::strtod(a.c_str(), &end);
    if (end == a.c_str() && rows.empty()) continue;
    rows.push_back({parse_number(a, line_no), parse_number(b, line_no)});
  }
  return rows;
}

}  // namespace tightness

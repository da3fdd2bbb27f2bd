#include "tightness/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "tightness/path_io.hpp"

namespace tightness {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "configuration invalid:";
  for (const auto& p : problems) {
    out += "\n  - ";
    out += p;
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct RawEntry {
  std::string value;
  int line = 0;
  bool used = false;
};

// Section-qualified key -> raw value, plus errors for malformed lines.
struct RawConfig {
  std::map<std::string, RawEntry> entries;
  std::vector<std::string> problems;
};

RawConfig scan(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        raw.problems.push_back("line " + std::to_string(lineno) +
                               ": malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raw.problems.push_back("line " + std::to_string(lineno) +
                             ": expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      raw.problems.push_back("line " + std::to_string(lineno) +
                             ": empty key");
      continue;
    }
    if (section.empty()) {
      raw.problems.push_back("line " + std::to_string(lineno) + ": key '" +
                             key + "' outside any [section]");
      continue;
    }
    const std::string full = section + "." + key;
    if (raw.entries.count(full)) {
      raw.problems.push_back("line " + std::to_string(lineno) +
                             ": duplicate key '" + full + "'");
      continue;
    }
    raw.entries[full] = {value, lineno, false};
  }
  return raw;
}

class Reader {
 public:
  Reader(RawConfig& raw) : raw_(raw) {}

  bool has(const std::string& key) {
    auto it = raw_.entries.find(key);
    if (it == raw_.entries.end()) return false;
    it->second.used = true;
    return true;
  }

  template <class F>
  void with(const std::string& key, F&& parse) {
    auto it = raw_.entries.find(key);
    if (it == raw_.entries.end()) return;
    it->second.used = true;
    parse(it->second.value);
  }

  void problem(const std::string& key, const std::string& what) {
    raw_.problems.push_back("key '" + key + "': " + what);
  }

  void scalar(const std::string& key, double& out) {
    with(key, [&](const std::string& v) {
      if (!parse_double(v, out)) problem(key, "not a number: '" + v + "'");
    });
  }

  void integer(const std::string& key, long& out) {
    with(key, [&](const std::string& v) {
      double d;
      if (!parse_double(v, d) || d != std::floor(d) ||
          std::fabs(d) > 9.0e15) {
        problem(key, "not an integer: '" + v + "'");
        return;
      }
      out = static_cast<long>(d);
    });
  }

  void integer(const std::string& key, int& out) {
    long l = out;
    const std::size_t before = raw_.problems.size();
    integer(key, l);
    if (raw_.problems.size() == before) out = static_cast<int>(l);
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    with(key, [&](const std::string& v) {
      try {
        std::size_t pos = 0;
        const unsigned long long parsed = std::stoull(v, &pos, 0);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        out = parsed;
      } catch (const std::exception&) {
        problem(key, "not an unsigned integer: '" + v + "'");
      }
    });
  }

  void list(const std::string& key, std::vector<double>& out) {
    with(key, [&](const std::string& v) {
      std::vector<double> vals;
      std::istringstream in(v);
      std::string tok;
      while (in >> tok) {
        double d;
        if (!parse_double(tok, d)) {
          problem(key, "not a number: '" + tok + "'");
          return;
        }
        vals.push_back(d);
      }
      if (vals.empty()) {
        problem(key, "empty list");
        return;
      }
      out = std::move(vals);
    });
  }

  void words(const std::string& key, std::vector<std::string>& out) {
    with(key, [&](const std::string& v) {
      std::vector<std::string> vals;
      std::istringstream in(v);
      std::string tok;
      while (in >> tok) vals.push_back(tok);
      out = std::move(vals);
    });
  }

  void optional_scalar(const std::string& key, std::optional<double>& out) {
    with(key, [&](const std::string& v) {
      double d;
      if (!parse_double(v, d)) {
        problem(key, "not a number: '" + v + "'");
        return;
      }
      out = d;
    });
  }

 private:
  static bool parse_double(const std::string& s, double& out) {
    try {
      std::size_t pos = 0;
      out = std::stod(s, &pos);
      return pos == s.size();
    } catch (const std::exception&) {
      return false;
    }
  }

  RawConfig& raw_;
};

const std::set<std::string>& known_checks() {
  static const std::set<std::string> k{"simulate", "a1",      "a2",
                                       "a2prime",  "lemma23", "tightness",
                                       "mproxy"};
  return k;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)),
      issues(std::move(problems)) {}

CatastropheSchedule ScheduleSpec::build(double T) const {
  switch (kind) {
    case Kind::none:
      return CatastropheSchedule();
    case Kind::geometric:
      return CatastropheSchedule::geometric(T, r, theta, k_max);
    case Kind::explicit_list: {
      std::vector<CatastropheSchedule::Atom> atoms;
      for (std::size_t i = 0; i < times.size(); ++i) {
        atoms.push_back({times[i], thetas[i]});
      }
      return CatastropheSchedule(std::move(atoms));
    }
  }
  return CatastropheSchedule();
}

ModelFamily ExperimentConfig::family() const {
  return ModelFamily{lambda, mu, kappa, gamma, x0, T, schedule.build(T)};
}

ExperimentConfig parse_config(const std::string& text,
                              const CliOverrides& overrides) {
  RawConfig raw = scan(text);
  Reader r(raw);
  ExperimentConfig cfg;

  r.scalar("model.lambda", cfg.lambda);
  r.scalar("model.mu", cfg.mu);
  r.scalar("model.kappa", cfg.kappa);
  r.scalar("model.gamma", cfg.gamma);
  r.scalar("model.x0", cfg.x0);
  r.scalar("model.T", cfg.T);
  {
    std::vector<double> ns;
    r.list("model.n_grid", ns);
    if (!ns.empty()) {
      cfg.n_grid.clear();
      for (double v : ns) {
        if (v != std::floor(v) || !(v >= 1)) {
          r.problem("model.n_grid", "entries must be integers >= 1");
          cfg.n_grid = {100};
          break;
        }
        cfg.n_grid.push_back(static_cast<long>(v));
      }
    }
  }

  std::string schedule_kind = "none";
  r.with("schedule.kind", [&](const std::string& v) { schedule_kind = v; });
  if (schedule_kind == "none") {
    cfg.schedule.kind = ScheduleSpec::Kind::none;
  } else if (schedule_kind == "geometric") {
    cfg.schedule.kind = ScheduleSpec::Kind::geometric;
  } else if (schedule_kind == "explicit") {
    cfg.schedule.kind = ScheduleSpec::Kind::explicit_list;
  } else {
    r.problem("schedule.kind",
              "must be one of none, geometric, explicit; got '" +
                  schedule_kind + "'");
  }
  r.scalar("schedule.r", cfg.schedule.r);
  r.scalar("schedule.theta", cfg.schedule.theta);
  r.integer("schedule.k_max", cfg.schedule.k_max);
  r.list("schedule.times", cfg.schedule.times);
  r.list("schedule.thetas", cfg.schedule.thetas);

  bool seed_seen = r.has("run.seed");
  if (seed_seen) {
    r.unsigned64("run.seed", cfg.seed);
  }
  {
    long reps = static_cast<long>(cfg.replicas);
    r.integer("run.replicas", reps);
    if (reps < 0) {
      r.problem("run.replicas", "must be >= 0");
    } else {
      cfg.replicas = static_cast<std::size_t>(reps);
    }
  }
  r.with("run.out", [&](const std::string& v) { cfg.out_dir = v; });
  r.integer("run.threads", cfg.threads);
  r.words("run.checks", cfg.checks);

  r.integer("simulate.paths", cfg.simulate.paths);
  r.integer("simulate.grid_points", cfg.simulate.grid_points);

  r.list("a1.K_grid", cfg.a1.K_grid);
  r.list("a1.eps_levels", cfg.a1.eps_levels);

  r.scalar("a2.K", cfg.a2.K);
  r.optional_scalar("a2.c_k", cfg.a2.c_k);
  r.optional_scalar("a2.eta_bar0", cfg.a2.eta_bar0);
  r.list("a2.grid_s", cfg.a2.grid_s);
  r.list("a2.grid_t", cfg.a2.grid_t);
  r.list("a2.grid_x0", cfg.a2.grid_x0);

  r.scalar("lemma23.epsilon", cfg.lemma23.epsilon);
  r.scalar("lemma23.eta", cfg.lemma23.eta);
  r.integer("lemma23.m", cfg.lemma23.m);
  r.scalar("lemma23.partition_epsilon", cfg.lemma23.partition_epsilon);

  r.list("tightness.eta_grid", cfg.tightness.eta_grid);
  r.scalar("tightness.delta", cfg.tightness.delta);

  r.scalar("mproxy.b_lo", cfg.mproxy.b_lo);
  r.scalar("mproxy.b_hi", cfg.mproxy.b_hi);
  r.scalar("mproxy.eta", cfg.mproxy.eta);
  r.scalar("mproxy.K", cfg.mproxy.K);
  r.list("mproxy.eps_family", cfg.mproxy.eps_family);

  for (const auto& [key, entry] : raw.entries) {
    if (!entry.used) {
      raw.problems.push_back("line " + std::to_string(entry.line) +
                             ": unknown key '" + key + "'");
    }
  }

  if (overrides.seed) {
    cfg.seed = *overrides.seed;
    seed_seen = true;
  }
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.threads) cfg.threads = *overrides.threads;

  // Semantic validation; keep going to report everything at once.
  if (!seed_seen) {
    raw.problems.push_back(
        "key 'run.seed': mandatory (wall-clock seeding is forbidden)");
  }
  if (!(cfg.T > 0) || !std::isfinite(cfg.T)) {
    raw.problems.push_back("key 'model.T': must be positive");
  }
  if (!(cfg.x0 >= 0)) {
    raw.problems.push_back("key 'model.x0': must be >= 0");
  }
  if (cfg.threads < 1) {
    raw.problems.push_back("key 'run.threads': must be >= 1");
  }
  for (const auto& c : cfg.checks) {
    if (!known_checks().count(c)) {
      raw.problems.push_back("key 'run.checks': unknown check '" + c + "'");
    }
  }
  if (cfg.schedule.kind == ScheduleSpec::Kind::geometric) {
    if (!(cfg.schedule.r > 0 && cfg.schedule.r < 1)) {
      raw.problems.push_back("key 'schedule.r': must lie in (0, 1)");
    }
    if (cfg.schedule.k_max < 0) {
      raw.problems.push_back("key 'schedule.k_max': must be >= 0");
    }
    if (!(cfg.schedule.theta >= 0 && cfg.schedule.theta <= 1)) {
      raw.problems.push_back("key 'schedule.theta': must lie in [0, 1]");
    }
  }
  if (cfg.schedule.kind == ScheduleSpec::Kind::explicit_list) {
    if (cfg.schedule.times.size() != cfg.schedule.thetas.size()) {
      raw.problems.push_back(
          "keys 'schedule.times'/'schedule.thetas': lengths differ");
    }
    double prev = 0;
    for (double t : cfg.schedule.times) {
      if (!(t > prev) || t > cfg.T) {
        raw.problems.push_back(
            "key 'schedule.times': must be strictly increasing in (0, T]");
        break;
      }
      prev = t;
    }
    for (double th : cfg.schedule.thetas) {
      if (!(th >= 0 && th <= 1)) {
        raw.problems.push_back("key 'schedule.thetas': must lie in [0, 1]");
        break;
      }
    }
  }
  if (cfg.simulate.paths < 1) {
    raw.problems.push_back("key 'simulate.paths': must be >= 1");
  }
  if (cfg.simulate.grid_points < 0) {
    raw.problems.push_back("key 'simulate.grid_points': must be >= 0");
  }
  if (!(cfg.lemma23.epsilon > 0)) {
    raw.problems.push_back("key 'lemma23.epsilon': must be > 0");
  }
  if (cfg.lemma23.m < 1) {
    raw.problems.push_back("key 'lemma23.m': must be >= 1");
  }
  if (!(cfg.lemma23.partition_epsilon > 0)) {
    raw.problems.push_back("key 'lemma23.partition_epsilon': must be > 0");
  }
  if (!(cfg.tightness.delta > 0)) {
    raw.problems.push_back("key 'tightness.delta': must be > 0");
  }
  for (double e : cfg.tightness.eta_grid) {
    if (!(e > 0)) {
      raw.problems.push_back("key 'tightness.eta_grid': entries must be > 0");
      break;
    }
  }
  if (!(cfg.a2.K > 0)) {
    raw.problems.push_back("key 'a2.K': must be > 0");
  }
  if (!(cfg.mproxy.K > 0)) {
    raw.problems.push_back("key 'mproxy.K': must be > 0");
  }

  // Defaults that depend on the model block.
  if (cfg.a2.grid_s.empty()) cfg.a2.grid_s = {0.0, cfg.T / 2};
  if (cfg.a2.grid_t.empty()) cfg.a2.grid_t = {cfg.T / 2, cfg.T};
  if (cfg.a2.grid_x0.empty()) cfg.a2.grid_x0 = {cfg.x0};
  if (cfg.mproxy.b_hi == 0) cfg.mproxy.b_hi = cfg.T;
  if (cfg.mproxy.eta == 0) cfg.mproxy.eta = cfg.T / 8;
  for (double v : cfg.a2.grid_s) {
    if (!(v >= 0 && v <= cfg.T)) {
      raw.problems.push_back("key 'a2.grid_s': entries must lie in [0, T]");
      break;
    }
  }
  for (double v : cfg.a2.grid_t) {
    if (!(v >= 0 && v <= cfg.T)) {
      raw.problems.push_back("key 'a2.grid_t': entries must lie in [0, T]");
      break;
    }
  }

  if (!raw.problems.empty()) throw ConfigError(std::move(raw.problems));
  return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto put = [&](const char* key, const std::string& v) {
    out << key << "=" << v << "\n";
  };
  const auto num = [&](const char* key, double v) {
    put(key, format_double(v));
  };
  const auto lst = [&](const char* key, const std::vector<double>& v) {
    std::string s;
    for (double d : v) {
      if (!s.empty()) s += " ";
      s += format_double(d);
    }
    put(key, s);
  };

  num("model.lambda", cfg.lambda);
  num("model.mu", cfg.mu);
  num("model.kappa", cfg.kappa);
  num("model.gamma", cfg.gamma);
  num("model.x0", cfg.x0);
  num("model.T", cfg.T);
  {
    std::string s;
    for (long n : cfg.n_grid) {
      if (!s.empty()) s += " ";
      s += std::to_string(n);
    }
    put("model.n_grid", s);
  }
  switch (cfg.schedule.kind) {
    case ScheduleSpec::Kind::none:
      put("schedule.kind", "none");
      break;
    case ScheduleSpec::Kind::geometric:
      put("schedule.kind", "geometric");
      num("schedule.r", cfg.schedule.r);
      num("schedule.theta", cfg.schedule.theta);
      put("schedule.k_max", std::to_string(cfg.schedule.k_max));
      break;
    case ScheduleSpec::Kind::explicit_list:
      put("schedule.kind", "explicit");
      lst("schedule.times", cfg.schedule.times);
      lst("schedule.thetas", cfg.schedule.thetas);
      break;
  }
  put("run.seed", std::to_string(cfg.seed));
  put("run.replicas", std::to_string(cfg.replicas));
  put("run.threads", std::to_string(cfg.threads));
  {
    std::string s;
    for (const auto& c : cfg.checks) {
      if (!s.empty()) s += " ";
      s += c;
    }
    put("run.checks", s);
  }
  put("simulate.paths", std::to_string(cfg.simulate.paths));
  put("simulate.grid_points", std::to_string(cfg.simulate.grid_points));
  lst("a1.K_grid", cfg.a1.K_grid);
  lst("a1.eps_levels", cfg.a1.eps_levels);
  num("a2.K", cfg.a2.K);
  if (cfg.a2.c_k) num("a2.c_k", *cfg.a2.c_k);
  if (cfg.a2.eta_bar0) num("a2.eta_bar0", *cfg.a2.eta_bar0);
  lst("a2.grid_s", cfg.a2.grid_s);
  lst("a2.grid_t", cfg.a2.grid_t);
  lst("a2.grid_x0", cfg.a2.grid_x0);
  num("lemma23.epsilon", cfg.lemma23.epsilon);
  num("lemma23.eta", cfg.lemma23.eta);
  put("lemma23.m", std::to_string(cfg.lemma23.m));
  num("lemma23.partition_epsilon", cfg.lemma23.partition_epsilon);
  lst("tightness.eta_grid", cfg.tightness.eta_grid);
  num("tightness.delta", cfg.tightness.delta);
  num("mproxy.b_lo", cfg.mproxy.b_lo);
  num("mproxy.b_hi", cfg.mproxy.b_hi);
  num("mproxy.eta", cfg.mproxy.eta);
  num("mproxy.K", cfg.mproxy.K);
  lst("mproxy.eps_family", cfg.mproxy.eps_family);
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string canon = canonical_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace tightness

#include "tightness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tightness/control_partition.hpp"
#include "tightness/path_io.hpp"
#include "tightness/rng.hpp"
#include "tightness/simulate.hpp"
#include "tightness/verify.hpp"
#include "tightness/version.hpp"

namespace tightness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kTagSimulate = 0x51e0d7b2a73c5e11ull;
constexpr std::uint64_t kTagLemma = 0x23ba7790c4f0862dull;

std::string now_iso() {
  const std::time_t tt =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

json estimate_json(const MCEstimate& e) {
  return json{{"count", e.count},
              {"mean", e.mean},
              {"variance", e.variance},
              {"ci_halfwidth", e.ci_halfwidth}};
}

class Table {
 public:
  explicit Table(std::string header) : out_(std::move(header)) {
    out_ += "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ",";
      out_ += cells[i];
    }
    out_ += "\n";
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

std::string fd(double v) { return format_double(v); }

struct CheckContext {
  const ExperimentConfig& cfg;
  const ModelFamily& family;
  fs::path dir;

  std::string save(const std::string& name, const std::string& content,
                   CheckOutcome& outcome) const {
    write_file_atomic(dir / name, content);
    outcome.files.push_back(name);
    return name;
  }
};

void run_simulate(const CheckContext& ctx, CheckOutcome& out) {
  const ExperimentConfig& cfg = ctx.cfg;
  Table summary("n,replica,events,terminal");
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const long n = cfg.n_grid[ni];
    const LbpwcParams p = ctx.family.params_for(n);
    for (int i = 0; i < cfg.simulate.paths; ++i) {
      RngStream rng(cfg.seed,
                    hash_combine(hash_combine(kTagSimulate, ni),
                                 static_cast<std::uint64_t>(i)));
      std::string name = "path_n" + std::to_string(n) + "_r" +
                         std::to_string(i) + ".csv";
      if (cfg.simulate.grid_points == 0) {
        const StepPath path = simulate_lbpwc(p, ctx.family.schedule, rng);
        ctx.save(name, write_path_csv(path), out);
        summary.row({std::to_string(n), std::to_string(i),
                     std::to_string(path.jumps().size()),
                     fd(path.value_at(p.T))});
      } else {
        std::vector<double> times;
        for (int j = 1; j <= cfg.simulate.grid_points; ++j) {
          times.push_back(p.T * static_cast<double>(j) /
                          cfg.simulate.grid_points);
        }
        const std::vector<double> values =
            simulate_lbpwc_grid(p, ctx.family.schedule, rng, times);
        Table t("t,value");
        for (std::size_t j = 0; j < times.size(); ++j) {
          t.row({fd(times[j]), fd(values[j])});
        }
        ctx.save(name, t.str(), out);
        summary.row({std::to_string(n), std::to_string(i),
                     std::to_string(times.size()), fd(values.back())});
      }
    }
  }
  ctx.save("simulate_summary.csv", summary.str(), out);
}

void run_a1(const CheckContext& ctx, CheckOutcome& out) {
  const ExperimentConfig& cfg = ctx.cfg;
  const A1Result res =
      check_a1(ctx.family, cfg.n_grid, cfg.a1.K_grid, cfg.replicas, cfg.seed,
               cfg.a1.eps_levels, cfg.threads);
  Table t("n,K,p_hat,variance,ci_halfwidth,count");
  for (const auto& row : res.rows) {
    t.row({std::to_string(row.n), fd(row.K), fd(row.est.mean),
           fd(row.est.variance), fd(row.est.ci_halfwidth),
           std::to_string(row.est.count)});
  }
  ctx.save("a1_table.csv", t.str(), out);

  json rep;
  rep["check"] = "a1";
  rep["seed"] = cfg.seed;
  rep["grid"] = {{"n", cfg.n_grid}, {"K", cfg.a1.K_grid}};
  rep["note"] =
      "compact containment is checked for the finitely many K listed here";
  rep["estimates"] = json::array();
  for (const auto& row : res.rows) {
    json e = estimate_json(row.est);
    e["n"] = row.n;
    e["K"] = row.K;
    rep["estimates"].push_back(e);
  }
  rep["verdict"] = json::array();
  for (const auto& v : res.verdicts) {
    rep["verdict"].push_back(
        {{"eps", v.eps_level},
         {"smallest_K", v.found ? json(v.K) : json(nullptr)}});
  }
  ctx.save("a1_report.json", rep.dump(2) + "\n", out);
}

void run_a2(const CheckContext& ctx, bool prime, CheckOutcome& out) {
  const ExperimentConfig& cfg = ctx.cfg;
  if (prime && !cfg.a2.eta_bar0) {
    throw std::runtime_error(
        "a2prime requires a2.eta_bar0 in the configuration");
  }
  std::vector<std::array<double, 3>> grid;
  for (double s : cfg.a2.grid_s) {
    for (double t : cfg.a2.grid_t) {
      if (!(s <= t)) continue;
      for (double x0 : cfg.a2.grid_x0) grid.push_back({s, t, x0});
    }
  }
  if (grid.empty()) {
    throw std::runtime_error("a2 grid is empty after the s <= t filter");
  }
  const long n = cfg.n_grid.back();
  const MonotoneControl Fn = build_Fn(ctx.family.schedule, cfg.T);
  const A2Result res = check_a2(
      ctx.family, n, cfg.a2.K, Fn, grid, cfg.replicas, cfg.seed,
      prime ? cfg.a2.eta_bar0 : std::nullopt, cfg.a2.c_k, cfg.threads);

  const char* name = prime ? "a2prime" : "a2";
  Table t("s,t,x0,estimate,variance,ci_halfwidth,count,f_increment,ratio,hard_violation");
  for (const auto& p : res.points) {
    t.row({fd(p.s), fd(p.t), fd(p.x0), fd(p.est.mean), fd(p.est.variance),
           fd(p.est.ci_halfwidth), std::to_string(p.est.count),
           fd(p.f_increment), fd(p.ratio), p.hard_violation ? "1" : "0"});
  }
  ctx.save(std::string(name) + "_table.csv", t.str(), out);

  json rep;
  rep["check"] = name;
  rep["seed"] = cfg.seed;
  rep["n"] = n;
  rep["K"] = cfg.a2.K;
  rep["note"] =
      "the oscillation bound is checked for the single compact [0, K] "
      "configured here";
  rep["dropped_grid_points"] = res.dropped;
  rep["max_ratio"] = res.max_ratio;
  rep["max_ratio_minus_ci"] = res.max_ratio_minus_ci;
  rep["empirical_C_K"] = res.max_ratio;
  rep["any_hard_violation"] = res.any_hard_violation;
  if (res.c_k) {
    rep["configured_C_K"] = *res.c_k;
    rep["within_C_K"] = res.within_c_k;
  }
  rep["estimates"] = json::array();
  for (const auto& p : res.points) {
    json e = estimate_json(p.est);
    e["s"] = p.s;
    e["t"] = p.t;
    e["x0"] = p.x0;
    e["f_increment"] = p.f_increment;
    e["ratio"] = p.ratio;
    rep["estimates"].push_back(e);
  }
  const bool pass = !res.any_hard_violation && res.within_c_k;
  rep["verdict"] = pass ? "pass" : "fail";
  ctx.save(std::string(name) + "_report.json", rep.dump(2) + "\n", out);
  out.verdict_pass = pass;
}

void run_lemma23(const CheckContext& ctx, CheckOutcome& out) {
  const ExperimentConfig& cfg = ctx.cfg;
  const MonotoneControl Fn = build_Fn(ctx.family.schedule, cfg.T);
  const MeshCertificate cert =
      build_mesh_partition(Fn, cfg.T, cfg.lemma23.partition_epsilon);
  const Subdivision& bn = cert.subdivision;
  const double eta0 = bn.min_gap();
  const double eta =
      cfg.lemma23.eta > 0 ? cfg.lemma23.eta : eta0 / 4;
  if (!(eta > 0 && eta < eta0 / 2)) {
    std::ostringstream msg;
    msg << "lemma23: eta = " << eta
        << " violates 0 < eta < (smallest window)/2 = " << eta0 / 2;
    throw std::runtime_error(msg.str());
  }

  Table t("n,replica,windows,all_hold,min_margin");
  json violations = json::array();
  std::size_t violation_count = 0;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const LbpwcParams p = ctx.family.params_for(cfg.n_grid[ni]);
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      RngStream rng(cfg.seed, hash_combine(hash_combine(kTagLemma, ni), r));
      const StepPath path = simulate_lbpwc(p, ctx.family.schedule, rng);
      const LemmaReport rep = check_lemma_decomposition(
          path, bn, cfg.lemma23.epsilon, eta, cfg.lemma23.m);
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& w : rep.windows) {
        margin = std::min(margin, w.rhs - w.lhs);
        if (!w.holds) {
          ++violation_count;
          if (violations.size() < 32) {
            violations.push_back({{"n", cfg.n_grid[ni]},
                                  {"replica", r},
                                  {"b_lo", w.b_lo},
                                  {"b_hi", w.b_hi},
                                  {"lhs", w.lhs},
                                  {"rhs", w.rhs}});
          }
        }
      }
      t.row({std::to_string(cfg.n_grid[ni]), std::to_string(r),
             std::to_string(rep.windows.size()), rep.all_hold ? "1" : "0",
             fd(margin)});
    }
  }
  ctx.save("lemma23_table.csv", t.str(), out);

  json rep;
  rep["check"] = "lemma23";
  rep["seed"] = cfg.seed;
  rep["grid"] = {{"n", cfg.n_grid},
                 {"breakpoints", bn.breakpoints()},
                 {"epsilon", cfg.lemma23.epsilon},
                 {"eta", eta},
                 {"m", cfg.lemma23.m}};
  rep["estimates"] = {{"replicas", cfg.replicas},
                      {"violations", violation_count}};
  rep["violation_details"] = violations;
  rep["verdict"] = violation_count == 0 ? "pass" : "fail";
  ctx.save("lemma23_report.json", rep.dump(2) + "\n", out);
  out.verdict_pass = violation_count == 0;
}

void run_tightness(const CheckContext& ctx, CheckOutcome& out) {
  const ExperimentConfig& cfg = ctx.cfg;
  const TightnessResult res =
      tightness_curve(ctx.family, cfg.n_grid, cfg.tightness.eta_grid,
                      cfg.tightness.delta, cfg.replicas, cfg.seed,
                      cfg.threads);
  Table t("n,eta,p_hat,variance,ci_halfwidth,count");
  for (const auto& row : res.rows) {
    t.row({std::to_string(row.n), fd(row.eta), fd(row.est.mean),
           fd(row.est.variance), fd(row.est.ci_halfwidth),
           std::to_string(row.est.count)});
  }
  ctx.save("tightness_matrix.csv", t.str(), out);

  json rep;
  rep["check"] = "tightness";
  rep["seed"] = cfg.seed;
  rep["grid"] = {{"n", cfg.n_grid},
                 {"eta", cfg.tightness.eta_grid},
                 {"delta", cfg.tightness.delta}};
  rep["estimates"] = json::array();
  for (const auto& row : res.rows) {
    json e = estimate_json(row.est);
    e["n"] = row.n;
    e["eta"] = row.eta;
    rep["estimates"].push_back(e);
  }
  rep["verdict"] = "reported";
  ctx.save("tightness_report.json", rep.dump(2) + "\n", out);
}

void run_mproxy(const CheckContext& ctx, CheckOutcome& out) {
  const ExperimentConfig& cfg = ctx.cfg;
  const MonotoneControl Fn = build_Fn(ctx.family.schedule, cfg.T);
  const long n = cfg.n_grid.back();
  const MProxyResult res =
      m_proxy(ctx.family, n, Fn, cfg.mproxy.b_lo, cfg.mproxy.b_hi,
              cfg.mproxy.eta, cfg.mproxy.K, cfg.mproxy.eps_family,
              cfg.replicas, cfg.seed, cfg.threads);
  Table t("estimate,variance,ci_halfwidth,count,bound,within");
  t.row({fd(res.est.mean), fd(res.est.variance), fd(res.est.ci_halfwidth),
         std::to_string(res.est.count), fd(res.bound),
         res.within ? "1" : "0"});
  ctx.save("mproxy_table.csv", t.str(), out);

  json rep;
  rep["check"] = "mproxy";
  rep["seed"] = cfg.seed;
  rep["n"] = n;
  rep["grid"] = {{"b_lo", cfg.mproxy.b_lo},
                 {"b_hi", cfg.mproxy.b_hi},
                 {"eta", cfg.mproxy.eta},
                 {"K", cfg.mproxy.K},
                 {"eps_family", cfg.mproxy.eps_family}};
  rep["estimates"] = estimate_json(res.est);
  rep["bound"] = res.bound;
  rep["best_pair"] = res.best_pair;
  rep["verdict"] = res.within ? "pass" : "fail";
  ctx.save("mproxy_report.json", rep.dump(2) + "\n", out);
  out.verdict_pass = res.within;
}

json manifest_json(const RunManifest& man) {
  json j;
  j["config_hash"] = man.config_hash_hex;
  j["version"] = man.version;
  j["started_at"] = man.started_at;
  j["finished_at"] = man.finished_at;
  j["complete"] = man.complete;
  j["checks"] = json::array();
  for (const auto& c : man.checks) {
    j["checks"].push_back({{"check", c.check},
                           {"verdict_pass", c.verdict_pass},
                           {"files", c.files}});
  }
  return j;
}

}  // namespace

bool RunManifest::all_verdicts_pass() const {
  for (const auto& c : checks) {
    if (!c.verdict_pass) return false;
  }
  return true;
}

std::function<void(const std::string&)>& write_fault_hook() {
  static std::function<void(const std::string&)> hook;
  return hook;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  if (write_fault_hook()) write_fault_hook()(path.string());
  fs::rename(tmp, path);
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  RunManifest man;
  man.version = kVersion;
  man.config_hash_hex = hash_hex(config_hash(cfg));
  man.started_at = now_iso();

  write_file_atomic(dir / "config_canonical.txt", canonical_config(cfg));
  const ModelFamily family = cfg.family();
  const CheckContext ctx{cfg, family, dir};

  const auto finish = [&](bool complete) {
    man.complete = complete;
    man.finished_at = now_iso();
    write_file_atomic(dir / "manifest.json",
                      manifest_json(man).dump(2) + "\n");
  };

  try {
    for (const std::string& check : cfg.checks) {
      CheckOutcome outcome;
      outcome.check = check;
      if (check == "simulate") {
        run_simulate(ctx, outcome);
      } else if (check == "a1") {
        run_a1(ctx, outcome);
      } else if (check == "a2") {
        run_a2(ctx, false, outcome);
      } else if (check == "a2prime") {
        run_a2(ctx, true, outcome);
      } else if (check == "lemma23") {
        run_lemma23(ctx, outcome);
      } else if (check == "tightness") {
        run_tightness(ctx, outcome);
      } else if (check == "mproxy") {
        run_mproxy(ctx, outcome);
      } else {
        throw std::runtime_error("unknown check: " + check);
      }
      man.checks.push_back(std::move(outcome));
    }
  } catch (...) {
    finish(false);
    throw;
  }
  finish(true);
  return man;
}

std::string emit_plot_data(const fs::path& out_dir, const std::string& curve) {
  std::string table;
  std::size_t series_col = 0;
  std::size_t x_col = 0;
  std::size_t y_col = 0;
  std::size_t ci_col = 0;
  if (curve == "tightness") {
    table = "tightness_matrix.csv";
    series_col = 0;  // n
    x_col = 1;       // eta
    y_col = 2;       // p_hat
    ci_col = 4;
  } else if (curve == "a1") {
    table = "a1_table.csv";
    series_col = 0;  // n
    x_col = 1;       // K
    y_col = 2;
    ci_col = 4;
  } else {
    throw std::invalid_argument("emit_plot_data: unknown curve '" + curve +
                                "'");
  }

  const json man = json::parse(read_file(out_dir / "manifest.json"));
  if (!man.value("complete", false)) {
    throw std::runtime_error("emit_plot_data: run manifest is incomplete");
  }
  bool found = false;
  for (const auto& c : man.at("checks")) {
    for (const auto& f : c.at("files")) {
      if (f.get<std::string>() == table) found = true;
    }
  }
  if (!found) {
    throw std::runtime_error("emit_plot_data: manifest has no '" + curve +
                             "' output; run that check first");
  }

  const auto rows = read_csv_rows(read_file(out_dir / table));
  std::string out = "series,x,y,ci\n";
  for (std::size_t i = 1; i < rows.size(); ++i) {  // rows[0] is the header
    const auto& r = rows[i];
    out += r.at(series_col) + "," + r.at(x_col) + "," + r.at(y_col) + "," +
           r.at(ci_col) + "\n";
  }
  return out;
}

}  // namespace tightness

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tightness/config.hpp"
#include "tightness/control_partition.hpp"
#include "tightness/experiment.hpp"
#include "tightness/modulus.hpp"
#include "tightness/path_io.hpp"
#include "tightness/version.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tightness;

  CLI::App app{
      "tightkit: simulation and verification toolkit for jump processes "
      "with accumulating fixed discontinuity times"};
  app.set_version_flag("--version", std::string("tightkit ") + kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_val = 0;
  int threads_val = 0;
  app.add_option("--config", config_path, "experiment configuration file");
  auto* seed_opt =
      app.add_option("--seed", seed_val, "master seed (overrides config)");
  auto* out_opt = app.add_option("--out", out_dir,
                                 "output directory (overrides config)");
  auto* thr_opt = app.add_option("--threads", threads_val,
                                 "worker threads (overrides config)");

  auto* sim = app.add_subcommand(
      "simulate", "write replica path CSVs per the configuration");
  sim->fallthrough();

  std::string check;
  auto* ver = app.add_subcommand("verify", "run one verification check");
  ver->fallthrough();
  ver->add_option("--check", check,
                  "one of: a1, a2, a2prime, lemma23, tightness, mproxy")
      ->required();

  auto* mod =
      app.add_subcommand("modulus", "sparse-subdivision modulus of a path CSV");
  mod->fallthrough();
  std::string path_file;
  std::string metric_token = "bounded";
  std::string mode_token = "eta";
  double eta = 0;
  double from_t = 0;
  double to_t = 0;
  double delta = 0;
  std::vector<double> interval;
  mod->add_option("--path", path_file, "path CSV file")->required();
  mod->add_option("--eta", eta, "gap parameter > 0")->required();
  mod->add_option("--metric", metric_token, "euclidean|bounded|exp");
  mod->add_option("--mode", mode_token, "eta|etabar");
  auto* interval_opt =
      mod->add_option("--interval", interval, "interval A,B (default: domain)")
          ->delimiter(',')
          ->expected(2);
  auto* delta_opt = mod->add_option(
      "--at-least", delta, "test modulus >= delta instead of computing it");

  auto* sub = app.add_subcommand(
      "subdivide", "mesh partition certificate for a control CSV");
  sub->fallthrough();
  std::string control_file;
  double part_eps = 0;
  double horizon = 0;
  sub->add_option("--control", control_file, "control CSV file")->required();
  sub->add_option("--epsilon", part_eps, "certificate epsilon")->required();
  auto* horizon_opt =
      sub->add_option("--T", horizon, "horizon (default: control horizon)");

  auto* plot = app.add_subcommand(
      "plotdata", "long-format plot CSV from a finished run directory");
  plot->fallthrough();
  std::string curve;
  plot->add_option("--curve", curve, "tightness|a1")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CliOverrides overrides{
      seed_opt->count() ? std::optional<std::uint64_t>(seed_val)
                        : std::nullopt,
      out_opt->count() ? std::optional<std::string>(out_dir) : std::nullopt,
      thr_opt->count() ? std::optional<int>(threads_val) : std::nullopt};

  try {
    if (sim->parsed() || ver->parsed()) {
      if (config_path.empty()) {
        std::cerr << "error: --config is required for this subcommand\n";
        return 2;
      }
      ExperimentConfig cfg = parse_config(slurp(config_path), overrides);
      cfg.checks = {sim->parsed() ? std::string("simulate") : check};
      if (ver->parsed() && check == "simulate") {
        std::cerr << "error: use the simulate subcommand for simulation\n";
        return 2;
      }
      const RunManifest man = run_experiment(cfg);
      for (const auto& c : man.checks) {
        std::cout << c.check << ": "
                  << (c.verdict_pass ? "ok" : "verdict FAILED") << " ("
                  << c.files.size() << " files in " << cfg.out_dir << ")\n";
      }
      return man.all_verdicts_pass() ? 0 : 1;
    }

    if (mod->parsed()) {
      const StepPath path = read_path_csv(slurp(path_file));
      const auto metric = metric_from_name(metric_token);
      if (!metric) {
        std::cerr << "error: unknown metric '" << metric_token << "'\n";
        return 2;
      }
      SparsityMode mode;
      if (mode_token == "eta") {
        mode = SparsityMode::eta_sparse;
      } else if (mode_token == "etabar") {
        mode = SparsityMode::eta_bar_sparse;
      } else {
        std::cerr << "error: unknown mode '" << mode_token << "'\n";
        return 2;
      }
      const double A = interval_opt->count() ? interval[0] : path.t0();
      const double B = interval_opt->count() ? interval[1] : path.horizon();
      if (delta_opt->count()) {
        const bool ge = modulus_at_least(path, eta, A, B, *metric, mode, delta);
        nlohmann::json out{{"at_least", ge}, {"delta", delta}};
        std::cout << out.dump() << "\n";
        return 0;
      }
      const ModulusResult res = modulus(path, eta, A, B, *metric, mode);
      nlohmann::json out{{"value", res.value},
                         {"witness", res.witness.breakpoints()}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (sub->parsed()) {
      const MonotoneControl control = read_control_csv(slurp(control_file));
      const double T = horizon_opt->count() ? horizon : control.horizon();
      const MeshCertificate cert = build_mesh_partition(control, T, part_eps);
      nlohmann::json out{{"breakpoints", cert.subdivision.breakpoints()},
                         {"mesh_bound", cert.mesh_bound},
                         {"max_increment", cert.max_increment},
                         {"missed_jump_mass", cert.missed_jump_mass},
                         {"ok", cert.ok}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (plot->parsed()) {
      std::string dir = out_dir;
      if (dir.empty() && !config_path.empty()) {
        dir = parse_config(slurp(config_path), overrides).out_dir;
      }
      if (dir.empty()) {
        std::cerr << "error: plotdata needs --out or --config\n";
        return 2;
      }
      std::cout << emit_plot_data(dir, curve);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tightness/config.hpp"
#include "tightness/experiment.hpp"
#include "tightness/version.hpp"

using namespace tightness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tightkit_exp_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files[entry.path().filename().string()] = slurp(entry.path());
    }
  }
  return files;
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

// Deterministic toy family: no branching, one halving catastrophe at 0.5.
const char* kBundleConfig =
    "[model]\n"
    "T = 1\n"
    "x0 = 1\n"
    "n_grid = 4 8\n"
    "[schedule]\n"
    "kind = explicit\n"
    "times = 0.5\n"
    "thetas = 0.5\n"
    "[run]\n"
    "seed = 31\n"
    "replicas = 120\n"
    "checks = simulate a1 a2 a2prime lemma23 tightness mproxy\n"
    "[simulate]\n"
    "paths = 2\n"
    "[a2]\n"
    "c_k = 1\n"
    "eta_bar0 = 0.9\n";

ExperimentConfig bundle_config(const fs::path& dir, int threads = 1) {
  CliOverrides ov;
  ov.out_dir = dir.string();
  ov.threads = threads;
  return parse_config(kBundleConfig, ov);
}

}  // namespace

TEST_CASE("write_file_atomic leaves the destination intact on failure") {
  const fs::path dir = fresh_dir("atomic");
  const fs::path target = dir / "x.txt";

  write_file_atomic(target, "v1");
  CHECK(slurp(target) == "v1");

  write_fault_hook() = [](const std::string&) {
    throw std::runtime_error("injected fault");
  };
  CHECK_THROWS_AS(write_file_atomic(target, "v2"), std::runtime_error);
  write_fault_hook() = nullptr;
  CHECK(slurp(target) == "v1");

  write_file_atomic(target, "v3");
  CHECK(slurp(target) == "v3");
}

TEST_CASE("run_experiment writes a complete deterministic bundle") {
  const fs::path dir_a = fresh_dir("bundle_a");
  const ExperimentConfig cfg = bundle_config(dir_a);
  const RunManifest man = run_experiment(cfg);

  CHECK(man.complete);
  CHECK(man.all_verdicts_pass());
  REQUIRE(man.checks.size() == 7);
  CHECK(man.checks[0].check == "simulate");
  CHECK(man.checks.back().check == "mproxy");

  const auto files = dir_contents(dir_a);
  const std::set<std::string> expected = {
      "config_canonical.txt", "manifest.json",
      "path_n4_r0.csv",       "path_n4_r1.csv",
      "path_n8_r0.csv",       "path_n8_r1.csv",
      "simulate_summary.csv", "a1_table.csv",
      "a1_report.json",       "a2_table.csv",
      "a2_report.json",       "a2prime_table.csv",
      "a2prime_report.json",  "lemma23_table.csv",
      "lemma23_report.json",  "tightness_matrix.csv",
      "tightness_report.json", "mproxy_table.csv",
      "mproxy_report.json"};
  for (const auto& name : expected) {
    CAPTURE(name);
    CHECK(files.count(name) == 1);
  }
  CHECK(files.size() == expected.size());

  const json manifest = json::parse(files.at("manifest.json"));
  CHECK(manifest.at("complete").get<bool>());
  CHECK(manifest.at("version").get<std::string>() == kVersion);
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
  CHECK(manifest.at("checks").size() == 7);
  CHECK(files.at("config_canonical.txt") == canonical_config(cfg));

  // 2 values of n x 3 default eta levels -> header + 6 data rows.
  CHECK(line_count(files.at("tightness_matrix.csv")) == 7);
  CHECK(files.at("tightness_matrix.csv").rfind(
            "n,eta,p_hat,variance,ci_halfwidth,count\n", 0) == 0);

  // The toy family is deterministic: restarting at x0 = 1 and crossing the
  // theta = 1/2 atom gives squared displacement 1/4 against increment 1.
  const json a2 = json::parse(files.at("a2_report.json"));
  CHECK(a2.at("max_ratio").get<double>() == 0.25);
  CHECK(a2.at("dropped_grid_points").get<int>() == 0);
  CHECK(a2.at("verdict").get<std::string>() == "pass");
  const json a2p = json::parse(files.at("a2prime_report.json"));
  CHECK(a2p.at("dropped_grid_points").get<int>() == 2);
  const json lem = json::parse(files.at("lemma23_report.json"));
  CHECK(lem.at("verdict").get<std::string>() == "pass");
  CHECK(lem.at("estimates").at("violations").get<int>() == 0);

  // Same config, fresh directory: every artifact except the manifest (which
  // carries wall-clock timestamps) must be byte-identical.
  const fs::path dir_b = fresh_dir("bundle_b");
  run_experiment(bundle_config(dir_b));
  const auto files_b = dir_contents(dir_b);
  REQUIRE(files_b.size() == files.size());
  for (const auto& [name, content] : files) {
    if (name == "manifest.json") continue;
    CAPTURE(name);
    CHECK(files_b.at(name) == content);
  }

  // Thread count must not leak into any numerical output. The canonical
  // config and manifest record the thread setting itself, so only the
  // check artifacts are compared.
  const fs::path dir_c = fresh_dir("bundle_c");
  run_experiment(bundle_config(dir_c, 2));
  const auto files_c = dir_contents(dir_c);
  for (const auto& [name, content] : files) {
    if (name == "manifest.json" || name == "config_canonical.txt") continue;
    CAPTURE(name);
    CHECK(files_c.at(name) == content);
  }

  SUBCASE("emit_plot_data reshapes the recorded tables") {
    const std::string tight = emit_plot_data(dir_a, "tightness");
    CHECK(tight.rfind("series,x,y,ci\n", 0) == 0);
    CHECK(line_count(tight) == 7);

    // First data line must be columns 0,1,2,4 of the matrix row.
    std::istringstream matrix(files.at("tightness_matrix.csv"));
    std::string header, row;
    std::getline(matrix, header);
    std::getline(matrix, row);
    std::vector<std::string> cells;
    std::istringstream rs(row);
    std::string cell;
    while (std::getline(rs, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 6);
    std::istringstream ts(tight);
    std::string tight_header, tight_row;
    std::getline(ts, tight_header);
    std::getline(ts, tight_row);
    CHECK(tight_row ==
          cells[0] + "," + cells[1] + "," + cells[2] + "," + cells[4]);

    const std::string a1 = emit_plot_data(dir_a, "a1");
    CHECK(a1.rfind("series,x,y,ci\n", 0) == 0);
    CHECK(line_count(a1) == 7);  // 2 n values x 3 K values

    CHECK_THROWS_AS(emit_plot_data(dir_a, "mystery"), std::invalid_argument);
  }
}

TEST_CASE("emit_plot_data refuses missing or incomplete runs") {
  const fs::path empty = fresh_dir("plot_empty");
  CHECK_THROWS_AS(emit_plot_data(empty, "tightness"), std::runtime_error);

  const fs::path incomplete = fresh_dir("plot_incomplete");
  write_file_atomic(incomplete / "manifest.json",
                    json{{"complete", false}, {"checks", json::array()}}
                        .dump(2));
  CHECK_THROWS_AS(emit_plot_data(incomplete, "tightness"),
                  std::runtime_error);

  const fs::path wrong_check = fresh_dir("plot_wrong_check");
  write_file_atomic(wrong_check / "manifest.json",
                    json{{"complete", true}, {"checks", json::array()}}
                        .dump(2));
  CHECK_THROWS_AS(emit_plot_data(wrong_check, "tightness"),
                  std::runtime_error);
}

TEST_CASE("a failing check still leaves a manifest marked incomplete") {
  const fs::path dir = fresh_dir("bundle_fail");
  CliOverrides ov;
  ov.out_dir = dir.string();
  // a2prime demands eta_bar0; simulate before it should land on disk.
  ExperimentConfig cfg = parse_config(
      "[run]\nseed = 7\nchecks = simulate a2prime\n[simulate]\npaths = 1\n",
      ov);
  CHECK_THROWS_AS(run_experiment(cfg), std::runtime_error);

  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(!manifest.at("complete").get<bool>());
  REQUIRE(manifest.at("checks").size() == 1);
  CHECK(manifest.at("checks")[0].at("check").get<std::string>() ==
        "simulate");
  CHECK(fs::exists(dir / "simulate_summary.csv"));
}

TEST_CASE("verdict failures complete the run but mark the manifest") {
  const fs::path dir = fresh_dir("bundle_verdict");
  CliOverrides ov;
  ov.out_dir = dir.string();
  ExperimentConfig cfg = parse_config(
      "[model]\nT = 1\n"
      "[schedule]\nkind = explicit\ntimes = 0.5\nthetas = 0.5\n"
      "[run]\nseed = 3\nreplicas = 50\nchecks = a2\n"
      "[a2]\nc_k = 0.01\n",
      ov);
  const RunManifest man = run_experiment(cfg);
  CHECK(man.complete);
  CHECK(!man.all_verdicts_pass());
  REQUIRE(man.checks.size() == 1);
  CHECK(!man.checks[0].verdict_pass);

  const json rep = json::parse(slurp(dir / "a2_report.json"));
  CHECK(rep.at("verdict").get<std::string>() == "fail");
  CHECK(rep.at("within_C_K").get<bool>() == false);
  CHECK(rep.at("any_hard_violation").get<bool>() == false);
}

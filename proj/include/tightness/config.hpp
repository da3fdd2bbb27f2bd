#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tightness/models.hpp"
#include "tightness/verify.hpp"

namespace tightness {

/**
 * Experiment configuration, parsed from strict INI-style text:
 *
 *   # comment (also ;)
 *   [section]
 *   key = value          # scalars
 *   grid = 1 2 3         # lists are space-separated
 *
 * Unknown sections or keys are hard errors (silent typos would corrupt
 * grids), the master seed is mandatory (wall-clock seeding would break the
 * determinism contract), and validation reports every problem at once, not
 * just the first. The full grammar with defaults is documented in the
 * README.
 */
struct ScheduleSpec {
  enum class Kind { none, geometric, explicit_list };
  Kind kind = Kind::none;
  // geometric: times T*(1 - r^k), k = 1..k_max, shared theta
  double r = 0.5;
  double theta = 0.5;
  int k_max = 0;
  // explicit_list
  std::vector<double> times;
  std::vector<double> thetas;

  CatastropheSchedule build(double T) const;
};

struct SimulateSpec {
  int paths = 3;
  int grid_points = 0;  // 0: full event paths; >0: values on a uniform grid
};

struct A1Spec {
  std::vector<double> K_grid{2, 4, 8};
  std::vector<double> eps_levels{0.25, 0.1, 0.05};
};

struct A2Spec {
  double K = 8;
  std::optional<double> c_k;
  std::optional<double> eta_bar0;  // used by the a2prime check
  std::vector<double> grid_s;     // defaults derived from T at parse time
  std::vector<double> grid_t;
  std::vector<double> grid_x0;
};

struct Lemma23Spec {
  double epsilon = 0.1;
  double eta = 0;  // 0: choose (smallest window)/4 once the partition exists
  int m = 3;
  double partition_epsilon = 0.5;
};

struct TightnessSpec {
  std::vector<double> eta_grid{0.2, 0.05, 0.0125};
  double delta = 0.1;
};

struct MProxySpec {
  double b_lo = 0;
  double b_hi = 0;  // 0: defaults to T
  double eta = 0;   // 0: defaults to T/8
  double K = 8;
  std::vector<double> eps_family{0.1, 0.2};
};

struct ExperimentConfig {
  // [model]
  double lambda = 0;
  double mu = 0;
  double kappa = 0;
  double gamma = 0;
  double x0 = 1;
  double T = 1;
  std::vector<long> n_grid{100};

  // [schedule]
  ScheduleSpec schedule;

  // [run]
  std::uint64_t seed = 0;
  std::size_t replicas = 200;
  std::string out_dir = "out";
  int threads = 1;
  std::vector<std::string> checks;

  SimulateSpec simulate;
  A1Spec a1;
  A2Spec a2;
  Lemma23Spec lemma23;
  TightnessSpec tightness;
  MProxySpec mproxy;

  ModelFamily family() const;
};

// Carries every validation problem found, one message per line in what().
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> issues;
};

// Command-line overrides folded in before validation; a --seed on the
// command line satisfies the mandatory-seed rule.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
};

ExperimentConfig parse_config(const std::string& text,
                              const CliOverrides& overrides = {});

// Canonical serialization: every field, fixed order, %.17g scalars. Two
// configs hash equal iff they run the same experiment.
std::string canonical_config(const ExperimentConfig& cfg);

// FNV-1a 64-bit over the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace tightness

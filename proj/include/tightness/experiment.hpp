#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tightness/config.hpp"

namespace tightness {

struct CheckOutcome {
  std::string check;
  bool verdict_pass = true;  // false only for checks with a configured bound
  std::vector<std::string> files;
};

struct RunManifest {
  std::string config_hash_hex;
  std::string version;
  std::string started_at;
  std::string finished_at;
  bool complete = false;
  std::vector<CheckOutcome> checks;

  bool all_verdicts_pass() const;
};

// Test seam for the atomicity contract: invoked after a temp file is fully
// written, right before it is renamed into place. A throwing hook models a
// crash at the worst moment; the destination must stay absent or intact.
std::function<void(const std::string& final_path)>& write_fault_hook();

// Writes content to path via temp file + rename in the same directory, so a
// reader never observes a truncated file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/**
 * Executes the configured checks in their declared order under cfg.out_dir.
 * Every output is written atomically; the manifest is written last, flagged
 * incomplete if a check aborted. Reports carry no wall-clock data except
 * the manifest timestamps, so reruns with the same config are byte-identical
 * apart from manifest.json.
 */
RunManifest run_experiment(const ExperimentConfig& cfg);

// Long-format plot CSV (series,x,y,ci) extracted from a finished run:
// curve "tightness" has series n and x eta; curve "a1" has series n and x K.
std::string emit_plot_data(const std::filesystem::path& out_dir,
                           const std::string& curve);

}  // namespace tightness

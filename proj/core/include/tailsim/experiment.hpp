#pragma once

#include <string>
#include <vector>

#include "tailsim/error.hpp"

namespace tailsim {

struct MorphologyEntry {
  std::string name;
  std::string path;
};

struct ExperimentConfig {
  std::vector<MorphologyEntry> morphologies;
  std::vector<double> displacements_mm = {12.0, 21.0};
  bool one_motor = true;
  bool two_motor = true;
  int steps = 200;
  std::string mode = "uniform";  // "uniform" or "euler"
  std::string fixture;           // pull-test CSV, required in euler mode
  std::string out_dir = "out";
};

// Parse an experiment description; relative file paths inside it are resolved
// against base_dir. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir);

// Read and parse an experiment file, resolving paths against its directory.
ExperimentConfig load_config(const std::string& path);

struct SweepCase {
  int case_id = 0;
  std::string tail;
  std::vector<int> tracts;
  double displacement_mm = 0.0;
};

struct JointRow {
  int joint_id = 0;   // 1-based, one row per moving body, cap last
  double rho_mm = 0.0;
  double z_mm = 0.0;
};

struct CaseResult {
  SweepCase spec;
  bool ok = false;
  std::string error;
  std::vector<JointRow> rows;
  double tip_perp_mm = 0.0;
  double tip_radial_mm = 0.0;
};

struct SweepOutput {
  std::string mode = "uniform";
  std::vector<CaseResult> cases;
};

// Run every morphology x pull direction x displacement combination. Case
// order and numbering are deterministic regardless of the job count; a case
// that fails keeps its slot with ok=false and the error message.
SweepOutput run_sweep(const ExperimentConfig& config, int jobs = 1);

std::string results_to_csv(const SweepOutput& output);
std::string results_to_json(const SweepOutput& output);
SweepOutput results_from_json(const std::string& text);

// Write results.<format> under out_dir and return the file path.
std::string emit_results(const SweepOutput& output, const std::string& out_dir,
                         const std::string& format);

}  // namespace tailsim

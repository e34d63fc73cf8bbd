#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailsim/analysis.hpp"
#include "tailsim/config.hpp"
#include "tailsim/error.hpp"
#include "tailsim/experiment.hpp"
#include "tailsim/geometry.hpp"
#include "tailsim/oracle.hpp"
#include "tailsim/solver.hpp"
#include "tailsim/tail.hpp"

namespace {

using nlohmann::json;
using namespace tailsim;

constexpr int kExitOk = 0;
constexpr int kExitCaseFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::string format_fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
  return buffer;
}

std::string format_full(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("could not open " + out_path + " for writing");
  out << text;
  if (!out) throw IoError("failed while writing " + out_path);
}

struct CalibrateOptions {
  std::string fixture;
  std::string config;
  double anchor_mm = 3.0;
  std::string format = "json";
  std::string out;
};

int run_calibrate(const CalibrateOptions& options) {
  const auto samples = read_calibration_samples(options.fixture);
  const CalibrationFit fit = calibrate_linear(samples);
  const JointProfile profile =
      options.config.empty() ? JointProfile{} : load_morphology(options.config).joint;
  SpringCalibrationConfig spring;
  spring.anchor_displacement_mm = options.anchor_mm;
  const double k_theta = calibrate_spring_stiffness(fit, profile, spring);
  const double anchor_force = force_from_displacement(fit, options.anchor_mm);

  if (options.format == "json") {
    json doc;
    doc["fixture"] = options.fixture;
    doc["samples"] = samples.size();
    doc["slope_n_per_mm"] = fit.slope;
    doc["intercept_n"] = fit.intercept;
    doc["r_squared"] = fit.r_squared;
    doc["anchor_mm"] = options.anchor_mm;
    doc["anchor_force_n"] = anchor_force;
    doc["k_theta_nmm_per_rad"] = k_theta;
    write_text(options.out, doc.dump(2) + "\n");
  } else {
    std::ostringstream out;
    out << "quantity,value\n";
    out << "samples," << samples.size() << '\n';
    out << "slope_n_per_mm," << format_full(fit.slope) << '\n';
    out << "intercept_n," << format_full(fit.intercept) << '\n';
    out << "r_squared," << format_full(fit.r_squared) << '\n';
    out << "anchor_mm," << format_full(options.anchor_mm) << '\n';
    out << "anchor_force_n," << format_full(anchor_force) << '\n';
    out << "k_theta_nmm_per_rad," << format_full(k_theta) << '\n';
    write_text(options.out, out.str());
  }
  return kExitOk;
}

struct SolveOptions {
  std::string config;
  double force = 0.0;
  std::vector<int> tracts;
  int steps = 200;
  std::string format = "json";
  std::string out;
};

int run_solve(const SolveOptions& options) {
  const TailModel model = build_tail(load_morphology(options.config));
  LoadCase load_case;
  load_case.tracts = options.tracts;
  load_case.force = options.force;
  load_case.steps = options.steps;
  const SolveResult solved = euler_solve(model, load_case);
  const double travel = tendon_attachment_displacement(model, solved, load_case);

  if (options.format == "json") {
    json doc;
    doc["tail"] = model.spec.name;
    doc["tracts"] = options.tracts;
    doc["force_n"] = options.force;
    doc["steps"] = options.steps;
    doc["attachment_displacement_mm"] = travel;
    doc["gamma_final_rad"] = solved.gamma_history.back();
    json nodes = json::array();
    for (const Eigen::Vector3d& node : solved.final_pose) {
      nodes.push_back({node.x(), node.y(), node.z()});
    }
    doc["nodes_mm"] = std::move(nodes);
    write_text(options.out, doc.dump(2) + "\n");
  } else {
    std::ostringstream out;
    out << "node_id,x_mm,y_mm,z_mm\n";
    for (std::size_t i = 0; i < solved.final_pose.size(); ++i) {
      const Eigen::Vector3d& node = solved.final_pose[i];
      out << i << ',' << format_fixed(node.x(), 6) << ',' << format_fixed(node.y(), 6)
          << ',' << format_fixed(node.z(), 6) << '\n';
    }
    write_text(options.out, out.str());
  }
  return kExitOk;
}

struct PredictOptions {
  std::string config;
  double displacement = 0.0;
  std::vector<int> tracts;
  std::string format = "json";
  std::string out;
};

int run_predict(const PredictOptions& options) {
  const TailModel model = build_tail(load_morphology(options.config));
  const double theta = uniform_bend_angle(model, options.tracts, options.displacement);
  const TailPose pose = predict_pose_uniform(model, theta, options.tracts);

  if (options.format == "json") {
    json doc;
    doc["tail"] = model.spec.name;
    doc["tracts"] = options.tracts;
    doc["displacement_mm"] = options.displacement;
    doc["theta_rad"] = theta;
    json rows = json::array();
    for (int j = 0; j < pose.joint_count(); ++j) {
      rows.push_back({{"joint_id", j + 1},
                      {"rho_mm", std::abs(pose.centroids[j].x())},
                      {"z_mm", pose.centroids[j].y()}});
    }
    doc["rows"] = std::move(rows);
    doc["tip_perp_mm"] = pose.centroids.back().y();
    doc["tip_radial_mm"] = std::abs(pose.centroids.back().x());
    write_text(options.out, doc.dump(2) + "\n");
  } else {
    std::ostringstream out;
    out << "joint_id,rho_mm,z_mm\n";
    for (int j = 0; j < pose.joint_count(); ++j) {
      out << (j + 1) << ',' << format_fixed(std::abs(pose.centroids[j].x()), 6) << ','
          << format_fixed(pose.centroids[j].y(), 6) << '\n';
    }
    write_text(options.out, out.str());
  }
  return kExitOk;
}

struct SweepOptions {
  std::string config;
  int jobs = 1;
  int steps = 0;  // 0 keeps the configured value
  std::string out_dir;
  std::string format = "csv";
};

int run_sweep_command(const SweepOptions& options) {
  ExperimentConfig config = load_config(options.config);
  if (options.steps > 0) config.steps = options.steps;
  const std::string out_dir =
      options.out_dir.empty() ? config.out_dir : options.out_dir;

  const SweepOutput output = run_sweep(config, options.jobs);
  const std::string path = emit_results(output, out_dir, options.format);

  int failed = 0;
  for (const CaseResult& result : output.cases) {
    if (!result.ok) {
      ++failed;
      std::cerr << "case " << result.spec.case_id << " (" << result.spec.tail << "): "
                << result.error << '\n';
    }
  }
  std::cout << "wrote " << path << ": " << output.cases.size() << " cases, " << failed
            << " failed\n";
  return failed == 0 ? kExitOk : kExitCaseFailure;
}

struct AnalyzeOptions {
  std::vector<std::string> trials;
  std::string metric = "radial";
  std::string format = "json";
  std::string out;
  bool demo = false;
  std::uint64_t seed = 0;
  std::string dump_dir;
};

struct TrialGroup {
  std::string name;
  std::vector<std::vector<Eigen::Vector3d>> trials;
};

std::vector<TrialGroup> demo_groups(std::uint64_t seed) {
  struct DemoTail {
    const char* name;
    std::vector<double> bones;
  };
  const std::vector<DemoTail> tails = {{"ssl", {18.0, 18.0, 60.0}},
                                       {"sls", {18.0, 60.0, 18.0}},
                                       {"lss", {60.0, 18.0, 18.0}}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit_noise(0.0, 1.0);
  constexpr int kTrials = 10;
  constexpr double kDisplacement = 12.0;

  std::vector<TrialGroup> groups;
  for (const DemoTail& tail : tails) {
    MorphologySpec spec;
    spec.name = tail.name;
    spec.bone_lengths = tail.bones;
    spec.base_offset = 12.0;
    const TailModel model = build_tail(spec);
    const double theta = uniform_bend_angle(model, {0}, kDisplacement);
    const TailPose pose = predict_pose_uniform(model, theta, {0});

    TrialGroup group;
    group.name = tail.name;
    for (int t = 0; t < kTrials; ++t) {
      std::vector<Eigen::Vector3d> markers;
      for (int j = 0; j < pose.joint_count(); ++j) {
        const Eigen::Vector2d planar = pose.centroids[j];
        Eigen::Vector3d marker(planar.x() * pose.bend_dir.x(),
                               planar.x() * pose.bend_dir.y(), planar.y());
        const double sigma = 0.25 * (j + 1);  // wobble accumulates towards the tip
        marker += sigma * Eigen::Vector3d(unit_noise(rng), unit_noise(rng),
                                          unit_noise(rng));
        markers.push_back(marker);
      }
      group.trials.push_back(std::move(markers));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

void dump_trials(const std::vector<TrialGroup>& groups, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("could not create directory " + dir + ": " + ec.message());
  for (const TrialGroup& group : groups) {
    const std::string path =
        (std::filesystem::path(dir) / (group.name + "_trials.csv")).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("could not open " + path + " for writing");
    const std::size_t bodies = group.trials.front().size();
    for (std::size_t b = 0; b < bodies; ++b) {
      out << (b > 0 ? "," : "") << "body" << (b + 1) << "_x,body" << (b + 1)
          << "_y,body" << (b + 1) << "_z";
    }
    out << '\n';
    for (const auto& trial : group.trials) {
      for (std::size_t b = 0; b < bodies; ++b) {
        if (b > 0) out << ',';
        out << format_full(trial[b].x()) << ',' << format_full(trial[b].y()) << ','
            << format_full(trial[b].z());
      }
      out << '\n';
    }
  }
}

int run_analyze(const AnalyzeOptions& options) {
  std::vector<TrialGroup> groups;
  if (options.demo) {
    groups = demo_groups(options.seed);
  } else {
    if (options.trials.empty()) {
      throw ConfigError("analyze needs --trials files or --demo");
    }
    for (const std::string& path : options.trials) {
      TrialGroup group;
      group.name = std::filesystem::path(path).stem().string();
      group.trials = read_trials(path);
      groups.push_back(std::move(group));
    }
  }
  if (!options.dump_dir.empty()) dump_trials(groups, options.dump_dir);

  const Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  const Eigen::Vector3d axis(0.0, 0.0, 1.0);
  std::vector<std::vector<double>> samples;
  std::vector<std::vector<double>> spreads;
  for (const TrialGroup& group : groups) {
    std::vector<double> group_samples;
    for (const auto& trial : group.trials) {
      const TipMetrics tip = tip_metrics(collapse_to_plane(trial, origin, axis));
      group_samples.push_back(options.metric == "perp" ? tip.perp : tip.radial);
    }
    samples.push_back(std::move(group_samples));
    spreads.push_back(pairwise_std(group.trials));
  }

  const AnovaResult anova = one_way_anova(samples);
  const Eigen::MatrixXd tukey = tukey_hsd(samples);

  if (options.format == "json") {
    json doc;
    doc["metric"] = options.metric;
    json group_docs = json::array();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      double mean = 0.0;
      for (double s : samples[g]) mean += s;
      mean /= samples[g].size();
      json entry;
      entry["name"] = groups[g].name;
      entry["trials"] = groups[g].trials.size();
      entry["tip_" + options.metric + "_mm"] = samples[g];
      entry["mean_tip_" + options.metric + "_mm"] = mean;
      entry["pairwise_std_mm"] = spreads[g];
      group_docs.push_back(std::move(entry));
    }
    doc["groups"] = std::move(group_docs);
    doc["anova"] = {{"f_statistic", anova.f_statistic},
                    {"p_value", anova.p_value},
                    {"ms_between", anova.ms_between},
                    {"ms_within", anova.ms_within},
                    {"df_between", anova.df_between},
                    {"df_within", anova.df_within}};
    json tukey_rows = json::array();
    for (Eigen::Index i = 0; i < tukey.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < tukey.cols(); ++j) row.push_back(tukey(i, j));
      tukey_rows.push_back(std::move(row));
    }
    doc["tukey_p"] = std::move(tukey_rows);
    write_text(options.out, doc.dump(2) + "\n");
  } else {
    std::ostringstream out;
    out << "kind,a,b,value\n";
    out << "anova,f_statistic,," << format_full(anova.f_statistic) << '\n';
    out << "anova,p_value,," << format_full(anova.p_value) << '\n';
    out << "anova,ms_within,," << format_full(anova.ms_within) << '\n';
    for (std::size_t i = 0; i < groups.size(); ++i) {
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        out << "tukey," << groups[i].name << ',' << groups[j].name << ','
            << format_full(tukey(static_cast<Eigen::Index>(i),
                                 static_cast<Eigen::Index>(j)))
            << '\n';
      }
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (std::size_t b = 0; b < spreads[g].size(); ++b) {
        out << "pairwise_std," << groups[g].name << ',' << (b + 1) << ','
            << format_full(spreads[g][b]) << '\n';
      }
    }
    write_text(options.out, out.str());
  }
  return kExitOk;
}

struct OracleOptions {
  std::string config;
  double force = 0.0;
  std::vector<int> tracts;
  int steps = 200;
  double tol_mm = 0.12;
  std::string format = "json";
  std::string out;
};

int run_oracle(const OracleOptions& options) {
  const TailModel model = build_tail(load_morphology(options.config));
  LoadCase load_case;
  load_case.tracts = options.tracts;
  load_case.force = options.force;
  load_case.steps = options.steps;
  const SolveResult solved = euler_solve(model, load_case);
  const MinimizeResult reference = minimize_total_energy(model, solved.applied_load, 1e-6);

  std::vector<double> deviations;
  double max_deviation = 0.0;
  for (std::size_t i = 0; i < solved.final_pose.size(); ++i) {
    const double d = (solved.final_pose[i] - reference.positions[i]).norm();
    deviations.push_back(d);
    max_deviation = std::max(max_deviation, d);
  }
  const bool ok = max_deviation <= options.tol_mm;

  if (options.format == "json") {
    json doc;
    doc["tail"] = model.spec.name;
    doc["tracts"] = options.tracts;
    doc["force_n"] = options.force;
    doc["steps"] = options.steps;
    doc["tol_mm"] = options.tol_mm;
    doc["max_deviation_mm"] = max_deviation;
    doc["ok"] = ok;
    doc["node_deviations_mm"] = deviations;
    doc["minimizer_iterations"] = reference.iterations;
    doc["minimizer_gradient_norm"] = reference.gradient_norm;
    write_text(options.out, doc.dump(2) + "\n");
  } else {
    std::ostringstream out;
    out << "node_id,deviation_mm\n";
    for (std::size_t i = 0; i < deviations.size(); ++i) {
      out << i << ',' << format_fixed(deviations[i], 9) << '\n';
    }
    write_text(options.out, out.str());
  }
  if (!ok) {
    std::cerr << "oracle deviation " << max_deviation << " mm exceeds tolerance "
              << options.tol_mm << " mm\n";
    return kExitCaseFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and analysis toolkit for tendon-driven segmented tails"};
  app.require_subcommand(1);

  CalibrateOptions calibrate_options;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "fit pull-test data and back out joint stiffness");
  calibrate->add_option("--fixture", calibrate_options.fixture,
                        "pull-test CSV (displacement_mm,force_N)")
      ->required();
  calibrate->add_option("--config", calibrate_options.config,
                        "morphology JSON supplying the joint profile");
  calibrate->add_option("--anchor-mm", calibrate_options.anchor_mm,
                        "displacement the calibrated model must reproduce");
  calibrate->add_option("--format", calibrate_options.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  calibrate->add_option("--out", calibrate_options.out, "write output to this file");

  SolveOptions solve_options;
  CLI::App* solve =
      app.add_subcommand("solve", "incremental tendon-load solve of one tail");
  solve->add_option("--config", solve_options.config, "morphology JSON")->required();
  solve->add_option("--force", solve_options.force, "motor force in N")->required();
  solve->add_option("--tract", solve_options.tracts, "pulled tract id (repeat for two)")
      ->required();
  solve->add_option("--steps", solve_options.steps, "load increments");
  solve->add_option("--format", solve_options.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  solve->add_option("--out", solve_options.out, "write output to this file");

  PredictOptions predict_options;
  CLI::App* predict =
      app.add_subcommand("predict", "rigid uniform-bend pose for a tendon displacement");
  predict->add_option("--config", predict_options.config, "morphology JSON")->required();
  predict
      ->add_option("--displacement", predict_options.displacement,
                   "tendon displacement in mm")
      ->required();
  predict
      ->add_option("--tract", predict_options.tracts, "pulled tract id (repeat for two)")
      ->required();
  predict->add_option("--format", predict_options.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  predict->add_option("--out", predict_options.out, "write output to this file");

  SweepOptions sweep_options;
  CLI::App* sweep =
      app.add_subcommand("sweep", "run a full morphology x direction x travel sweep");
  sweep->add_option("--config", sweep_options.config, "experiment JSON")->required();
  sweep->add_option("--jobs", sweep_options.jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--steps", sweep_options.steps,
                    "override the configured solver steps");
  sweep->add_option("--out", sweep_options.out_dir, "output directory");
  sweep->add_option("--format", sweep_options.format, "results format")
      ->check(CLI::IsMember({"csv", "json"}));

  AnalyzeOptions analyze_options;
  CLI::App* analyze =
      app.add_subcommand("analyze", "compare tip metrics across trial groups");
  CLI::Option* trials_option = analyze->add_option(
      "--trials", analyze_options.trials, "trial CSV, one per group (repeatable)");
  analyze->add_option("--metric", analyze_options.metric, "tip metric to compare")
      ->check(CLI::IsMember({"radial", "perp"}));
  analyze->add_option("--format", analyze_options.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  analyze->add_option("--out", analyze_options.out, "write output to this file");
  CLI::Option* seed_option = analyze->add_option(
      "--seed", analyze_options.seed, "random seed for the synthetic demo");
  analyze->add_flag("--demo", analyze_options.demo, "analyze synthetic noisy trials")
      ->needs(seed_option)
      ->excludes(trials_option);
  analyze->add_option("--dump-trials", analyze_options.dump_dir,
                      "also write the trial groups as CSV into this directory");

  OracleOptions oracle_options;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "check the solver against direct energy minimization");
  oracle->add_option("--config", oracle_options.config, "morphology JSON")->required();
  oracle->add_option("--force", oracle_options.force, "motor force in N")->required();
  oracle->add_option("--tract", oracle_options.tracts, "pulled tract id (repeat for two)")
      ->required();
  oracle->add_option("--steps", oracle_options.steps, "load increments");
  oracle->add_option("--tol-mm", oracle_options.tol_mm, "node deviation tolerance");
  oracle->add_option("--format", oracle_options.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  oracle->add_option("--out", oracle_options.out, "write output to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (calibrate->parsed()) return run_calibrate(calibrate_options);
    if (solve->parsed()) return run_solve(solve_options);
    if (predict->parsed()) return run_predict(predict_options);
    if (sweep->parsed()) return run_sweep_command(sweep_options);
    if (analyze->parsed()) return run_analyze(analyze_options);
    if (oracle->parsed()) return run_oracle(oracle_options);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCaseFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCaseFailure;
  }
  return kExitOk;
}

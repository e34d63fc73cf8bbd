#include "tailsim/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tailsim/config.hpp"
#include "tailsim/geometry.hpp"
#include "tailsim/solver.hpp"
#include "tailsim/tail.hpp"

namespace tailsim {

namespace {

using nlohmann::json;

constexpr const char* kContext = "experiment config";

[[noreturn]] void fail_type(const std::string& key, const std::string& expected) {
  throw ConfigError(std::string(kContext) + ": \"" + key + "\" must be " + expected);
}

void reject_unknown_keys(const json& object, const std::string& scope,
                         std::initializer_list<const char*> allowed) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string(kContext) + ": unknown key \"" + scope + it.key() +
                        "\"");
    }
  }
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  if (base_dir.empty() || p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

// Hinge rotation of a solved single-joint bench model: tilt of the upper bar
// within the bending plane.
double rig_bend_angle(const SolveResult& solved) {
  const Eigen::Vector3d upper = solved.final_pose[2] - solved.final_pose[1];
  const double lateral =
      upper.x() * solved.bend_dir.x() + upper.y() * solved.bend_dir.y();
  return std::atan2(lateral, upper.z());
}

CaseResult solve_case(const TailModel& model, const SweepCase& sweep_case,
                      const ExperimentConfig& config, const CalibrationFit* fit) {
  CaseResult result;
  result.spec = sweep_case;

  double theta = 0.0;
  if (config.mode == "euler") {
    const double share = sweep_case.displacement_mm / model.joint_count();
    const double force = force_from_displacement(*fit, share);
    LoadCase pull;
    pull.tracts = sweep_case.tracts;
    pull.force = force;
    pull.steps = config.steps;
    pull.record_history = false;
    const TailModel rig = single_joint_rig(model.spec.joint);
    theta = rig_bend_angle(euler_solve(rig, pull));
  } else {
    theta = uniform_bend_angle(model, sweep_case.tracts, sweep_case.displacement_mm);
  }

  const TailPose pose = predict_pose_uniform(model, theta, sweep_case.tracts);
  result.rows.reserve(pose.joint_count());
  for (int j = 0; j < pose.joint_count(); ++j) {
    result.rows.push_back(
        {j + 1, std::abs(pose.centroids[j].x()), pose.centroids[j].y()});
  }
  result.tip_radial_mm = result.rows.back().rho_mm;
  result.tip_perp_mm = result.rows.back().z_mm;
  result.ok = true;
  return result;
}

std::string format_mm(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  return buffer;
}

std::string tracts_label(const std::vector<int>& tracts) {
  std::string label;
  for (std::size_t i = 0; i < tracts.size(); ++i) {
    if (i > 0) label += '+';
    label += std::to_string(tracts[i]);
  }
  return label;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(kContext) + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError(std::string(kContext) + " must be a JSON object");
  }
  reject_unknown_keys(doc, "",
                      {"morphologies", "displacements_mm", "one_motor", "two_motor",
                       "steps", "mode", "fixture", "out_dir"});

  ExperimentConfig config;
  if (!doc.contains("morphologies") || !doc["morphologies"].is_array() ||
      doc["morphologies"].empty()) {
    fail_type("morphologies", "a non-empty array of {name, path} entries");
  }
  for (const json& entry : doc["morphologies"]) {
    if (!entry.is_object()) {
      fail_type("morphologies", "a non-empty array of {name, path} entries");
    }
    reject_unknown_keys(entry, "morphologies.", {"name", "path"});
    if (!entry.contains("path") || !entry["path"].is_string()) {
      fail_type("morphologies.path", "a string");
    }
    MorphologyEntry morphology;
    morphology.path = resolve_path(base_dir, entry["path"].get<std::string>());
    if (entry.contains("name")) {
      if (!entry["name"].is_string()) fail_type("morphologies.name", "a string");
      morphology.name = entry["name"].get<std::string>();
    }
    config.morphologies.push_back(std::move(morphology));
  }

  if (doc.contains("displacements_mm")) {
    const json& displacements = doc["displacements_mm"];
    if (!displacements.is_array() || displacements.empty()) {
      fail_type("displacements_mm", "a non-empty array of positive numbers");
    }
    config.displacements_mm.clear();
    for (const json& value : displacements) {
      if (!value.is_number() || !(value.get<double>() > 0.0)) {
        fail_type("displacements_mm", "a non-empty array of positive numbers");
      }
      config.displacements_mm.push_back(value.get<double>());
    }
  }

  if (doc.contains("one_motor")) {
    if (!doc["one_motor"].is_boolean()) fail_type("one_motor", "a boolean");
    config.one_motor = doc["one_motor"].get<bool>();
  }
  if (doc.contains("two_motor")) {
    if (!doc["two_motor"].is_boolean()) fail_type("two_motor", "a boolean");
    config.two_motor = doc["two_motor"].get<bool>();
  }
  if (!config.one_motor && !config.two_motor) {
    throw ConfigError(std::string(kContext) +
                      ": at least one of \"one_motor\"/\"two_motor\" must stay enabled");
  }

  if (doc.contains("steps")) {
    if (!doc["steps"].is_number_integer() || doc["steps"].get<int>() < 1) {
      fail_type("steps", "a positive integer");
    }
    config.steps = doc["steps"].get<int>();
  }

  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) fail_type("mode", "\"uniform\" or \"euler\"");
    config.mode = doc["mode"].get<std::string>();
    if (config.mode != "uniform" && config.mode != "euler") {
      fail_type("mode", "\"uniform\" or \"euler\"");
    }
  }

  if (doc.contains("fixture")) {
    if (!doc["fixture"].is_string()) fail_type("fixture", "a string");
    config.fixture = resolve_path(base_dir, doc["fixture"].get<std::string>());
  }
  if (config.mode == "euler" && config.fixture.empty()) {
    throw ConfigError(std::string(kContext) +
                      ": euler mode needs a \"fixture\" pull-test file");
  }

  if (doc.contains("out_dir")) {
    if (!doc["out_dir"].is_string()) fail_type("out_dir", "a string");
    config.out_dir = resolve_path(base_dir, doc["out_dir"].get<std::string>());
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("could not open experiment file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str(), std::filesystem::path(path).parent_path().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

SweepOutput run_sweep(const ExperimentConfig& config, int jobs) {
  if (jobs < 1) throw DomainError("run_sweep: jobs must be >= 1");
  if (config.mode != "uniform" && config.mode != "euler") {
    throw ConfigError("run_sweep: mode must be \"uniform\" or \"euler\"");
  }
  if (config.steps < 1) throw ConfigError("run_sweep: steps must be >= 1");
  if (config.morphologies.empty()) {
    throw ConfigError("run_sweep: no morphologies configured");
  }
  for (double d : config.displacements_mm) {
    if (!(d > 0.0)) throw ConfigError("run_sweep: displacements must be > 0");
  }

  std::vector<TailModel> models;
  std::vector<std::string> names;
  models.reserve(config.morphologies.size());
  for (const MorphologyEntry& entry : config.morphologies) {
    const MorphologySpec spec = load_morphology(entry.path);
    names.push_back(entry.name.empty() ? spec.name : entry.name);
    models.push_back(build_tail(spec));
  }

  std::optional<CalibrationFit> fit;
  if (config.mode == "euler") {
    if (config.fixture.empty()) {
      throw ConfigError("run_sweep: euler mode needs a fixture pull-test file");
    }
    fit = calibrate_linear(read_calibration_samples(config.fixture));
  }

  std::vector<std::vector<int>> directions;
  if (config.one_motor) {
    for (int t = 0; t < 4; ++t) directions.push_back({t});
  }
  if (config.two_motor) {
    directions.insert(directions.end(), {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  }
  if (directions.empty()) {
    throw ConfigError("run_sweep: both motor modes are disabled");
  }

  struct Pending {
    const TailModel* model;
    SweepCase spec;
  };
  std::vector<Pending> pending;
  int next_id = 1;
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (const std::vector<int>& tracts : directions) {
      for (double displacement : config.displacements_mm) {
        pending.push_back({&models[m], {next_id++, names[m], tracts, displacement}});
      }
    }
  }

  SweepOutput output;
  output.mode = config.mode;
  output.cases.resize(pending.size());

  auto run_one = [&](std::size_t index) {
    const Pending& item = pending[index];
    try {
      output.cases[index] =
          solve_case(*item.model, item.spec, config, fit ? &*fit : nullptr);
    } catch (const Error& e) {
      CaseResult failed;
      failed.spec = item.spec;
      failed.error = e.what();
      output.cases[index] = std::move(failed);
    }
  };

  const std::size_t worker_count =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), pending.size());
  if (worker_count <= 1) {
    for (std::size_t i = 0; i < pending.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
      workers.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < pending.size();
             i = next.fetch_add(1)) {
          run_one(i);
        }
      });
    }
    for (std::thread& worker : workers) worker.join();
  }
  return output;
}

std::string results_to_csv(const SweepOutput& output) {
  std::ostringstream out;
  out << "case_id,tail,tracts,displacement_mm,joint_id,rho_mm,z_mm,tip_perp_mm,"
         "tip_radial_mm\n";
  for (const CaseResult& result : output.cases) {
    if (!result.ok) continue;
    for (const JointRow& row : result.rows) {
      out << result.spec.case_id << ',' << result.spec.tail << ','
          << tracts_label(result.spec.tracts) << ','
          << format_mm(result.spec.displacement_mm) << ',' << row.joint_id << ','
          << format_mm(row.rho_mm) << ',' << format_mm(row.z_mm) << ','
          << format_mm(result.tip_perp_mm) << ',' << format_mm(result.tip_radial_mm)
          << '\n';
    }
  }
  return out.str();
}

std::string results_to_json(const SweepOutput& output) {
  json doc;
  doc["mode"] = output.mode;
  json cases = json::array();
  for (const CaseResult& result : output.cases) {
    json entry;
    entry["case_id"] = result.spec.case_id;
    entry["tail"] = result.spec.tail;
    entry["tracts"] = result.spec.tracts;
    entry["displacement_mm"] = result.spec.displacement_mm;
    entry["ok"] = result.ok;
    if (result.ok) {
      json rows = json::array();
      for (const JointRow& row : result.rows) {
        rows.push_back({{"joint_id", row.joint_id},
                        {"rho_mm", row.rho_mm},
                        {"z_mm", row.z_mm}});
      }
      entry["rows"] = std::move(rows);
      entry["tip_perp_mm"] = result.tip_perp_mm;
      entry["tip_radial_mm"] = result.tip_radial_mm;
    } else {
      entry["error"] = result.error;
    }
    cases.push_back(std::move(entry));
  }
  doc["cases"] = std::move(cases);
  return doc.dump(2) + "\n";
}

SweepOutput results_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    SweepOutput output;
    output.mode = doc.at("mode").get<std::string>();
    for (const json& entry : doc.at("cases")) {
      CaseResult result;
      result.spec.case_id = entry.at("case_id").get<int>();
      result.spec.tail = entry.at("tail").get<std::string>();
      result.spec.tracts = entry.at("tracts").get<std::vector<int>>();
      result.spec.displacement_mm = entry.at("displacement_mm").get<double>();
      result.ok = entry.at("ok").get<bool>();
      if (result.ok) {
        for (const json& row : entry.at("rows")) {
          result.rows.push_back({row.at("joint_id").get<int>(),
                                 row.at("rho_mm").get<double>(),
                                 row.at("z_mm").get<double>()});
        }
        result.tip_perp_mm = entry.at("tip_perp_mm").get<double>();
        result.tip_radial_mm = entry.at("tip_radial_mm").get<double>();
      } else {
        result.error = entry.at("error").get<std::string>();
      }
      output.cases.push_back(std::move(result));
    }
    return output;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("results document: ") + e.what());
  }
}

std::string emit_results(const SweepOutput& output, const std::string& out_dir,
                         const std::string& format) {
  if (format != "csv" && format != "json") {
    throw DomainError("emit_results: format must be \"csv\" or \"json\"");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("could not create output directory " + out_dir + ": " + ec.message());
  }
  const std::string path =
      (std::filesystem::path(out_dir) / ("results." + format)).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("could not open " + path + " for writing");
  out << (format == "csv" ? results_to_csv(output) : results_to_json(output));
  if (!out) throw IoError("failed while writing " + path);
  return path;
}

}  // namespace tailsim

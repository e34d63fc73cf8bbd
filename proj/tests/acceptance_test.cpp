// Acceptance gate: nine go/no-go checks covering the element oracles, the
// calibration pipeline, solver/minimizer agreement, the morphology ordering
// claim, symmetry properties, the statistics kernels, and sweep determinism.
// Each criterion prints exactly one PASS/FAIL line; the process exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tailsim/analysis.hpp"
#include "tailsim/elements.hpp"
#include "tailsim/experiment.hpp"
#include "tailsim/geometry.hpp"
#include "tailsim/oracle.hpp"
#include "tailsim/solver.hpp"
#include "tailsim/tail.hpp"

namespace {

using namespace tailsim;

// Pinned tolerances, one per criterion.
constexpr double kBarRelTol = 1e-5;          // AC1: FD vs analytic truss matrix
constexpr double kSpringNullTol = 1e-6;      // AC1: translation annihilation, x ||K||
constexpr double kLinearityR2 = 0.99;        // AC2
constexpr double kAnchorRelTol = 0.04;       // AC3: 3 mm within 4%
constexpr double kOracleTolMm = 0.12;        // AC4: 1% of joint height h
constexpr double kRefinementRelTol = 0.005;  // AC5: tip shift, 200 vs 400 steps
constexpr double kMirrorRelTol = 1e-9;       // AC7
constexpr double kRigidRelTol = 1e-12;       // AC7: segment spacing under FK
constexpr double kAnovaRelTol = 1e-9;        // AC8
constexpr double kSeparationP = 1e-30;       // AC8
constexpr double kSweepBudgetSeconds = 10.0; // AC9

const std::string kDataDir = TAILSIM_DATA_DIR;

std::string format_double(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

CalibrationFit fixture_fit() {
  const auto samples =
      read_calibration_samples(kDataDir + "/fixtures/joint_pull_fixture.csv");
  return calibrate_linear(samples);
}

JointProfile calibrated_profile() {
  JointProfile profile;
  profile.k_theta = calibrate_spring_stiffness(fixture_fit(), profile);
  return profile;
}

double rig_travel(const TailModel& rig, double force) {
  LoadCase load_case;
  load_case.tracts = {0};
  load_case.force = force;
  load_case.record_history = false;
  const SolveResult solved = euler_solve(rig, load_case);
  return tendon_attachment_displacement(rig, solved, load_case);
}

double force_for_travel(const TailModel& rig, double target_mm) {
  double lo = 0.0;
  double hi = 6.0;
  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rig_travel(rig, mid) < target_mm ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MorphologySpec study_spec(const char* name, std::vector<double> bones) {
  MorphologySpec spec;
  spec.name = name;
  spec.bone_lengths = std::move(bones);
  spec.base_offset = 12.0;
  return spec;
}

// AC1: FD bar stiffness vs the analytic truss element; FD spring stiffness
// must annihilate rigid translations.
std::string check_element_oracles() {
  std::mt19937 rng(11u);
  std::uniform_real_distribution<double> coord(-40.0, 40.0);
  std::uniform_real_distribution<double> length(5.0, 50.0);
  std::uniform_real_distribution<double> stiffness(1.0, 500.0);
  const FdConfig fd;

  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector3d xi(coord(rng), coord(rng), coord(rng));
    Eigen::Vector3d dir(coord(rng), coord(rng), coord(rng));
    if (dir.norm() < 1.0) dir = Eigen::Vector3d(1.0, 2.0, 3.0);
    dir.normalize();
    const Eigen::Vector3d xj = xi + length(rng) * dir;

    BarElement bar;
    bar.i = 0;
    bar.j = 1;
    bar.l0 = (xj - xi).norm();
    bar.ea_over_l0 = stiffness(rng);

    const LocalStiffness fd_bar = bar_stiffness_fd(xi, xj, bar, fd.bar_delta(bar));
    const Eigen::Matrix3d block = bar.ea_over_l0 * dir * dir.transpose();
    Eigen::MatrixXd exact(6, 6);
    exact << block, -block, -block, block;
    const double rel = (fd_bar.matrix - exact).norm() / exact.norm();
    if (rel > kBarRelTol) {
      return "bar trial " + std::to_string(trial) + " relative error " +
             format_double(rel);
    }
  }

  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector3d xj(coord(rng), coord(rng), coord(rng));
    Eigen::Vector3d arm_i(coord(rng), coord(rng), coord(rng));
    Eigen::Vector3d arm_k(coord(rng), coord(rng), coord(rng));
    if (arm_i.norm() < 2.0) arm_i = Eigen::Vector3d(5.0, 0.0, 0.0);
    if (arm_k.norm() < 2.0) arm_k = Eigen::Vector3d(0.0, 5.0, 0.0);
    if (arm_i.cross(arm_k).norm() < 1.0) arm_k += Eigen::Vector3d(0.0, 0.0, 7.0);

    SpringElement spring;
    spring.i = 0;
    spring.j = 1;
    spring.k = 2;
    spring.k_theta = stiffness(rng);
    spring.theta0 = std::numbers::pi;

    const Eigen::Vector3d xi = xj + arm_i;
    const Eigen::Vector3d xk = xj + arm_k;
    const LocalStiffness fd_spring = spring_stiffness_fd(
        xi, xj, xk, spring, fd.spring_delta(arm_i.norm(), arm_k.norm()));

    const double norm_k = fd_spring.matrix.norm();
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::VectorXd translation = Eigen::VectorXd::Zero(9);
      translation(axis) = translation(axis + 3) = translation(axis + 6) = 1.0;
      const double residual = (fd_spring.matrix * translation).norm();
      if (residual > kSpringNullTol * norm_k * translation.norm()) {
        return "spring trial " + std::to_string(trial) + " axis " +
               std::to_string(axis) + " residual " + format_double(residual) +
               " vs ||K|| " + format_double(norm_k);
      }
    }
  }
  return {};
}

// AC2: the calibrated single joint's simulated force-displacement curve over
// 0-9 mm must fit a line with R^2 >= 0.99.
std::string check_linearity() {
  const TailModel rig = single_joint_rig(calibrated_profile());
  std::vector<CalibrationSample> curve{{0.0, 0.0}};
  for (int i = 1; i <= 12; ++i) {
    const double target = 0.75 * i;
    curve.push_back({target, force_for_travel(rig, target)});
  }
  const CalibrationFit line = calibrate_linear(curve, false);
  if (line.r_squared < kLinearityR2) {
    return "R^2 " + format_double(line.r_squared) + " below " +
           format_double(kLinearityR2);
  }
  return {};
}

// AC3: 0.8143 N on the calibrated single joint moves the tendon attachment
// 3 mm within 4%.
std::string check_anchor() {
  const TailModel rig = single_joint_rig(calibrated_profile());
  const double travel = rig_travel(rig, 0.8143);
  const double rel = std::abs(travel - 3.0) / 3.0;
  if (rel > kAnchorRelTol) {
    return "travel " + format_double(travel) + " mm is " + format_double(100.0 * rel) +
           "% from 3 mm";
  }
  return {};
}

// AC4: euler_solve and minimize_total_energy agree within 0.12 mm on ten
// single-joint load cases spanning 0.1-2.5 N.
std::string check_solver_oracle() {
  const TailModel rig = single_joint_rig(calibrated_profile());
  for (int i = 0; i < 10; ++i) {
    const double force = 0.1 + (2.4 / 9.0) * i;
    LoadCase load_case;
    load_case.tracts = {0};
    load_case.force = force;
    load_case.record_history = false;
    const SolveResult solved = euler_solve(rig, load_case);
    const MinimizeResult reference =
        minimize_total_energy(rig, solved.applied_load, 1e-6);
    for (std::size_t n = 0; n < solved.final_pose.size(); ++n) {
      const double deviation =
          (solved.final_pose[n] - reference.positions[n]).norm();
      if (deviation > kOracleTolMm) {
        return "force " + format_double(force) + " N, node " + std::to_string(n) +
               " deviates " + format_double(deviation) + " mm";
      }
    }
  }
  return {};
}

// AC5: doubling the Euler steps from 200 to 400 moves the final tip by less
// than 0.5% on the joint geometry the solver models, across the fixture's
// force range, for one- and two-motor pulls. Multi-joint poses go through the
// uniform-bend predictor, not the incremental solver.
std::string check_refinement() {
  const TailModel rig = single_joint_rig(calibrated_profile());
  const std::vector<std::vector<int>> pulls = {{0}, {0, 1}};
  for (const auto& tracts : pulls) {
    for (double force : {0.3, 0.8143, 1.5, 2.44}) {
      Eigen::Vector3d tip[2];
      for (int pass = 0; pass < 2; ++pass) {
        LoadCase load_case;
        load_case.tracts = tracts;
        load_case.force = force;
        load_case.steps = pass == 0 ? 200 : 400;
        load_case.record_history = false;
        tip[pass] = euler_solve(rig, load_case).final_pose.back();
      }
      const double rel = (tip[1] - tip[0]).norm() / tip[0].norm();
      if (rel > kRefinementRelTol) {
        return std::to_string(tracts.size()) + " motor(s) at " + format_double(force) +
               " N: tip moved " + format_double(100.0 * rel) + "%";
      }
    }
  }
  return {};
}

// AC6: under the uniform-bend model the short-short-long tail has strictly
// the largest tip radial displacement and strictly the smallest perpendicular
// distance at both 12 mm and 21 mm of tendon travel.
std::string check_morphology_ordering() {
  const std::vector<MorphologySpec> specs = {study_spec("ssl", {18.0, 18.0, 60.0}),
                                             study_spec("sls", {18.0, 60.0, 18.0}),
                                             study_spec("lss", {60.0, 18.0, 18.0})};
  for (double displacement : {12.0, 21.0}) {
    double radial[3];
    double perp[3];
    for (int i = 0; i < 3; ++i) {
      const TailModel model = build_tail(specs[i]);
      const double theta = uniform_bend_angle(model, {0}, displacement);
      const TailPose pose = predict_pose_uniform(model, theta, {0});
      radial[i] = std::abs(pose.centroids.back().x());
      perp[i] = pose.centroids.back().y();
    }
    const bool radial_max = radial[0] > radial[1] && radial[0] > radial[2];
    const bool perp_min = perp[0] < perp[1] && perp[0] < perp[2];
    if (!radial_max || !perp_min) {
      return "at " + format_double(displacement) + " mm: radial " +
             format_double(radial[0]) + "/" + format_double(radial[1]) + "/" +
             format_double(radial[2]) + ", perp " + format_double(perp[0]) + "/" +
             format_double(perp[1]) + "/" + format_double(perp[2]);
    }
  }
  return {};
}

// AC7: opposite tracts mirror the pose, zero load leaves the rest shape
// untouched, and the uniform-bend map preserves segment spacing.
std::string check_symmetry() {
  const TailModel model = build_tail(study_spec("ssl", {18.0, 18.0, 60.0}));

  SolveResult solved[2];
  for (int pass = 0; pass < 2; ++pass) {
    LoadCase load_case;
    load_case.tracts = {pass == 0 ? 0 : 2};
    load_case.force = 0.6;
    load_case.record_history = false;
    solved[pass] = euler_solve(model, load_case);
  }
  double scale = 0.0;
  for (const Eigen::Vector3d& node : solved[0].final_pose) {
    scale = std::max(scale, node.norm());
  }
  for (std::size_t n = 0; n < solved[0].final_pose.size(); ++n) {
    const Eigen::Vector3d& a = solved[0].final_pose[n];
    const Eigen::Vector3d mirrored(-a.x(), -a.y(), a.z());
    if ((solved[1].final_pose[n] - mirrored).norm() > kMirrorRelTol * scale) {
      return "node " + std::to_string(n) + " breaks the mirror by " +
             format_double((solved[1].final_pose[n] - mirrored).norm()) + " mm";
    }
  }

  LoadCase idle;
  idle.tracts = {0};
  idle.force = 0.0;
  idle.steps = 10;
  idle.record_history = false;
  const SolveResult rest = euler_solve(model, idle);
  for (std::size_t n = 0; n < rest.final_pose.size(); ++n) {
    if ((rest.final_pose[n] - model.nodes[n]).norm() != 0.0) {
      return "zero load moved node " + std::to_string(n);
    }
  }

  const TailPose bent = predict_pose_uniform(model, 0.31, {0});
  const TailPose flat = straight_pose(model);
  for (int j = 1; j < bent.joint_count(); ++j) {
    const double rest_gap = (flat.necks[j] - flat.necks[j - 1]).norm();
    const double bent_gap = (bent.necks[j] - bent.necks[j - 1]).norm();
    if (std::abs(bent_gap - rest_gap) > kRigidRelTol * rest_gap) {
      return "segment " + std::to_string(j) + " length drifted by " +
             format_double(bent_gap - rest_gap) + " mm";
    }
  }
  const double rest_tip_gap = (flat.tip - flat.necks.back()).norm();
  const double bent_tip_gap = (bent.tip - bent.necks.back()).norm();
  if (std::abs(bent_tip_gap - rest_tip_gap) > kRigidRelTol * rest_tip_gap) {
    return "tip segment length drifted by " +
           format_double(bent_tip_gap - rest_tip_gap) + " mm";
  }
  return {};
}

// AC8: one_way_anova against a direct sums-of-squares computation on 100
// random datasets, plus the degenerate and forced-separation cases.
std::string check_statistics() {
  std::mt19937 rng(505u);
  std::uniform_int_distribution<int> group_count(2, 5);
  std::uniform_int_distribution<int> group_size(2, 8);
  std::uniform_real_distribution<double> center(-5.0, 5.0);
  std::normal_distribution<double> noise(0.0, 1.5);

  for (int trial = 0; trial < 100; ++trial) {
    const int k = group_count(rng);
    std::vector<std::vector<double>> groups(k);
    for (auto& group : groups) {
      const int n = group_size(rng);
      const double mean = center(rng);
      for (int i = 0; i < n; ++i) group.push_back(mean + noise(rng));
    }

    double grand = 0.0;
    int total = 0;
    for (const auto& group : groups) {
      for (double x : group) grand += x;
      total += static_cast<int>(group.size());
    }
    grand /= total;
    double ssb = 0.0;
    double ssw = 0.0;
    for (const auto& group : groups) {
      double mean = 0.0;
      for (double x : group) mean += x;
      mean /= group.size();
      ssb += group.size() * (mean - grand) * (mean - grand);
      for (double x : group) ssw += (x - mean) * (x - mean);
    }
    const double f_direct = (ssb / (k - 1)) / (ssw / (total - k));

    const AnovaResult anova = one_way_anova(groups);
    const double rel =
        std::abs(anova.f_statistic - f_direct) / std::max(std::abs(f_direct), 1.0);
    if (rel > kAnovaRelTol) {
      return "trial " + std::to_string(trial) + ": F " +
             format_double(anova.f_statistic) + " vs direct " + format_double(f_direct);
    }
  }

  const AnovaResult flat =
      one_way_anova({{5.0, 5.0, 5.0}, {5.0, 5.0, 5.0}, {5.0, 5.0, 5.0}});
  if (flat.f_statistic != 0.0 || flat.p_value != 1.0) {
    return "identical groups gave F " + format_double(flat.f_statistic);
  }

  std::mt19937 far_rng(99u);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> separated(3);
  const double centers[3] = {0.0, 100.0, 200.0};
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < 40; ++i) separated[g].push_back(centers[g] + unit(far_rng));
  }
  const AnovaResult wide = one_way_anova(separated);
  if (!(wide.p_value < kSeparationP)) {
    return "forced separation p " + format_double(wide.p_value);
  }
  return {};
}

// AC9: the 48-case sweep finishes inside the time budget and produces
// byte-identical CSV across two runs.
std::string check_sweep_determinism(double* seconds_out) {
  const ExperimentConfig config =
      load_config(kDataDir + "/experiments/full_sweep.json");

  const auto start = std::chrono::steady_clock::now();
  const SweepOutput first = run_sweep(config, 4);
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  *seconds_out = elapsed.count();

  if (first.cases.size() != 48) {
    return std::to_string(first.cases.size()) + " cases, expected 48";
  }
  for (const CaseResult& result : first.cases) {
    if (!result.ok) {
      return "case " + std::to_string(result.spec.case_id) + " failed: " + result.error;
    }
  }
  if (elapsed.count() >= kSweepBudgetSeconds) {
    return "sweep took " + format_double(elapsed.count()) + " s";
  }

  const SweepOutput second = run_sweep(config, 4);
  if (results_to_csv(first) != results_to_csv(second)) {
    return "CSV differs between runs";
  }
  return {};
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<std::string()> body;
  };

  double sweep_seconds = 0.0;
  const std::vector<Criterion> criteria = {
      {"element FD stiffness matches the analytic truss matrix", check_element_oracles},
      {"calibrated joint force-displacement is linear to R^2 >= 0.99", check_linearity},
      {"0.8143 N reproduces the 3 mm anchor within 4%", check_anchor},
      {"incremental solve matches energy minimization within 0.12 mm",
       check_solver_oracle},
      {"tip position converged to <0.5% at 200 Euler steps", check_refinement},
      {"short-short-long leads both tip metrics at 12 and 21 mm",
       check_morphology_ordering},
      {"mirror, zero-load, and rigid-spacing symmetries hold", check_symmetry},
      {"ANOVA agrees with direct sums of squares to 1e-9", check_statistics},
      {"48-case sweep is deterministic and inside the time budget",
       [&] { return check_sweep_determinism(&sweep_seconds); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    try {
      detail = criteria[i].body();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    if (detail.empty()) {
      std::printf("AC%zu [PASS] %s (%.2f s)\n", i + 1, criteria[i].label,
                  elapsed.count());
    } else {
      ++failures;
      std::printf("AC%zu [FAIL] %s (%.2f s): %s\n", i + 1, criteria[i].label,
                  elapsed.count(), detail.c_str());
    }
  }
  if (failures == 0) {
    std::printf("all 9 criteria passed\n");
  } else {
    std::printf("%d criteria failed\n", failures);
  }
  return failures == 0 ? 0 : 1;
}

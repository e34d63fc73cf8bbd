#include "tailsim/tail.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tailsim/solver.hpp"

namespace tailsim {

namespace {

// Rotation in the (lateral, axial) plane that tips the axis towards +lateral:
// phi maps (0, z) to (z sin(phi), z cos(phi)).
Eigen::Vector2d tilt(double phi, const Eigen::Vector2d& v) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}

// Pose a planar rest point: everything above hinge m rides on the rigid body
// rotated by the cumulative angle through that hinge.
Eigen::Vector2d map_planar(const TailPose& pose, const Eigen::Vector2d& rest) {
  int m = 0;
  while (m < pose.joint_count() && pose.rest_neck_z[m] <= rest.y()) ++m;
  if (m == 0) return rest;
  double phi = 0.0;
  for (int j = 0; j < m; ++j) phi += pose.joint_angles[j];
  const Eigen::Vector2d offset{rest.x(), rest.y() - pose.rest_neck_z[m - 1]};
  return pose.necks[m - 1] + tilt(phi, offset);
}

void check_tracts(const MorphologySpec& spec, const std::vector<int>& tracts) {
  LoadCase probe;
  probe.tracts = tracts;
  probe.force = 0.0;
  probe.steps = 1;
  probe.validate(spec);
}

}  // namespace

std::vector<CalibrationSample> read_calibration_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("could not open calibration file: " + path);
  std::vector<CalibrationSample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream row(cleaned);
    double d = 0.0, f = 0.0;
    if (row >> d >> f) {
      samples.push_back({d, f});
      continue;
    }
    std::istringstream blank(cleaned);
    std::string token;
    const bool has_content = static_cast<bool>(blank >> token);
    if (!has_content || token[0] == '#') continue;
    if (line_no == 1) continue;  // header row
    std::ostringstream msg;
    msg << "calibration file " << path << ": line " << line_no
        << " is not a displacement,force pair";
    throw IoError(msg.str());
  }
  return samples;
}

CalibrationFit calibrate_linear(const std::vector<CalibrationSample>& samples,
                                bool through_origin) {
  if (samples.size() < 2) {
    throw CalibrationError("calibrate_linear needs at least two samples");
  }
  double d_min = samples.front().displacement_mm;
  double d_max = d_min;
  for (const CalibrationSample& s : samples) {
    if (s.displacement_mm < 0.0) {
      throw CalibrationError("calibrate_linear: negative displacement sample");
    }
    d_min = std::min(d_min, s.displacement_mm);
    d_max = std::max(d_max, s.displacement_mm);
  }
  if (!(d_max > d_min)) {
    throw CalibrationError("calibrate_linear needs at least two distinct displacements");
  }

  const double n = static_cast<double>(samples.size());
  CalibrationFit fit;
  if (through_origin) {
    double sdd = 0.0, sdf = 0.0;
    for (const CalibrationSample& s : samples) {
      sdd += s.displacement_mm * s.displacement_mm;
      sdf += s.displacement_mm * s.force_n;
    }
    fit.slope = sdf / sdd;
    fit.intercept = 0.0;
  } else {
    double sd = 0.0, sf = 0.0;
    for (const CalibrationSample& s : samples) {
      sd += s.displacement_mm;
      sf += s.force_n;
    }
    const double md = sd / n;
    const double mf = sf / n;
    double sxx = 0.0, sxy = 0.0;
    for (const CalibrationSample& s : samples) {
      sxx += (s.displacement_mm - md) * (s.displacement_mm - md);
      sxy += (s.displacement_mm - md) * (s.force_n - mf);
    }
    fit.slope = sxy / sxx;
    fit.intercept = mf - fit.slope * md;
  }
  if (!(fit.slope > 0.0)) {
    std::ostringstream msg;
    msg << "calibrate_linear: non-positive slope " << fit.slope
        << " (force must grow with displacement)";
    throw CalibrationError(msg.str());
  }

  double mf = 0.0;
  for (const CalibrationSample& s : samples) mf += s.force_n;
  mf /= n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const CalibrationSample& s : samples) {
    const double pred = fit.slope * s.displacement_mm + fit.intercept;
    ss_res += (s.force_n - pred) * (s.force_n - pred);
    ss_tot += (s.force_n - mf) * (s.force_n - mf);
  }
  if (ss_tot > 0.0) {
    fit.r_squared = std::max(0.0, 1.0 - ss_res / ss_tot);
  } else {
    fit.r_squared = ss_res > 0.0 ? 0.0 : 1.0;
  }
  return fit;
}

double force_from_displacement(const CalibrationFit& fit, double displacement_mm) {
  if (displacement_mm < 0.0) {
    throw DomainError("force_from_displacement: displacement must be >= 0");
  }
  return fit.slope * displacement_mm + fit.intercept;
}

double calibrate_spring_stiffness(const CalibrationFit& fit, const JointProfile& profile,
                                  const SpringCalibrationConfig& config) {
  if (!(config.anchor_displacement_mm > 0.0)) {
    throw DomainError("calibrate_spring_stiffness: anchor displacement must be > 0");
  }
  if (!(config.bracket_low > 0.0) || !(config.bracket_high > config.bracket_low)) {
    throw DomainError("calibrate_spring_stiffness: invalid stiffness bracket");
  }
  const double target = config.anchor_displacement_mm;
  const double force = force_from_displacement(fit, target);
  if (!(force > 0.0)) {
    std::ostringstream msg;
    msg << "calibrate_spring_stiffness: fitted force " << force << " N at " << target
        << " mm is not positive";
    throw CalibrationError(msg.str());
  }

  auto travel = [&](double k_theta) {
    JointProfile trial = profile;
    trial.k_theta = k_theta;
    const TailModel rig = single_joint_rig(trial);
    LoadCase pull;
    pull.tracts = {0};
    pull.force = force;
    pull.steps = config.solver_steps;
    pull.record_history = false;
    const SolveResult solved = euler_solve(rig, pull);
    return tendon_attachment_displacement(rig, solved, pull);
  };

  // Softer springs travel further, so travel(k) - target is decreasing in k.
  double lo = config.bracket_low;
  double hi = config.bracket_high;
  double at_lo = travel(lo) - target;
  double at_hi = travel(hi) - target;
  for (int expand = 0; expand < 4 && at_lo < 0.0 && lo > 1e-6; ++expand) {
    lo *= 0.1;
    at_lo = travel(lo) - target;
  }
  for (int expand = 0; expand < 4 && at_hi > 0.0 && hi < 1e9; ++expand) {
    hi *= 10.0;
    at_hi = travel(hi) - target;
  }
  if (at_lo < 0.0 || at_hi > 0.0) {
    std::ostringstream msg;
    msg << "calibrate_spring_stiffness: no stiffness in [" << lo << ", " << hi
        << "] N*mm/rad reproduces " << target << " mm of travel at " << force << " N";
    throw CalibrationError(msg.str());
  }
  for (int iter = 0; iter < config.bisection_iterations; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (travel(mid) - target > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TailPose straight_pose(const TailModel& model) {
  TailPose pose;
  const int joints = model.joint_count();
  pose.joint_angles.assign(joints, 0.0);
  pose.bend_dir = Eigen::Vector2d(1.0, 0.0);
  pose.rest_neck_z.resize(joints);
  pose.necks.resize(joints);
  pose.centroids.resize(joints);
  pose.axes.resize(joints);
  for (int j = 0; j < joints; ++j) {
    pose.rest_neck_z[j] = model.neck_z(j);
    pose.necks[j] = Eigen::Vector2d(0.0, model.neck_z(j));
    const double tip_z = model.nodes[3 * j + 2].z();
    const double body_len = (j + 1 < joints) ? model.spec.bone_lengths[j + 1]
                                             : model.spec.endcap_length;
    pose.centroids[j] = Eigen::Vector2d(0.0, tip_z + 0.5 * body_len);
    pose.axes[j] = Eigen::Vector2d(0.0, 1.0);
  }
  pose.tip = Eigen::Vector2d(0.0, model.attachment_z());
  return pose;
}

TailPose predict_pose_uniform(const TailModel& model, double theta,
                              const std::vector<int>& tracts) {
  check_tracts(model.spec, tracts);
  if (!(std::abs(theta) <= kMaxJointAngleRad)) {
    std::ostringstream msg;
    msg << "predict_pose_uniform: |theta| = " << std::abs(theta)
        << " rad exceeds the pi/3 contact limit";
    throw DomainError(msg.str());
  }

  TailPose pose = straight_pose(model);
  const Eigen::Vector3d bend3 = bend_direction(model.spec, tracts);
  pose.bend_dir = bend3.head<2>();
  const int joints = model.joint_count();
  pose.joint_angles.assign(joints, theta);

  for (int j = 1; j < joints; ++j) {
    const Eigen::Vector2d rest_step{0.0, pose.rest_neck_z[j] - pose.rest_neck_z[j - 1]};
    pose.necks[j] = pose.necks[j - 1] + tilt(j * theta, rest_step);
  }
  for (int j = 0; j < joints; ++j) {
    pose.centroids[j] = map_planar(pose, pose.centroids[j]);
    pose.axes[j] = tilt((j + 1) * theta, Eigen::Vector2d(0.0, 1.0));
  }
  pose.tip = map_planar(pose, Eigen::Vector2d(0.0, model.attachment_z()));
  return pose;
}

Eigen::Vector3d pose_point(const TailPose& pose, const Eigen::Vector3d& rest_point) {
  const Eigen::Vector2d bd = pose.bend_dir;
  const Eigen::Vector2d perp{-bd.y(), bd.x()};
  const Eigen::Vector2d xy = rest_point.head<2>();
  const double lateral = xy.dot(bd);
  const double out_of_plane = xy.dot(perp);
  const Eigen::Vector2d posed = map_planar(pose, {lateral, rest_point.z()});
  const Eigen::Vector2d posed_xy = posed.x() * bd + out_of_plane * perp;
  return {posed_xy.x(), posed_xy.y(), posed.y()};
}

double tendon_path_length(const TailModel& model, const TailPose& pose, int tract) {
  if (tract < 0 || tract >= static_cast<int>(model.tracts.size())) {
    throw DomainError("tendon_path_length: tract id out of range");
  }
  const std::vector<Eigen::Vector3d>& loop = model.tracts[tract];
  double length = 0.0;
  Eigen::Vector3d prev = pose_point(pose, loop.front());
  for (std::size_t i = 1; i < loop.size(); ++i) {
    const Eigen::Vector3d next = pose_point(pose, loop[i]);
    length += (next - prev).norm();
    prev = next;
  }
  return length;
}

double uniform_bend_angle(const TailModel& model, const std::vector<int>& tracts,
                          double displacement_mm) {
  check_tracts(model.spec, tracts);
  if (displacement_mm < 0.0) {
    throw DomainError("uniform_bend_angle: displacement must be >= 0");
  }
  if (displacement_mm == 0.0) return 0.0;

  const int tract = tracts.front();
  const double rest_length = tendon_path_length(model, straight_pose(model), tract);
  auto shortening = [&](double theta) {
    return rest_length - tendon_path_length(model, predict_pose_uniform(model, theta, tracts),
                                            tract);
  };

  const double max_shortening = shortening(kMaxJointAngleRad);
  if (displacement_mm > max_shortening) {
    std::ostringstream msg;
    msg << "uniform_bend_angle: " << displacement_mm
        << " mm of tendon travel exceeds the " << max_shortening
        << " mm available before segment contact";
    throw SaturationError(msg.str(), max_shortening);
  }

  double lo = 0.0;
  double hi = kMaxJointAngleRad;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (shortening(mid) < displacement_mm) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace tailsim

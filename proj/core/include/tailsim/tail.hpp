#pragma once

#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tailsim/error.hpp"
#include "tailsim/geometry.hpp"

namespace tailsim {

struct CalibrationSample {
  double displacement_mm = 0.0;
  double force_n = 0.0;
};

// CSV reader for pull-test data: "displacement_mm,force_N" rows, optional
// header line, '#' comments allowed.
std::vector<CalibrationSample> read_calibration_samples(const std::string& path);

struct CalibrationFit {
  double slope = 0.0;      // N per mm
  double intercept = 0.0;  // N
  double r_squared = 0.0;
};

// Least-squares line through the samples; through the origin by default since
// zero tendon travel exerts zero force.
CalibrationFit calibrate_linear(const std::vector<CalibrationSample>& samples,
                                bool through_origin = true);

double force_from_displacement(const CalibrationFit& fit, double displacement_mm);

struct SpringCalibrationConfig {
  double anchor_displacement_mm = 3.0;  // the fit and the model must agree here
  double bracket_low = 1.0;             // initial stiffness bracket (N*mm/rad)
  double bracket_high = 1000.0;
  int bisection_iterations = 60;
  int solver_steps = 200;
};

// Bisect the rotational stiffness of a single-joint bench model until the
// solved attachment travel at force_from_displacement(fit, anchor) matches the
// anchor displacement itself.
double calibrate_spring_stiffness(const CalibrationFit& fit, const JointProfile& profile,
                                  const SpringCalibrationConfig& config = {});

// Contact between neighbouring segments caps each joint near 60 degrees.
inline constexpr double kMaxJointAngleRad = std::numbers::pi / 3.0;

// Planar rigid-body pose of a bent tail. Coordinates are (lateral, axial)
// within the bending plane; bend_dir embeds lateral back into the xy plane.
struct TailPose {
  std::vector<double> joint_angles;  // hinge rotation per joint (rad)
  Eigen::Vector2d bend_dir{1.0, 0.0};
  std::vector<double> rest_neck_z;           // hinge heights in the rest pose (mm)
  std::vector<Eigen::Vector2d> necks;        // posed hinge points
  std::vector<Eigen::Vector2d> centroids;    // posed centroid of each moving body
  std::vector<Eigen::Vector2d> axes;         // posed axis direction of each moving body
  Eigen::Vector2d tip{0.0, 0.0};             // posed cap attachment point

  int joint_count() const { return static_cast<int>(joint_angles.size()); }
};

TailPose straight_pose(const TailModel& model);

// Rigid forward kinematics with the same angle theta at every hinge, bending
// towards the pulled tract(s). |theta| may not exceed the contact limit.
TailPose predict_pose_uniform(const TailModel& model, double theta,
                              const std::vector<int>& tracts);

// Map a rest-configuration point through the pose. The component out of the
// bending plane rides along unchanged.
Eigen::Vector3d pose_point(const TailPose& pose, const Eigen::Vector3d& rest_point);

// Polyline length of one tendon tract through its posed loop points up to the
// cap attachment.
double tendon_path_length(const TailModel& model, const TailPose& pose, int tract);

// Invert tendon-path shortening: the uniform hinge angle at which the pulled
// tract is shorter by displacement_mm than at rest. Throws SaturationError
// when the requested travel exceeds the shortening at the contact limit.
double uniform_bend_angle(const TailModel& model, const std::vector<int>& tracts,
                          double displacement_mm);

}  // namespace tailsim

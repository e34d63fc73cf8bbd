#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tailsim/elements.hpp"
#include "tailsim/geometry.hpp"

namespace tailsim {

struct GlobalSystem {
  Eigen::MatrixXd K;           // 3N x 3N, assembled at the rest configuration
  std::vector<int> free_dofs;  // all DoF until constraints are applied
  Eigen::VectorXd load;        // 3N
};

// Scatter-sum every element stiffness into the global matrix.
GlobalSystem assemble_global(const TailModel& model, const FdConfig& fd = {});

struct ReducedSystem {
  Eigen::MatrixXd K;
  std::vector<int> free_dofs;  // global DoF index per reduced row
};

// Remove the rows/columns of the fixed nodes' DoF. An empty fixed set leaves
// rigid translation unconstrained and is rejected outright.
ReducedSystem apply_constraints(const GlobalSystem& system, const std::vector<int>& fixed_nodes);

// Tendon force at wrap angle gamma splits into a pull along the tendon and a
// transverse couple force: M = F * l(gamma), F_par = F, F_perp = 2 M / h.
std::pair<double, double> decompose_tendon_load(double F, const JointProfile& profile,
                                                double gamma);

struct LoadCase {
  std::vector<int> tracts;             // one tract id, or two azimuth-adjacent ids
  std::optional<double> force;         // commanded force per motor (N)
  std::optional<double> displacement;  // commanded tendon displacement (mm)
  int steps = 200;
  bool record_history = true;

  void validate(const MorphologySpec& spec) const;
};

struct SolveResult {
  std::vector<std::vector<Eigen::Vector3d>> node_history;  // steps+1 snapshots
  std::vector<Eigen::Vector3d> final_pose;
  std::vector<double> force_history;  // per-motor force after each increment (N)
  std::vector<double> gamma_history;  // wrap angle at the last joint (rad)
  Eigen::VectorXd applied_load;       // accumulated nodal load, 3N (N)
  Eigen::Vector3d bend_dir;           // lateral unit vector of the bending plane
};

// Incremental load stepping: the commanded force is applied in equal
// increments; each step re-measures the wrap angle and moment arm, rebuilds
// the tangent stiffness at the current geometry, and solves for the update.
// The solve runs in the bending plane selected by the pulled tract(s).
SolveResult euler_solve(const TailModel& model, const LoadCase& load_case,
                        const FdConfig& fd = {});

// Unit lateral direction of the bending plane for the pulled tract(s);
// the bisector when two tracts are pulled.
Eigen::Vector3d bend_direction(const MorphologySpec& spec, const std::vector<int>& tracts);

// In-plane resultant magnitude: F for one motor, F * sqrt(2) * cos(spread/2)
// for two motors pulled together.
double resultant_force(double force_per_motor, const MorphologySpec& spec,
                       const std::vector<int>& tracts);

// In-plane stiffness of the free DoF at the rest configuration; rows are
// ordered (lateral, axial) per free node. Positive definite for any anchored
// tail, which is what euler_solve relies on.
Eigen::MatrixXd planar_reduced_stiffness(const TailModel& model, const FdConfig& fd = {});

// Euclidean travel of the cap attachment ring for the pulled tract(s),
// measured between the rest pose and the solved final pose.
double tendon_attachment_displacement(const TailModel& model, const SolveResult& result,
                                      const LoadCase& load_case);

}  // namespace tailsim

#pragma once

#include <vector>

#include <Eigen/Core>

#include "tailsim/geometry.hpp"

namespace tailsim {

// Total system energy under a dead load: sum of element potentials minus the
// work f . u. Shares no derivative code with the incremental solver, so it
// serves as an independent equilibrium check.
class EnergyLandscape {
 public:
  EnergyLandscape(const TailModel& model, Eigen::VectorXd load);

  double operator()(const Eigen::VectorXd& u) const;  // u: 3N displacements
  long evaluations() const { return evals_; }

 private:
  const TailModel* model_;
  Eigen::VectorXd load_;
  mutable long evals_ = 0;
};

double total_potential(const TailModel& model, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& load);

struct MinimizeOptions {
  long max_iterations = 200000;
  double gradient_step = 1e-6;   // central-difference probe (mm)
  double initial_step = 1.0;     // first line-search trial (mm)
  bool record_energy_history = false;
};

struct MinimizeResult {
  std::vector<Eigen::Vector3d> positions;  // displaced nodes
  Eigen::VectorXd displacement;            // 3N
  double energy = 0.0;
  double gradient_norm = 0.0;
  long iterations = 0;
  long energy_evaluations = 0;
  std::vector<double> energy_history;      // filled when requested
};

// Gradient descent with Armijo backtracking on the free DoF until the
// central-difference gradient norm drops below tol.
MinimizeResult minimize_total_energy(const TailModel& model, const Eigen::VectorXd& load,
                                     double tol, const MinimizeOptions& options = {});

}  // namespace tailsim

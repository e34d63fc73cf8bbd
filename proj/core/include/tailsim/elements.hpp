#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "tailsim/geometry.hpp"

namespace tailsim {

// Stretch energy of a two-node bar: 1/2 * (EA/L0) * (L - L0)^2, with the rest
// length taken from the rest positions. Collapsed deformed nodes are allowed;
// collapsed rest nodes are not.
double bar_potential(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                     const Eigen::Vector3d& ui, const Eigen::Vector3d& uj,
                     const BarElement& bar);

// Interior angle at vertex xj of the triple (xi, xj, xk); the cosine is
// clamped to [-1, 1] before acos so collinear configurations stay exact.
double angle_at_vertex(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                       const Eigen::Vector3d& xk);

// Bending energy of a three-node rotational spring: 1/2 * k_theta * (theta - theta0)^2,
// with theta0 measured on the rest positions.
double spring_potential(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                        const Eigen::Vector3d& xk, const Eigen::Vector3d& ui,
                        const Eigen::Vector3d& uj, const Eigen::Vector3d& uk,
                        const SpringElement& spring);

// Dense element stiffness with its node map; three translational DoF per node.
struct LocalStiffness {
  Eigen::MatrixXd matrix;  // 6x6 for bars, 9x9 for springs
  std::vector<int> node_ids;
};

// Probe sizes default to 1e-4 of the characteristic element length.
struct FdConfig {
  double delta_scale = 1e-4;

  double bar_delta(const BarElement& bar) const { return delta_scale * bar.l0; }
  double spring_delta(double arm_i, double arm_k) const {
    return delta_scale * 0.5 * (arm_i + arm_k);
  }
};

// Second central differences of an energy callable about u = 0: standard
// (E+ - 2 E0 + E-) / delta^2 on the diagonal and the four-point cross formula
// divided by 4 delta^2 off the diagonal.
Eigen::MatrixXd hessian_fd(const std::function<double(const Eigen::VectorXd&)>& energy,
                           int dim, double delta);

LocalStiffness bar_stiffness_fd(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                                const BarElement& bar, double delta);

LocalStiffness spring_stiffness_fd(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                                   const Eigen::Vector3d& xk, const SpringElement& spring,
                                   double delta);

}  // namespace tailsim

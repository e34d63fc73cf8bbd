#include "tailsim/elements.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tailsim {

namespace {
constexpr double kTinyLength = 1e-12;
}

double bar_potential(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                     const Eigen::Vector3d& ui, const Eigen::Vector3d& uj,
                     const BarElement& bar) {
  const double l0 = (xi - xj).norm();
  if (l0 < kTinyLength) {
    throw DegenerateElementError("bar rest nodes coincide");
  }
  const double l = ((xi + ui) - (xj + uj)).norm();
  const double stretch = l - l0;
  return 0.5 * bar.ea_over_l0 * stretch * stretch;
}

double angle_at_vertex(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                       const Eigen::Vector3d& xk) {
  const Eigen::Vector3d a = xi - xj;
  const Eigen::Vector3d b = xk - xj;
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kTinyLength || nb < kTinyLength) {
    throw DegenerateElementError("zero-length arm at spring vertex");
  }
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

double spring_potential(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                        const Eigen::Vector3d& xk, const Eigen::Vector3d& ui,
                        const Eigen::Vector3d& uj, const Eigen::Vector3d& uk,
                        const SpringElement& spring) {
  const double theta0 = angle_at_vertex(xi, xj, xk);
  const double theta = angle_at_vertex(xi + ui, xj + uj, xk + uk);
  const double d = theta - theta0;
  return 0.5 * spring.k_theta * d * d;
}

Eigen::MatrixXd hessian_fd(const std::function<double(const Eigen::VectorXd&)>& energy,
                           int dim, double delta) {
  auto probe = [&](const Eigen::VectorXd& u, int i, int j) {
    const double e = energy(u);
    if (!std::isfinite(e)) {
      std::ostringstream msg;
      msg << "non-finite energy at finite-difference probe (dofs " << i;
      if (j >= 0) msg << ", " << j;
      msg << ", delta " << delta << ")";
      throw Error(msg.str());
    }
    return e;
  };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(dim);
  const double e0 = probe(u, -1, -1);
  Eigen::MatrixXd K(dim, dim);
  for (int i = 0; i < dim; ++i) {
    u.setZero();
    u(i) = delta;
    const double ep = probe(u, i, -1);
    u(i) = -delta;
    const double em = probe(u, i, -1);
    K(i, i) = (ep - 2.0 * e0 + em) / (delta * delta);
    for (int j = i + 1; j < dim; ++j) {
      u.setZero();
      u(i) = delta;
      u(j) = delta;
      const double epp = probe(u, i, j);
      u(j) = -delta;
      const double epm = probe(u, i, j);
      u(i) = -delta;
      u(j) = delta;
      const double emp = probe(u, i, j);
      u(j) = -delta;
      const double emm = probe(u, i, j);
      K(i, j) = K(j, i) = (epp - epm - emp + emm) / (4.0 * delta * delta);
    }
  }
  return K;
}

LocalStiffness bar_stiffness_fd(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                                const BarElement& bar, double delta) {
  auto energy = [&](const Eigen::VectorXd& u) {
    return bar_potential(xi, xj, u.segment<3>(0), u.segment<3>(3), bar);
  };
  return {hessian_fd(energy, 6, delta), {bar.i, bar.j}};
}

LocalStiffness spring_stiffness_fd(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj,
                                   const Eigen::Vector3d& xk, const SpringElement& spring,
                                   double delta) {
  auto energy = [&](const Eigen::VectorXd& u) {
    return spring_potential(xi, xj, xk, u.segment<3>(0), u.segment<3>(3), u.segment<3>(6),
                            spring);
  };
  return {hessian_fd(energy, 9, delta), {spring.i, spring.j, spring.k}};
}

}  // namespace tailsim

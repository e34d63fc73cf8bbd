#include "tailsim/oracle.hpp"

#include <cmath>
#include <sstream>

#include "tailsim/elements.hpp"

namespace tailsim {

namespace {

std::vector<int> free_dof_list(const TailModel& model) {
  std::vector<bool> constrained(3 * model.node_count(), false);
  for (int id : model.fixed_node_ids) {
    for (int c = 0; c < 3; ++c) constrained[3 * id + c] = true;
  }
  for (int id : model.axis_pinned_node_ids) {
    constrained[3 * id] = true;      // lateral x
    constrained[3 * id + 1] = true;  // lateral y
  }
  std::vector<int> free;
  for (std::size_t d = 0; d < constrained.size(); ++d) {
    if (!constrained[d]) free.push_back(static_cast<int>(d));
  }
  return free;
}

}  // namespace

double total_potential(const TailModel& model, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& load) {
  auto disp = [&](int i) { return u.segment<3>(3 * i); };
  double energy = 0.0;
  for (const BarElement& b : model.bars) {
    energy += bar_potential(model.nodes[b.i], model.nodes[b.j], disp(b.i), disp(b.j), b);
  }
  for (const BarElement& b : model.link_bars) {
    energy += bar_potential(model.nodes[b.i], model.nodes[b.j], disp(b.i), disp(b.j), b);
  }
  for (const SpringElement& s : model.springs) {
    energy += spring_potential(model.nodes[s.i], model.nodes[s.j], model.nodes[s.k], disp(s.i),
                               disp(s.j), disp(s.k), s);
  }
  for (const SpringElement& s : model.link_springs) {
    energy += spring_potential(model.nodes[s.i], model.nodes[s.j], model.nodes[s.k], disp(s.i),
                               disp(s.j), disp(s.k), s);
  }
  return energy - load.dot(u);
}

EnergyLandscape::EnergyLandscape(const TailModel& model, Eigen::VectorXd load)
    : model_(&model), load_(std::move(load)) {}

double EnergyLandscape::operator()(const Eigen::VectorXd& u) const {
  ++evals_;
  return total_potential(*model_, u, load_);
}

MinimizeResult minimize_total_energy(const TailModel& model, const Eigen::VectorXd& load,
                                     double tol, const MinimizeOptions& options) {
  if (!(tol > 0.0)) throw DomainError("minimize_total_energy: tol must be > 0");
  if (model.fixed_node_ids.empty()) {
    throw SingularSystemError("minimize_total_energy requires an anchored model");
  }

  const EnergyLandscape pi(model, load);
  const std::vector<int> free = free_dof_list(model);
  const int n3 = 3 * model.node_count();

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n3);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n3);
  const double h = options.gradient_step;

  auto gradient_norm = [&]() {
    double norm2 = 0.0;
    grad.setZero();
    for (int d : free) {
      const double saved = u(d);
      u(d) = saved + h;
      const double ep = pi(u);
      u(d) = saved - h;
      const double em = pi(u);
      u(d) = saved;
      grad(d) = (ep - em) / (2.0 * h);
      norm2 += grad(d) * grad(d);
    }
    return std::sqrt(norm2);
  };

  MinimizeResult result;
  double energy = pi(u);
  if (options.record_energy_history) result.energy_history.push_back(energy);

  double step = options.initial_step;
  long iter = 0;
  double gnorm = gradient_norm();
  constexpr double kArmijo = 1e-4;

  while (gnorm > tol) {
    if (iter >= options.max_iterations) {
      std::ostringstream msg;
      msg << "minimize_total_energy: iteration cap " << options.max_iterations
          << " reached with gradient norm " << gnorm << " (target " << tol << ")";
      throw ConvergenceError(msg.str());
    }
    ++iter;

    const double g2 = gnorm * gnorm;
    double t = step;
    bool accepted = false;
    while (t > 1e-16) {
      const Eigen::VectorXd trial = u - t * grad;
      const double trial_energy = pi(trial);
      if (trial_energy <= energy - kArmijo * t * g2) {
        u = trial;
        energy = trial_energy;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "minimize_total_energy: line search stalled at iteration " << iter
          << " with gradient norm " << gnorm;
      throw ConvergenceError(msg.str());
    }
    step = std::min(2.0 * t, options.initial_step);
    if (options.record_energy_history) result.energy_history.push_back(energy);
    gnorm = gradient_norm();
  }

  result.displacement = u;
  result.energy = energy;
  result.gradient_norm = gnorm;
  result.iterations = iter;
  result.energy_evaluations = pi.evaluations();
  result.positions.resize(model.node_count());
  for (int i = 0; i < model.node_count(); ++i) {
    result.positions[i] = model.nodes[i] + u.segment<3>(3 * i);
  }
  return result;
}

}  // namespace tailsim

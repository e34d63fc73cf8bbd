#include "tailsim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

namespace tailsim {

namespace {

double wrap_angle_at_rest(const JointProfile& p) {
  return std::atan2(p.h / 2.0, p.r1 - p.r2);
}

Eigen::Vector2d azimuth_unit(double azimuth) {
  return {std::cos(azimuth), std::sin(azimuth)};
}

void check_node_id(int id, int n, const char* what) {
  if (id < 0 || id >= n) {
    std::ostringstream msg;
    msg << what << " references node " << id << " outside [0, " << n << ")";
    throw AssemblyError(msg.str());
  }
}

double rest_arm(const TailModel& model, int a, int b) {
  return (model.nodes[a] - model.nodes[b]).norm();
}

// ---- planar machinery -----------------------------------------------------
//
// Load cases confine deformation to the plane spanned by the tail axis and
// the pull direction, so the increments are solved on two in-plane DoF per
// node (lateral, axial) and embedded back into 3D by the bending direction.

struct PlanarElement {
  bool is_bar = true;
  int a = 0, b = 0, c = 0;
  double k = 0.0;
  double ref = 0.0;  // rest length for bars, rest angle for springs
  double delta = 0.0;
};

struct PlanarSystem {
  std::vector<Eigen::Vector2d> pos;   // (lateral, axial) per node
  std::vector<Eigen::Vector2d> rest;
  std::vector<PlanarElement> elems;
  std::vector<int> dof_index;         // 2N entries; -1 marks a constrained DoF
  int n_free = 0;
};

double planar_bar_energy(const Eigen::Vector2d& pa, const Eigen::Vector2d& pb, double k,
                         double l0) {
  const double stretch = (pa - pb).norm() - l0;
  return 0.5 * k * stretch * stretch;
}

double planar_spring_energy(const Eigen::Vector2d& pa, const Eigen::Vector2d& pb,
                            const Eigen::Vector2d& pc, double k, double theta0) {
  const Eigen::Vector2d u = pa - pb;
  const Eigen::Vector2d v = pc - pb;
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < 1e-12 || nv < 1e-12) {
    throw DegenerateElementError("zero-length arm at spring vertex");
  }
  const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  const double d = std::acos(c) - theta0;
  return 0.5 * k * d * d;
}

PlanarSystem build_planar(const TailModel& model, const FdConfig& fd) {
  PlanarSystem sys;
  const int n = model.node_count();
  sys.pos.resize(n);
  for (int i = 0; i < n; ++i) sys.pos[i] = {0.0, model.nodes[i].z()};
  sys.rest = sys.pos;

  auto add_bar = [&](const BarElement& bar) {
    check_node_id(bar.i, n, "bar");
    check_node_id(bar.j, n, "bar");
    sys.elems.push_back({true, bar.i, bar.j, 0, bar.ea_over_l0, bar.l0, fd.bar_delta(bar)});
  };
  auto add_spring = [&](const SpringElement& sp) {
    check_node_id(sp.i, n, "spring");
    check_node_id(sp.j, n, "spring");
    check_node_id(sp.k, n, "spring");
    const double delta = fd.spring_delta(rest_arm(model, sp.i, sp.j), rest_arm(model, sp.k, sp.j));
    sys.elems.push_back({false, sp.i, sp.j, sp.k, sp.k_theta, sp.theta0, delta});
  };
  for (const auto& b : model.bars) add_bar(b);
  for (const auto& b : model.link_bars) add_bar(b);
  for (const auto& s : model.springs) add_spring(s);
  for (const auto& s : model.link_springs) add_spring(s);

  sys.dof_index.assign(2 * n, 0);
  for (int id : model.fixed_node_ids) {
    check_node_id(id, n, "fixed");
    sys.dof_index[2 * id] = -1;
    sys.dof_index[2 * id + 1] = -1;
  }
  for (int id : model.axis_pinned_node_ids) {
    check_node_id(id, n, "axis-pinned");
    sys.dof_index[2 * id] = -1;  // lateral only
  }
  for (int d = 0; d < 2 * n; ++d) {
    if (sys.dof_index[d] == 0) sys.dof_index[d] = sys.n_free++;
    // already -1 otherwise
  }
  return sys;
}

// Tangent stiffness of the free DoF at the system's current positions.
Eigen::MatrixXd planar_tangent(const PlanarSystem& sys) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(sys.n_free, sys.n_free);
  for (const PlanarElement& e : sys.elems) {
    const int nodes[3] = {e.a, e.b, e.c};
    const int count = e.is_bar ? 2 : 3;
    auto energy = [&](const Eigen::VectorXd& u) {
      Eigen::Vector2d p[3];
      for (int s = 0; s < count; ++s) {
        p[s] = sys.pos[nodes[s]] + Eigen::Vector2d(u(2 * s), u(2 * s + 1));
      }
      return e.is_bar ? planar_bar_energy(p[0], p[1], e.k, e.ref)
                      : planar_spring_energy(p[0], p[1], p[2], e.k, e.ref);
    };
    const Eigen::MatrixXd H = hessian_fd(energy, 2 * count, e.delta);
    for (int sa = 0; sa < count; ++sa) {
      for (int ca = 0; ca < 2; ++ca) {
        const int ga = sys.dof_index[2 * nodes[sa] + ca];
        if (ga < 0) continue;
        for (int sb = 0; sb < count; ++sb) {
          for (int cb = 0; cb < 2; ++cb) {
            const int gb = sys.dof_index[2 * nodes[sb] + cb];
            if (gb < 0) continue;
            K(ga, gb) += H(2 * sa + ca, 2 * sb + cb);
          }
        }
      }
    }
  }
  return K;
}

double tract_spread(const MorphologySpec& spec, const std::vector<int>& tracts) {
  if (tracts.size() < 2) return 0.0;
  const Eigen::Vector2d u0 = azimuth_unit(spec.tract_azimuths[tracts[0]]);
  const Eigen::Vector2d u1 = azimuth_unit(spec.tract_azimuths[tracts[1]]);
  return std::acos(std::clamp(u0.dot(u1), -1.0, 1.0));
}

}  // namespace

GlobalSystem assemble_global(const TailModel& model, const FdConfig& fd) {
  const int n = model.node_count();
  GlobalSystem sys;
  sys.K = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  sys.load = Eigen::VectorXd::Zero(3 * n);
  sys.free_dofs.resize(3 * n);
  for (int i = 0; i < 3 * n; ++i) sys.free_dofs[i] = i;

  auto scatter = [&](const LocalStiffness& local) {
    const int count = static_cast<int>(local.node_ids.size());
    for (int sa = 0; sa < count; ++sa) {
      check_node_id(local.node_ids[sa], n, "element");
      for (int sb = 0; sb < count; ++sb) {
        sys.K.block<3, 3>(3 * local.node_ids[sa], 3 * local.node_ids[sb]) +=
            local.matrix.block<3, 3>(3 * sa, 3 * sb);
      }
    }
  };

  auto add_bar = [&](const BarElement& bar) {
    check_node_id(bar.i, n, "bar");
    check_node_id(bar.j, n, "bar");
    scatter(bar_stiffness_fd(model.nodes[bar.i], model.nodes[bar.j], bar, fd.bar_delta(bar)));
  };
  auto add_spring = [&](const SpringElement& sp) {
    check_node_id(sp.i, n, "spring");
    check_node_id(sp.j, n, "spring");
    check_node_id(sp.k, n, "spring");
    const double delta = fd.spring_delta(rest_arm(model, sp.i, sp.j), rest_arm(model, sp.k, sp.j));
    scatter(spring_stiffness_fd(model.nodes[sp.i], model.nodes[sp.j], model.nodes[sp.k], sp,
                                delta));
  };
  for (const auto& b : model.bars) add_bar(b);
  for (const auto& b : model.link_bars) add_bar(b);
  for (const auto& s : model.springs) add_spring(s);
  for (const auto& s : model.link_springs) add_spring(s);
  return sys;
}

ReducedSystem apply_constraints(const GlobalSystem& system, const std::vector<int>& fixed_nodes) {
  const int dofs = static_cast<int>(system.K.rows());
  const int n = dofs / 3;
  if (fixed_nodes.empty()) {
    throw SingularSystemError(
        "no fixed nodes: rigid-body translation of the whole model is unconstrained");
  }
  std::vector<bool> is_fixed(dofs, false);
  for (int id : fixed_nodes) {
    if (id < 0 || id >= n) {
      std::ostringstream msg;
      msg << "fixed node " << id << " outside [0, " << n << ")";
      throw DomainError(msg.str());
    }
    for (int c = 0; c < 3; ++c) is_fixed[3 * id + c] = true;
  }
  ReducedSystem reduced;
  for (int d = 0; d < dofs; ++d) {
    if (!is_fixed[d]) reduced.free_dofs.push_back(d);
  }
  if (reduced.free_dofs.empty()) {
    throw DomainError("all DoF fixed: nothing left to solve");
  }
  const int m = static_cast<int>(reduced.free_dofs.size());
  reduced.K.resize(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      reduced.K(a, b) = system.K(reduced.free_dofs[a], reduced.free_dofs[b]);
    }
  }
  return reduced;
}

std::pair<double, double> decompose_tendon_load(double F, const JointProfile& profile,
                                                double gamma) {
  if (F < 0.0) throw DomainError("decompose_tendon_load: force must be >= 0");
  const double M = F * moment_arm(profile, gamma);
  return {F, 2.0 * M / profile.h};
}

void LoadCase::validate(const MorphologySpec& spec) const {
  if (steps < 1) throw DomainError("load case: steps must be >= 1");
  if (force.has_value() == displacement.has_value()) {
    throw DomainError("load case: exactly one of force or displacement must be set");
  }
  if (force && *force < 0.0) throw DomainError("load case: force must be >= 0");
  if (displacement && *displacement < 0.0) {
    throw DomainError("load case: displacement must be >= 0");
  }
  if (tracts.empty() || tracts.size() > 2) {
    throw DomainError("load case: select one tract or two adjacent tracts");
  }
  for (int t : tracts) {
    if (t < 0 || t > 3) throw DomainError("load case: tract ids must be in 0..3");
  }
  if (tracts.size() == 2) {
    if (tracts[0] == tracts[1]) throw DomainError("load case: tract ids must be distinct");
    const double spread = tract_spread(spec, tracts);
    if (spread > std::numbers::pi - 1e-9) {
      throw DomainError("load case: two tracts must be azimuth-adjacent, not opposing");
    }
  }
}

Eigen::Vector3d bend_direction(const MorphologySpec& spec, const std::vector<int>& tracts) {
  Eigen::Vector2d dir = Eigen::Vector2d::Zero();
  for (int t : tracts) dir += azimuth_unit(spec.tract_azimuths[t]);
  const double norm = dir.norm();
  if (norm < 1e-9) {
    throw DomainError("pulled tracts have no resultant direction (opposing azimuths)");
  }
  dir /= norm;
  return {dir.x(), dir.y(), 0.0};
}

double resultant_force(double force_per_motor, const MorphologySpec& spec,
                       const std::vector<int>& tracts) {
  if (tracts.size() < 2) return force_per_motor;
  const double spread = tract_spread(spec, tracts);
  return force_per_motor * std::sqrt(2.0) * std::cos(spread / 2.0);
}

Eigen::MatrixXd planar_reduced_stiffness(const TailModel& model, const FdConfig& fd) {
  return planar_tangent(build_planar(model, fd));
}

SolveResult euler_solve(const TailModel& model, const LoadCase& load_case, const FdConfig& fd) {
  load_case.validate(model.spec);
  if (!load_case.force) {
    throw DomainError(
        "euler_solve requires a force-commanded case; convert a displacement command through "
        "the calibration fit first");
  }
  if (model.fixed_node_ids.empty()) {
    throw SingularSystemError("euler_solve requires an anchored model");
  }

  const JointProfile& profile = model.spec.joint;
  const double gamma_rest = wrap_angle_at_rest(profile);
  const int steps = load_case.steps;
  const int n = model.node_count();
  const int tip = n - 1;
  const int neck = n - 2;

  PlanarSystem sys = build_planar(model, fd);
  SolveResult result;
  result.bend_dir = bend_direction(model.spec, load_case.tracts);
  result.applied_load = Eigen::VectorXd::Zero(3 * n);

  const double dF_motor = *load_case.force / steps;
  const double dF = resultant_force(dF_motor, model.spec, load_case.tracts);

  auto snapshot = [&]() {
    std::vector<Eigen::Vector3d> out(n);
    for (int i = 0; i < n; ++i) {
      out[i] = Eigen::Vector3d(result.bend_dir.x() * sys.pos[i].x(),
                               result.bend_dir.y() * sys.pos[i].x(), sys.pos[i].y());
    }
    return out;
  };
  auto current_gamma = [&]() {
    const Eigen::Vector2d d = sys.pos[tip] - sys.pos[neck];
    const double beta = std::atan2(d.x(), d.y());
    return std::clamp(gamma_rest - beta, 0.0, std::numbers::pi / 2.0);
  };

  result.node_history.push_back(snapshot());
  result.force_history.push_back(0.0);
  result.gamma_history.push_back(current_gamma());

  for (int step = 1; step <= steps; ++step) {
    const double gamma = current_gamma();
    const auto [f_par, f_perp] = decompose_tendon_load(dF, profile, gamma);

    Eigen::MatrixXd K = planar_tangent(sys);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.n_free);
    const int dof_lat = sys.dof_index[2 * tip];
    const int dof_ax = sys.dof_index[2 * tip + 1];
    if (dof_lat >= 0) rhs(dof_lat) += f_perp;
    if (dof_ax >= 0) rhs(dof_ax) -= f_par;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) {
      std::ostringstream msg;
      msg << "singular stiffness matrix at increment " << step << " of " << steps;
      throw ConvergenceError(msg.str());
    }
    const Eigen::VectorXd du = lu.solve(rhs);
    if (!du.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite displacement at increment " << step << " of " << steps;
      throw ConvergenceError(msg.str());
    }

    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) {
        const int g = sys.dof_index[2 * i + c];
        if (g >= 0) sys.pos[i](c) += du(g);
      }
    }

    result.applied_load(3 * tip + 0) += result.bend_dir.x() * f_perp;
    result.applied_load(3 * tip + 1) += result.bend_dir.y() * f_perp;
    result.applied_load(3 * tip + 2) -= f_par;

    if (load_case.record_history || step == steps) {
      result.node_history.push_back(snapshot());
      result.force_history.push_back(step * dF_motor);
      result.gamma_history.push_back(current_gamma());
    }
  }

  result.final_pose = result.node_history.back();
  return result;
}

double tendon_attachment_displacement(const TailModel& model, const SolveResult& result,
                                      const LoadCase& load_case) {
  const int n = model.node_count();
  const Eigen::Vector3d& tip3 = result.final_pose[n - 1];
  const Eigen::Vector3d& neck3 = result.final_pose[n - 2];
  const Eigen::Vector2d lat2(result.bend_dir.x(), result.bend_dir.y());

  auto to_plane = [&](const Eigen::Vector3d& p) {
    return Eigen::Vector2d(p.head<2>().dot(lat2), p.z());
  };
  const Eigen::Vector2d tip = to_plane(tip3);
  const Eigen::Vector2d neck = to_plane(neck3);
  Eigen::Vector2d u = tip - neck;
  const double nu = u.norm();
  if (nu < 1e-12) throw DegenerateElementError("collapsed terminal joint");
  u /= nu;
  const Eigen::Vector2d nrm(u.y(), -u.x());  // lateral ring direction, rotated with the cap

  const double a_eff =
      model.spec.tract_radius * std::cos(tract_spread(model.spec, load_case.tracts) / 2.0);
  const Eigen::Vector2d attach =
      tip + a_eff * nrm + model.spec.endcap_length * u;
  const Eigen::Vector2d attach_rest(a_eff, model.attachment_z());
  return (attach - attach_rest).norm();
}

}  // namespace tailsim

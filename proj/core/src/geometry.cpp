#include "tailsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tailsim {

namespace {

// Printed bone material is roughly three orders of magnitude stiffer than the
// joint elastomer; bone couplers and glued interfaces use these scales so the
// bones behave as rigid bodies without special-casing them in the solver.
constexpr double kLinkModulusMpa = 3600.0;
constexpr double kGlueStiffnessFactor = 1.0e4;

double wrap_two_pi(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  return r;
}

}  // namespace

void JointProfile::validate() const {
  std::ostringstream msg;
  if (!(h > 0.0)) {
    msg << "joint.h must be > 0 (got " << h << ")";
  } else if (!(r2 > 0.0)) {
    msg << "joint.r2 must be > 0 (got " << r2 << ")";
  } else if (!(r1 > r2)) {
    msg << "joint.r1 must exceed joint.r2 (got r1=" << r1 << ", r2=" << r2 << ")";
  } else if (!(E > 0.0)) {
    msg << "joint.E must be > 0 (got " << E << ")";
  } else if (!(k_theta > 0.0)) {
    msg << "joint.k_theta must be > 0 (got " << k_theta << ")";
  } else {
    return;
  }
  throw ConstructionError(msg.str());
}

double radius_at(const JointProfile& profile, double y) {
  if (y < 0.0 || y > profile.h) {
    std::ostringstream msg;
    msg << "radius_at: y=" << y << " outside [0, " << profile.h << "]";
    throw DomainError(msg.str());
  }
  const double half = profile.h / 2.0;
  const double t = (y <= half) ? y / half : (profile.h - y) / half;
  return profile.r1 + (profile.r2 - profile.r1) * t;
}

double cross_section_area(const JointProfile& profile, double y) {
  const double r = radius_at(profile, y);
  return std::numbers::pi * r * r;
}

double moment_arm(const JointProfile& profile, double gamma) {
  if (gamma < 0.0 || gamma > std::numbers::pi / 2.0 + 1e-15) {
    std::ostringstream msg;
    msg << "moment_arm: gamma=" << gamma << " outside [0, pi/2]";
    throw DomainError(msg.str());
  }
  const double slant = std::hypot(profile.r1 - profile.r2, profile.h / 2.0);
  return profile.r2 + slant * std::cos(gamma);
}

double effective_axial_stiffness(const JointProfile& profile) {
  // Only positivity is needed here: the series integral is also valid for a
  // uniform section (r1 == r2), which full profile validation rejects.
  if (!(profile.h > 0.0) || !(profile.r1 > 0.0) || !(profile.r2 > 0.0) ||
      !(profile.E > 0.0)) {
    throw DomainError("effective_axial_stiffness needs positive h, r1, r2, and E");
  }
  return profile.E * std::numbers::pi * profile.r1 * profile.r2 / (profile.h / 2.0);
}

std::array<double, 4> MorphologySpec::default_azimuths() {
  const double d = std::numbers::pi / 180.0;
  return {45.0 * d, 135.0 * d, 225.0 * d, 315.0 * d};
}

void MorphologySpec::validate() const {
  joint.validate();
  if (bone_lengths.empty()) {
    throw ConstructionError("bone_lengths must contain at least one bone");
  }
  for (std::size_t i = 0; i < bone_lengths.size(); ++i) {
    if (!(bone_lengths[i] > 0.0)) {
      std::ostringstream msg;
      msg << "bone_lengths[" << i << "] must be > 0 (got " << bone_lengths[i] << ")";
      throw ConstructionError(msg.str());
    }
  }
  if (!(endcap_length > 0.0)) {
    std::ostringstream msg;
    msg << "endcap_length must be > 0 (got " << endcap_length << ")";
    throw ConstructionError(msg.str());
  }
  if (!(tract_radius > 0.0)) {
    std::ostringstream msg;
    msg << "tract_radius must be > 0 (got " << tract_radius << ")";
    throw ConstructionError(msg.str());
  }
  if (base_offset < 0.0) {
    std::ostringstream msg;
    msg << "base_offset must be >= 0 (got " << base_offset << ")";
    throw ConstructionError(msg.str());
  }
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const double d = wrap_two_pi(tract_azimuths[a] - tract_azimuths[b]);
      if (std::min(d, 2.0 * std::numbers::pi - d) < 1e-9) {
        std::ostringstream msg;
        msg << "tract_azimuths[" << a << "] and tract_azimuths[" << b
            << "] coincide modulo 2 pi";
        throw ConstructionError(msg.str());
      }
    }
  }
}

TailModel build_tail(const MorphologySpec& spec) {
  spec.validate();

  TailModel model;
  model.spec = spec;

  const int joints = spec.joint_count();
  const double h = spec.joint.h;
  const double half = h / 2.0;
  const double k_half = effective_axial_stiffness(spec.joint);

  // Joint j sits after bones 0..j; three nodes at its base, neck, and tip.
  double z = spec.base_offset;
  std::vector<double> joint_base_z(joints);
  for (int j = 0; j < joints; ++j) {
    z += spec.bone_lengths[j];
    joint_base_z[j] = z;
    z += h;
  }
  model.total_length = z + spec.endcap_length;

  for (int j = 0; j < joints; ++j) {
    const double zb = joint_base_z[j];
    model.nodes.emplace_back(0.0, 0.0, zb);
    model.nodes.emplace_back(0.0, 0.0, zb + half);
    model.nodes.emplace_back(0.0, 0.0, zb + h);
    model.bars.push_back({3 * j, 3 * j + 1, k_half, half});
    model.bars.push_back({3 * j + 1, 3 * j + 2, k_half, half});
    model.springs.push_back({3 * j, 3 * j + 1, 3 * j + 2, spec.joint.k_theta, std::numbers::pi});
  }

  // Bones between joints: one stiff coupler bar plus glued-interface springs
  // on both sides so the bone cannot hinge at its end faces.
  const double bone_area = std::numbers::pi * spec.joint.r1 * spec.joint.r1;
  const double k_glue = kGlueStiffnessFactor * spec.joint.k_theta;
  for (int j = 0; j + 1 < joints; ++j) {
    const int tip = 3 * j + 2;
    const int next_base = 3 * (j + 1);
    const double bone = spec.bone_lengths[j + 1];
    model.link_bars.push_back({tip, next_base, kLinkModulusMpa * bone_area / bone, bone});
    model.link_springs.push_back({3 * j + 1, tip, next_base, k_glue, std::numbers::pi});
    model.link_springs.push_back({tip, next_base, 3 * (j + 1) + 1, k_glue, std::numbers::pi});
  }

  model.fixed_node_ids = {0};
  model.axis_pinned_node_ids = {1};

  // Tendon loops: one exit ring on the fixed bone just below the first joint,
  // a ring near each end of every moving bone, and the cap attachment ring.
  // Rings sit half a cap length in from the bone ends.
  const double inset = spec.endcap_length / 2.0;
  const double z_attach = model.nodes.back().z() + spec.endcap_length;
  for (int t = 0; t < 4; ++t) {
    const double ca = std::cos(spec.tract_azimuths[t]);
    const double sa = std::sin(spec.tract_azimuths[t]);
    auto ring = [&](double zr) {
      return Eigen::Vector3d(spec.tract_radius * ca, spec.tract_radius * sa, zr);
    };
    auto& pts = model.tracts[t];
    pts.push_back(ring(joint_base_z[0] - inset));
    for (int j = 0; j + 1 < joints; ++j) {
      const double bone_start = joint_base_z[j] + h;
      pts.push_back(ring(bone_start + inset));
      pts.push_back(ring(bone_start + spec.bone_lengths[j + 1] - inset));
    }
    pts.push_back(ring(z_attach));
  }

  return model;
}

TailModel single_joint_rig(const JointProfile& profile) {
  MorphologySpec spec;
  spec.name = "single_joint_rig";
  spec.bone_lengths = {30.0};
  spec.endcap_length = 6.0;
  spec.joint = profile;
  spec.tract_radius = profile.r1;
  spec.base_offset = 12.0;
  return build_tail(spec);
}

}  // namespace tailsim

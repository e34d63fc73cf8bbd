#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tailsim/error.hpp"

namespace tailsim {

// Hourglass joint: two mirrored linear frustums meeting at the neck (y = h/2).
// Units are mm, N, N*mm, rad, MPa throughout the library.
struct JointProfile {
  double h = 12.0;        // joint length along the tail axis (mm)
  double r1 = 10.2;       // radius at both joint ends (mm)
  double r2 = 4.615;      // radius at the neck (mm)
  double E = 0.6;         // axial modulus of the joint material (MPa)
  double k_theta = 50.0;  // rotational stiffness about the neck (N*mm/rad)

  void validate() const;
};

// Radius of the joint profile at axial coordinate y in [0, h].
double radius_at(const JointProfile& profile, double y);

// Circular cross-section area at axial coordinate y (mm^2).
double cross_section_area(const JointProfile& profile, double y);

// Tendon lever arm about the neck for wrap angle gamma in [0, pi/2] (mm).
double moment_arm(const JointProfile& profile, double gamma);

// Axial stiffness of one half-joint treated as a single bar (N/mm): the
// series integral of the linearly tapered section, E*pi*r1*r2 / (h/2).
double effective_axial_stiffness(const JointProfile& profile);

struct MorphologySpec {
  std::string name = "tail";
  std::vector<double> bone_lengths;  // ordered from the base; the first bone is fixed (mm)
  double endcap_length = 6.0;        // rigid cap glued past the last joint (mm)
  JointProfile joint;
  double tract_radius = 10.2;        // radial offset of tendon loops from the axis (mm)
  std::array<double, 4> tract_azimuths;  // rad; defaults to 45/135/225/315 degrees
  double base_offset = 0.0;          // mount stand-off before the first bone (mm)

  MorphologySpec() : tract_azimuths(default_azimuths()) {}

  static std::array<double, 4> default_azimuths();
  int joint_count() const { return static_cast<int>(bone_lengths.size()); }
  void validate() const;
};

struct BarElement {
  int i = 0, j = 0;         // node ids
  double ea_over_l0 = 0.0;  // axial stiffness (N/mm)
  double l0 = 0.0;          // rest length (mm)
};

struct SpringElement {
  int i = 0, j = 0, k = 0;  // node ids, vertex at j
  double k_theta = 0.0;     // rotational stiffness (N*mm/rad)
  double theta0 = 0.0;      // rest angle at the vertex (rad)
};

// Node/bar/spring discretization of one tail. Each joint contributes three
// collinear nodes (base, neck, tip), two half-bars, and one rotational spring.
// Bones between joints enter as much stiffer couplers (link_bars plus
// link_springs at the glued interfaces) so bending concentrates at the necks.
struct TailModel {
  MorphologySpec spec;
  std::vector<Eigen::Vector3d> nodes;  // rest positions; tail axis is +z
  std::vector<BarElement> bars;        // joint half-bars
  std::vector<SpringElement> springs;  // one per joint, vertex at the neck
  std::vector<BarElement> link_bars;
  std::vector<SpringElement> link_springs;
  std::array<std::vector<Eigen::Vector3d>, 4> tracts;  // loop points, attachment last
  std::vector<int> fixed_node_ids;        // fully clamped nodes
  std::vector<int> axis_pinned_node_ids;  // lateral DoF held on the axis
  double total_length = 0.0;

  int joint_count() const { return static_cast<int>(springs.size()); }
  int node_count() const { return static_cast<int>(nodes.size()); }
  double neck_z(int joint) const { return nodes[3 * joint + 1].z(); }
  double attachment_z() const { return nodes.back().z() + spec.endcap_length; }
};

TailModel build_tail(const MorphologySpec& spec);

// Single-joint bench model: one fixed bone, one joint, cap; tendon loops at
// the profile's end radius. Used for calibration against pull-test data.
TailModel single_joint_rig(const JointProfile& profile);

}  // namespace tailsim

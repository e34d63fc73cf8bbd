#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <tailsim/geometry.hpp>

using namespace tailsim;

namespace {

JointProfile reference_profile() {
  JointProfile p;
  p.h = 12.0;
  p.r1 = 10.2;
  p.r2 = 4.615;
  p.E = 0.6;
  p.k_theta = 50.0;
  return p;
}

MorphologySpec spec_with_bones(std::vector<double> bones) {
  MorphologySpec s;
  s.bone_lengths = std::move(bones);
  s.endcap_length = 6.0;
  s.joint = reference_profile();
  s.tract_radius = 10.2;
  s.base_offset = 12.0;
  return s;
}

double polyline_length(const std::vector<Eigen::Vector3d>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

}  // namespace

TEST_CASE("radius_at endpoints, neck, and midpoint") {
  const JointProfile p = reference_profile();
  CHECK(radius_at(p, 0.0) == doctest::Approx(10.2).epsilon(1e-12));
  CHECK(radius_at(p, 6.0) == doctest::Approx(4.615).epsilon(1e-12));
  CHECK(radius_at(p, 3.0) == doctest::Approx(7.4075).epsilon(1e-12));  // (r1 + r2) / 2
  CHECK(radius_at(p, 12.0) == doctest::Approx(10.2).epsilon(1e-12));
  CHECK(radius_at(p, 9.0) == doctest::Approx(7.4075).epsilon(1e-12));  // mirror of y = 3
}

TEST_CASE("radius_at rejects y outside [0, h]") {
  const JointProfile p = reference_profile();
  CHECK_THROWS_AS(radius_at(p, -0.001), DomainError);
  CHECK_THROWS_AS(radius_at(p, 12.001), DomainError);
}

TEST_CASE("radius_at is continuous, piecewise linear, with exact extrema") {
  const JointProfile p = reference_profile();
  double maxr = 0.0, minr = 1e30;
  for (int i = 0; i <= 1200; ++i) {
    const double y = p.h * i / 1200.0;
    const double r = radius_at(p, y);
    maxr = std::max(maxr, r);
    minr = std::min(minr, r);
  }
  CHECK(maxr == 10.2);
  CHECK(minr == doctest::Approx(4.615).epsilon(1e-14));
  // continuity across the neck
  CHECK(radius_at(p, 6.0 - 1e-9) == doctest::Approx(radius_at(p, 6.0 + 1e-9)).epsilon(1e-6));
  // linearity on each half: midpoint rule holds exactly
  CHECK(radius_at(p, 1.5) == doctest::Approx(0.5 * (radius_at(p, 0.0) + radius_at(p, 3.0))).epsilon(1e-12));
  CHECK(radius_at(p, 10.5) == doctest::Approx(0.5 * (radius_at(p, 9.0) + radius_at(p, 12.0))).epsilon(1e-12));
}

TEST_CASE("cross_section_area evaluates pi r^2 and is symmetric") {
  const JointProfile p = reference_profile();
  CHECK(cross_section_area(p, 6.0) == doctest::Approx(66.91034719450248).epsilon(1e-12));
  CHECK(cross_section_area(p, 0.0) == doctest::Approx(326.85129967948205).epsilon(1e-12));
  CHECK(cross_section_area(p, p.h) == cross_section_area(p, 0.0));
  CHECK_THROWS_AS(cross_section_area(p, -1.0), DomainError);
}

TEST_CASE("moment_arm at the cardinal wrap angles") {
  const JointProfile p = reference_profile();
  // l(gamma) = r2 + sqrt((r1-r2)^2 + (h/2)^2) * cos(gamma)
  CHECK(moment_arm(p, 0.0) == doctest::Approx(12.812086372608258).epsilon(1e-12));
  CHECK(moment_arm(p, std::numbers::pi / 2) == doctest::Approx(4.615).epsilon(1e-12));
  CHECK(moment_arm(p, std::numbers::pi / 3) == doctest::Approx(8.713543186304129).epsilon(1e-12));
}

TEST_CASE("moment_arm is monotonically non-increasing on [0, pi/2]") {
  const JointProfile p = reference_profile();
  double prev = moment_arm(p, 0.0);
  for (int i = 1; i <= 200; ++i) {
    const double g = (std::numbers::pi / 2) * i / 200.0;
    const double l = moment_arm(p, g);
    CHECK(l <= prev + 1e-15);
    prev = l;
  }
  CHECK_THROWS_AS(moment_arm(p, -0.01), DomainError);
  CHECK_THROWS_AS(moment_arm(p, std::numbers::pi / 2 + 0.01), DomainError);
}

TEST_CASE("effective_axial_stiffness matches the series quadrature of the taper") {
  JointProfile p = reference_profile();
  p.E = 1.0;
  CHECK(effective_axial_stiffness(p) == doctest::Approx(24.647365163738723).epsilon(1e-12));

  // independent oracle: Simpson quadrature of integral dy / (pi r(y)^2) over [0, h/2]
  const int n = 4000;
  const double half = p.h / 2.0;
  double integral = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y0 = half * i / n;
    const double y1 = half * (i + 1) / n;
    const double ym = 0.5 * (y0 + y1);
    auto f = [&](double y) { return 1.0 / cross_section_area(p, y); };
    integral += (y1 - y0) / 6.0 * (f(y0) + 4.0 * f(ym) + f(y1));
  }
  CHECK(effective_axial_stiffness(p) == doctest::Approx(p.E / integral).epsilon(1e-9));
}

TEST_CASE("effective_axial_stiffness degenerates to a uniform bar and is linear in E") {
  JointProfile p = reference_profile();
  p.r1 = p.r2 = 5.0;
  p.E = 2.0;
  CHECK(effective_axial_stiffness(p) ==
        doctest::Approx(p.E * std::numbers::pi * 25.0 / (p.h / 2.0)).epsilon(1e-12));
  JointProfile q = reference_profile();
  JointProfile q_half = q;
  q_half.E = q.E / 2.0;
  CHECK(effective_axial_stiffness(q_half) ==
        doctest::Approx(0.5 * effective_axial_stiffness(q)).epsilon(1e-12));
}

TEST_CASE("profile and morphology validation name the offending field") {
  JointProfile p = reference_profile();
  p.r2 = 11.0;  // violates r1 > r2
  CHECK_THROWS_AS(p.validate(), ConstructionError);

  MorphologySpec bad = spec_with_bones({18.0, -1.0, 60.0});
  CHECK_THROWS_WITH_AS(bad.validate(),
                       doctest::Contains("bone_lengths[1]"), ConstructionError);

  MorphologySpec dup = spec_with_bones({18.0, 18.0, 60.0});
  dup.tract_azimuths[1] = dup.tract_azimuths[0];
  CHECK_THROWS_WITH_AS(dup.validate(),
                       doctest::Contains("tract_azimuths"), ConstructionError);

  MorphologySpec wrap = spec_with_bones({18.0});
  wrap.tract_azimuths[3] = wrap.tract_azimuths[0] + 4.0 * std::numbers::pi;  // same mod 2 pi
  CHECK_THROWS_AS(wrap.validate(), ConstructionError);
}

TEST_CASE("build_tail single joint yields 3 nodes, 2 bars, 1 spring") {
  const TailModel m = build_tail(spec_with_bones({30.0}));
  CHECK(m.nodes.size() == 3);
  CHECK(m.bars.size() == 2);
  CHECK(m.springs.size() == 1);
  CHECK(m.link_bars.empty());
  CHECK(m.link_springs.empty());
  CHECK(m.fixed_node_ids == std::vector<int>{0});
  CHECK(m.axis_pinned_node_ids == std::vector<int>{1});
}

TEST_CASE("build_tail three joints yields 3 springs and 6 bars") {
  const TailModel m = build_tail(spec_with_bones({18.0, 18.0, 60.0}));
  CHECK(m.springs.size() == 3);
  CHECK(m.bars.size() == 6);
  CHECK(m.nodes.size() == 9);
  CHECK(m.link_bars.size() == 2);
  CHECK(m.link_springs.size() == 4);
}

TEST_CASE("build_tail places the reference chain at the documented heights") {
  const TailModel m = build_tail(spec_with_bones({18.0, 18.0, 60.0}));
  CHECK(m.total_length == doctest::Approx(150.0).epsilon(1e-12));
  const double zs[9] = {30, 36, 42, 60, 66, 72, 132, 138, 144};
  for (int i = 0; i < 9; ++i) {
    CHECK(m.nodes[i].x() == 0.0);
    CHECK(m.nodes[i].y() == 0.0);
    CHECK(m.nodes[i].z() == doctest::Approx(zs[i]).epsilon(1e-12));
  }
  CHECK(m.attachment_z() == doctest::Approx(150.0).epsilon(1e-12));
  CHECK(m.neck_z(0) == doctest::Approx(36.0));
  CHECK(m.neck_z(2) == doctest::Approx(138.0));
}

TEST_CASE("total_length sums the configured components for every morphology") {
  for (auto bones : {std::vector<double>{18, 18, 60}, {18, 60, 18}, {60, 18, 18}}) {
    const TailModel m = build_tail(spec_with_bones(bones));
    CHECK(m.total_length == doctest::Approx(12.0 + 96.0 + 3 * 12.0 + 6.0).epsilon(1e-12));
  }
  const TailModel rig = build_tail(spec_with_bones({30.0}));
  CHECK(rig.total_length == doctest::Approx(12.0 + 30.0 + 12.0 + 6.0).epsilon(1e-12));
}

TEST_CASE("element stiffness values come from the joint profile") {
  const MorphologySpec s = spec_with_bones({18.0, 18.0, 60.0});
  const TailModel m = build_tail(s);
  const double k_half = effective_axial_stiffness(s.joint);
  for (const BarElement& b : m.bars) {
    CHECK(b.ea_over_l0 == doctest::Approx(k_half).epsilon(1e-12));
    CHECK(b.l0 == doctest::Approx(6.0).epsilon(1e-12));
  }
  for (const SpringElement& sp : m.springs) {
    CHECK(sp.k_theta == doctest::Approx(s.joint.k_theta).epsilon(1e-12));
    CHECK(sp.theta0 == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  }
  // link elements are orders of magnitude stiffer than the joint elements
  for (const BarElement& b : m.link_bars) CHECK(b.ea_over_l0 > 100.0 * k_half);
  for (const SpringElement& sp : m.link_springs) CHECK(sp.k_theta > 100.0 * s.joint.k_theta);
}

TEST_CASE("tract loop points sit at the documented heights and radius") {
  const TailModel m = build_tail(spec_with_bones({18.0, 18.0, 60.0}));
  const double expect_z[6] = {27, 45, 57, 75, 129, 150};
  for (int t = 0; t < 4; ++t) {
    const auto& pts = m.tracts[t];
    REQUIRE(pts.size() == 6);
    for (int i = 0; i < 6; ++i) {
      CHECK(pts[i].z() == doctest::Approx(expect_z[i]).epsilon(1e-12));
      CHECK(pts[i].head<2>().norm() == doctest::Approx(10.2).epsilon(1e-12));
    }
  }
  const TailModel rig = build_tail(spec_with_bones({30.0}));
  REQUIRE(rig.tracts[0].size() == 2);
  CHECK(rig.tracts[0][0].z() == doctest::Approx(39.0));
  CHECK(rig.tracts[0][1].z() == doctest::Approx(60.0));
}

TEST_CASE("rest tract length equals the straight polyline through the loops") {
  const TailModel m = build_tail(spec_with_bones({18.0, 18.0, 60.0}));
  for (int t = 0; t < 4; ++t) {
    const auto& pts = m.tracts[t];
    // all loops share one azimuth, so the polyline is a straight axial line
    CHECK(polyline_length(pts) ==
          doctest::Approx(pts.back().z() - pts.front().z()).epsilon(1e-12));
  }
}

TEST_CASE("single_joint_rig mirrors the bench setup") {
  const JointProfile p = reference_profile();
  const TailModel rig = single_joint_rig(p);
  CHECK(rig.joint_count() == 1);
  CHECK(rig.spec.tract_radius == doctest::Approx(p.r1));
  CHECK(rig.nodes.size() == 3);
  CHECK(rig.attachment_z() - rig.nodes[0].z() == doctest::Approx(p.h + 6.0));
}

TEST_CASE("build_tail rejects invalid specs with a construction error") {
  MorphologySpec s = spec_with_bones({});
  CHECK_THROWS_WITH_AS(build_tail(s), doctest::Contains("bone_lengths"), ConstructionError);
}

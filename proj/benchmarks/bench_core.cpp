#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "tailsim/analysis.hpp"
#include "tailsim/elements.hpp"
#include "tailsim/geometry.hpp"
#include "tailsim/solver.hpp"
#include "tailsim/tail.hpp"

namespace {

using namespace tailsim;

MorphologySpec ssl_spec() {
  MorphologySpec spec;
  spec.name = "ssl";
  spec.bone_lengths = {18.0, 18.0, 60.0};
  spec.base_offset = 12.0;
  return spec;
}

void BM_BarHessianFd(benchmark::State& state) {
  const Eigen::Vector3d xi(1.0, 2.0, 3.0);
  const Eigen::Vector3d xj(7.0, -1.0, 12.0);
  BarElement bar;
  bar.i = 0;
  bar.j = 1;
  bar.l0 = (xj - xi).norm();
  bar.ea_over_l0 = 15.0;
  const FdConfig fd;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bar_stiffness_fd(xi, xj, bar, fd.bar_delta(bar)));
  }
}
BENCHMARK(BM_BarHessianFd);

void BM_SpringHessianFd(benchmark::State& state) {
  const Eigen::Vector3d xi(0.0, 0.0, 0.0);
  const Eigen::Vector3d xj(0.0, 0.0, 6.0);
  const Eigen::Vector3d xk(1.0, 0.0, 12.0);
  SpringElement spring;
  spring.i = 0;
  spring.j = 1;
  spring.k = 2;
  spring.k_theta = 50.0;
  spring.theta0 = std::numbers::pi;
  const FdConfig fd;
  const double delta = fd.spring_delta((xi - xj).norm(), (xk - xj).norm());
  for (auto _ : state) {
    benchmark::DoNotOptimize(spring_stiffness_fd(xi, xj, xk, spring, delta));
  }
}
BENCHMARK(BM_SpringHessianFd);

void BM_SingleJointEuler(benchmark::State& state) {
  const TailModel rig = single_joint_rig(JointProfile{});
  LoadCase load_case;
  load_case.tracts = {0};
  load_case.force = 0.8;
  load_case.record_history = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(euler_solve(rig, load_case));
  }
}
BENCHMARK(BM_SingleJointEuler);

void BM_ThreeJointEuler(benchmark::State& state) {
  const TailModel model = build_tail(ssl_spec());
  LoadCase load_case;
  load_case.tracts = {0};
  load_case.force = 0.5;
  load_case.record_history = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(euler_solve(model, load_case));
  }
}
BENCHMARK(BM_ThreeJointEuler);

void BM_StudentizedRangeCdf(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(studentized_range_cdf(3.0, 3, 117));
  }
}
BENCHMARK(BM_StudentizedRangeCdf);

void BM_UniformBendSweepCase(benchmark::State& state) {
  const TailModel model = build_tail(ssl_spec());
  const std::vector<int> tracts = {0};
  for (auto _ : state) {
    const double theta = uniform_bend_angle(model, tracts, 12.0);
    benchmark::DoNotOptimize(predict_pose_uniform(model, theta, tracts));
  }
}
BENCHMARK(BM_UniformBendSweepCase);

}  // namespace

BENCHMARK_MAIN();

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "tailsim/error.hpp"

namespace tailsim {

struct PlanarPoint {
  double rho = 0.0;  // radial distance from the tail axis (mm)
  double z = 0.0;    // height along the axis (mm)
};

// Marker positions collapsed into the bending plane, tip marker last.
struct PlanarPose {
  std::vector<PlanarPoint> bones;
};

// Project 3D marker positions onto (radial, axial) coordinates about the line
// through `origin` along `axis`.
PlanarPose collapse_to_plane(const std::vector<Eigen::Vector3d>& positions,
                             const Eigen::Vector3d& origin, const Eigen::Vector3d& axis);

struct TipMetrics {
  double perp = 0.0;    // axial height kept by the tip marker (mm)
  double radial = 0.0;  // radial reach of the tip marker (mm)
};

TipMetrics tip_metrics(const PlanarPose& pose);

// Repeatability per tracked body: root mean square distance over all ordered
// trial pairs, one value per body.
std::vector<double> pairwise_std(const std::vector<std::vector<Eigen::Vector3d>>& trials);

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  double ms_between = 0.0;
  double ms_within = 0.0;
  int df_between = 0;
  int df_within = 0;
};

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

// Tukey-Kramer adjusted p-values for every group pair; 1 on the diagonal.
Eigen::MatrixXd tukey_hsd(const std::vector<std::vector<double>>& groups);

// Root mean square of per-body planar distances between predicted and
// reference poses, as a percentage of the tail length.
double normalized_rms_error(const std::vector<PlanarPose>& predicted,
                            const std::vector<PlanarPose>& reference,
                            double total_length_mm);
double normalized_rms_error(const PlanarPose& predicted, const PlanarPose& reference,
                            double total_length_mm);

// I_x(a, b), the regularized incomplete beta function.
double regularized_incomplete_beta(double a, double b, double x);

// P(F > f) for an F distribution with (df1, df2) degrees of freedom.
double f_distribution_sf(double f, int df1, int df2);

// P(Q <= q) for the studentized range of `groups` means with `df` error
// degrees of freedom.
double studentized_range_cdf(double q, int groups, int df);

// Trial CSV reader: one row per trial, three columns (x, y, z) per tracked
// body, optional header, '#' comments allowed.
std::vector<std::vector<Eigen::Vector3d>> read_trials(const std::string& path);

}  // namespace tailsim

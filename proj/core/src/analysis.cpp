#include "tailsim/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace tailsim {

namespace {

constexpr std::array<double, 16> kGaussNodes = {
    -0.98940093499164994, -0.9445750230732326,  -0.86563120238783176,
    -0.755404408355003,   -0.61787624440264377, -0.45801677765722737,
    -0.28160355077925892, -0.095012509837637454, 0.095012509837637454,
    0.28160355077925892,  0.45801677765722737,   0.61787624440264377,
    0.755404408355003,    0.86563120238783176,   0.9445750230732326,
    0.98940093499164994};

constexpr std::array<double, 16> kGaussWeights = {
    0.027152459411754037, 0.062253523938647706, 0.095158511682492591,
    0.12462897125553403,  0.14959598881657676,  0.16915651939500262,
    0.18260341504492361,  0.18945061045506859,  0.18945061045506859,
    0.18260341504492361,  0.16915651939500262,  0.14959598881657676,
    0.12462897125553403,  0.095158511682492591, 0.062253523938647706,
    0.027152459411754037};

template <typename F>
double integrate_panels(const F& f, double lo, double hi, int panels) {
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    double acc = 0.0;
    for (int g = 0; g < 16; ++g) {
      acc += kGaussWeights[g] * f(mid + 0.5 * width * kGaussNodes[g]);
    }
    total += 0.5 * width * acc;
  }
  return total;
}

double normal_pdf(double u) {
  return std::exp(-0.5 * u * u) * 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
}

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

// P(range of k standard normals <= w), integrated over unit-width panels.
double range_prob(double w, int k) {
  if (w <= 0.0) return 0.0;
  const double lo = -8.0;
  const double hi = w + 8.0;
  const int panels = static_cast<int>(std::ceil(hi - lo));
  auto integrand = [&](double u) {
    return normal_pdf(u) * std::pow(normal_cdf(u) - normal_cdf(u - w), k - 1);
  };
  return std::min(1.0, k * integrate_panels(integrand, lo, hi, panels));
}

// Continued fraction for the incomplete beta function, modified Lentz method.
double beta_cf(double a, double b, double x) {
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const double m2 = 2.0 * m;
    double coeff = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + coeff * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + coeff / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + coeff * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + coeff / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw ConvergenceError("regularized_incomplete_beta: continued fraction did not converge");
}

struct GroupStats {
  std::vector<double> means;
  std::vector<int> sizes;
  double ss_between = 0.0;
  double ss_within = 0.0;
  int n_total = 0;
};

GroupStats summarize_groups(const std::vector<std::vector<double>>& groups,
                            const char* caller) {
  if (groups.size() < 2) {
    throw StatsError(std::string(caller) + " needs at least two groups");
  }
  GroupStats stats;
  double grand_sum = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) {
      std::ostringstream msg;
      msg << caller << ": group " << g << " is empty";
      throw StatsError(msg.str());
    }
    double sum = 0.0;
    for (double x : groups[g]) {
      if (!std::isfinite(x)) {
        throw DomainError(std::string(caller) + ": samples must be finite");
      }
      sum += x;
    }
    stats.sizes.push_back(static_cast<int>(groups[g].size()));
    stats.means.push_back(sum / groups[g].size());
    stats.n_total += stats.sizes.back();
    grand_sum += sum;
  }
  const int k = static_cast<int>(groups.size());
  if (stats.n_total - k < 1) {
    throw StatsError(std::string(caller) +
                     " needs replicate samples beyond one per group");
  }
  const double grand_mean = grand_sum / stats.n_total;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double dm = stats.means[g] - grand_mean;
    stats.ss_between += stats.sizes[g] * dm * dm;
    for (double x : groups[g]) {
      const double dx = x - stats.means[g];
      stats.ss_within += dx * dx;
    }
  }
  return stats;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("regularized_incomplete_beta: a and b must be > 0");
  }
  if (!(x >= 0.0) || !(x <= 1.0)) {
    throw DomainError("regularized_incomplete_beta: x must lie in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_prefactor = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                              a * std::log(x) + b * std::log1p(-x);
  const double prefactor = std::exp(ln_prefactor);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return prefactor * beta_cf(a, b, x) / a;
  }
  return 1.0 - prefactor * beta_cf(b, a, 1.0 - x) / b;
}

double f_distribution_sf(double f, int df1, int df2) {
  if (df1 < 1 || df2 < 1) {
    throw DomainError("f_distribution_sf: degrees of freedom must be >= 1");
  }
  if (std::isnan(f)) throw DomainError("f_distribution_sf: f is NaN");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double x = df2 / (df2 + df1 * f);
  return regularized_incomplete_beta(0.5 * df2, 0.5 * df1, x);
}

double studentized_range_cdf(double q, int groups, int df) {
  if (groups < 2) throw DomainError("studentized_range_cdf: needs at least two groups");
  if (df < 1) throw DomainError("studentized_range_cdf: df must be >= 1");
  if (std::isnan(q)) throw DomainError("studentized_range_cdf: q is NaN");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (df > 100000) return range_prob(q, groups);

  const double nu = df;
  const double ln_coeff =
      0.5 * nu * std::log(0.5 * nu) - std::lgamma(0.5 * nu) + std::numbers::ln2;
  const double spread = 14.0 / std::sqrt(2.0 * nu);
  const double lo = std::max(0.0, 1.0 - spread);
  const double hi = 1.0 + spread + 4.0 / nu;
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double ln_density = ln_coeff + (nu - 1.0) * std::log(s) - 0.5 * nu * s * s;
    if (ln_density < -745.0) return 0.0;
    return std::exp(ln_density) * range_prob(q * s, groups);
  };
  return std::clamp(integrate_panels(integrand, lo, hi, 120), 0.0, 1.0);
}

PlanarPose collapse_to_plane(const std::vector<Eigen::Vector3d>& positions,
                             const Eigen::Vector3d& origin, const Eigen::Vector3d& axis) {
  if (positions.empty()) {
    throw DomainError("collapse_to_plane needs at least one position");
  }
  const double axis_norm = axis.norm();
  if (!(axis_norm > 0.0)) {
    throw DomainError("collapse_to_plane: axis must be a nonzero vector");
  }
  const Eigen::Vector3d unit = axis / axis_norm;
  PlanarPose pose;
  pose.bones.reserve(positions.size());
  for (const Eigen::Vector3d& p : positions) {
    const Eigen::Vector3d rel = p - origin;
    const double z = rel.dot(unit);
    const double rho = (rel - z * unit).norm();
    pose.bones.push_back({rho, z});
  }
  return pose;
}

TipMetrics tip_metrics(const PlanarPose& pose) {
  if (pose.bones.empty()) throw DomainError("tip_metrics: pose has no bodies");
  return {pose.bones.back().z, pose.bones.back().rho};
}

std::vector<double> pairwise_std(const std::vector<std::vector<Eigen::Vector3d>>& trials) {
  if (trials.size() < 2) throw StatsError("pairwise_std needs at least two trials");
  const std::size_t bodies = trials.front().size();
  if (bodies == 0) throw DomainError("pairwise_std: trials have no bodies");
  for (const auto& trial : trials) {
    if (trial.size() != bodies) {
      throw DomainError("pairwise_std: trials track different body counts");
    }
  }
  const double n = static_cast<double>(trials.size());
  std::vector<double> spread(bodies, 0.0);
  for (std::size_t b = 0; b < bodies; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      for (std::size_t j = i + 1; j < trials.size(); ++j) {
        acc += 2.0 * (trials[i][b] - trials[j][b]).squaredNorm();
      }
    }
    spread[b] = std::sqrt(acc / (n * (n - 1.0)));
  }
  return spread;
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  const GroupStats stats = summarize_groups(groups, "one_way_anova");
  const int k = static_cast<int>(groups.size());
  AnovaResult result;
  result.df_between = k - 1;
  result.df_within = stats.n_total - k;
  result.ms_between = stats.ss_between / result.df_between;
  result.ms_within = stats.ss_within / result.df_within;
  if (stats.ss_within == 0.0) {
    if (stats.ss_between == 0.0) {
      result.f_statistic = 0.0;
      result.p_value = 1.0;
    } else {
      result.f_statistic = std::numeric_limits<double>::infinity();
      result.p_value = 0.0;
    }
    return result;
  }
  result.f_statistic = result.ms_between / result.ms_within;
  result.p_value = f_distribution_sf(result.f_statistic, result.df_between, result.df_within);
  return result;
}

Eigen::MatrixXd tukey_hsd(const std::vector<std::vector<double>>& groups) {
  const GroupStats stats = summarize_groups(groups, "tukey_hsd");
  const int k = static_cast<int>(groups.size());
  const int df = stats.n_total - k;
  const double ms_within = stats.ss_within / df;

  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      double pij;
      if (ms_within == 0.0) {
        pij = stats.means[i] == stats.means[j] ? 1.0 : 0.0;
      } else {
        const double scale = std::sqrt(
            0.5 * ms_within * (1.0 / stats.sizes[i] + 1.0 / stats.sizes[j]));
        const double q = std::abs(stats.means[i] - stats.means[j]) / scale;
        pij = std::clamp(1.0 - studentized_range_cdf(q, k, df), 0.0, 1.0);
      }
      p(i, j) = pij;
      p(j, i) = pij;
    }
  }
  return p;
}

double normalized_rms_error(const std::vector<PlanarPose>& predicted,
                            const std::vector<PlanarPose>& reference,
                            double total_length_mm) {
  if (!(total_length_mm > 0.0)) {
    throw DomainError("normalized_rms_error: total length must be > 0");
  }
  if (predicted.empty() || predicted.size() != reference.size()) {
    throw DomainError("normalized_rms_error: pose sets must match and be non-empty");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& pred = predicted[i].bones;
    const auto& ref = reference[i].bones;
    if (pred.empty() || pred.size() != ref.size()) {
      throw DomainError("normalized_rms_error: poses track different body counts");
    }
    for (std::size_t b = 0; b < pred.size(); ++b) {
      const double d_rho = pred[b].rho - ref[b].rho;
      const double d_z = pred[b].z - ref[b].z;
      acc += d_rho * d_rho + d_z * d_z;
      ++count;
    }
  }
  return std::sqrt(acc / count) / total_length_mm * 100.0;
}

double normalized_rms_error(const PlanarPose& predicted, const PlanarPose& reference,
                            double total_length_mm) {
  return normalized_rms_error(std::vector<PlanarPose>{predicted},
                              std::vector<PlanarPose>{reference}, total_length_mm);
}

std::vector<std::vector<Eigen::Vector3d>> read_trials(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("could not open trials file: " + path);
  std::vector<std::vector<Eigen::Vector3d>> trials;
  std::string line;
  int line_no = 0;
  std::size_t expected_fields = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream row(cleaned);
    std::vector<double> fields;
    double value = 0.0;
    while (row >> value) fields.push_back(value);
    if (fields.empty()) {
      std::istringstream probe(cleaned);
      std::string token;
      const bool has_content = static_cast<bool>(probe >> token);
      if (!has_content || token[0] == '#') continue;
      if (line_no == 1) continue;  // header row
      std::ostringstream msg;
      msg << "trials file " << path << ": line " << line_no << " is not numeric";
      throw IoError(msg.str());
    }
    if (!row.eof()) {
      std::ostringstream msg;
      msg << "trials file " << path << ": line " << line_no << " mixes text and numbers";
      throw IoError(msg.str());
    }
    if (fields.size() % 3 != 0 ||
        (expected_fields != 0 && fields.size() != expected_fields)) {
      std::ostringstream msg;
      msg << "trials file " << path << ": line " << line_no << " has " << fields.size()
          << " fields, expected " << (expected_fields != 0 ? expected_fields : 3)
          << " (three per tracked body)";
      throw IoError(msg.str());
    }
    expected_fields = fields.size();
    std::vector<Eigen::Vector3d> trial;
    for (std::size_t i = 0; i < fields.size(); i += 3) {
      trial.emplace_back(fields[i], fields[i + 1], fields[i + 2]);
    }
    trials.push_back(std::move(trial));
  }
  return trials;
}

}  // namespace tailsim

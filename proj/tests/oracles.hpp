// Test-only reference implementations. Each one evaluates a definition by the
// most direct route available (plain loops, dense solves) so the library's
// accumulation shortcuts can be checked against an independent path.
#ifndef VARFORM_TESTS_ORACLES_HPP_
#define VARFORM_TESTS_ORACLES_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "varform/core.hpp"
#include "varform/process.hpp"
#include "varform/smoothing.hpp"
#include "varform/transform.hpp"

namespace oracles {

// Direct convolution of the difference coefficients with the responses.
inline std::vector<double> pseudo_residuals_direct(
    const std::vector<double>& y, const std::vector<double>& d) {
  const int n = static_cast<int>(y.size());
  const int r = static_cast<int>(d.size()) - 1;
  std::vector<double> out;
  for (int j = r; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i <= r; ++i) acc += d[i] * y[j - i];
    out.push_back(acc);
  }
  return out;
}

// Nadaraya-Watson weight by direct evaluation of the defining ratio.
inline double nw_weight_direct(const std::vector<double>& t, int i, int j,
                               double h) {
  auto kernel = [](double u) {
    return std::fabs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  };
  double denom = 0.0;
  for (std::size_t l = 0; l < t.size(); ++l) {
    denom += kernel((t[l] - t[i]) / h);
  }
  return kernel((t[j] - t[i]) / h) / denom;
}

// Tail Gram matrix H_n(t_j) by a fresh direct sum.
inline Eigen::MatrixXd hn_direct(const varform::DesignGrid& grid,
                                 const Eigen::MatrixXd& g,
                                 const std::vector<double>& beta, int j) {
  const int n = grid.n();
  const int d = static_cast<int>(g.cols());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    if (grid.points[i] >= grid.points[j]) {
      h += g.row(i).transpose() * g.row(i) / beta[i];
    }
  }
  return h / n;
}

// Martingale transform by the O(n^2) double loop over the definition, with
// extended-precision accumulation and dense solves.
inline std::vector<double> transform_direct(const varform::DesignGrid& grid,
                                            const Eigen::MatrixXd& g,
                                            const std::vector<double>& beta,
                                            const varform::StepProcess& eta,
                                            double t0) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const int n = grid.n();
  const int d = static_cast<int>(g.cols());
  std::vector<double> out;
  for (int k = 0; k < n && grid.points[k] <= t0; ++k) {
    long double correction = 0.0L;
    for (int j = 0; j <= k; ++j) {
      Vec inner = Vec::Zero(d);
      Mat h = Mat::Zero(d, d);
      for (int i = 0; i < n; ++i) {
        if (grid.points[i] >= grid.points[j]) {
          Vec gi(d);
          for (int a = 0; a < d; ++a) gi[a] = g(i, a);
          const long double w =
              1.0L / std::sqrt(static_cast<long double>(beta[i]));
          inner += w * gi * static_cast<long double>(eta.jumps[i]);
          h += gi * gi.transpose() /
               static_cast<long double>(beta[i]) /
               static_cast<long double>(n);
        }
      }
      Vec gj(d);
      for (int a = 0; a < d; ++a) gj[a] = g(j, a);
      const long double wj =
          1.0L / std::sqrt(static_cast<long double>(beta[j]));
      const Vec solved = h.fullPivLu().solve(inner);
      correction += wj * gj.dot(solved) / static_cast<long double>(n);
    }
    out.push_back(static_cast<double>(
        static_cast<long double>(eta.values[k]) - correction));
  }
  return out;
}

// Least-squares fit of an offset-free linear family by explicit normal
// equations on dense matrices.
inline Eigen::VectorXd theta_direct(const varform::DesignGrid& grid,
                                    const Eigen::MatrixXd& g,
                                    const std::vector<double>& residuals,
                                    int r) {
  const int n = grid.n();
  const int d = static_cast<int>(g.cols());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < n; ++k) a += g.row(k).transpose() * g.row(k);
  a /= n;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  for (int k = r; k < n; ++k) {
    c += residuals[k - r] * residuals[k - r] * g.row(k).transpose();
  }
  c /= (n - r);
  return a.fullPivLu().solve(c);
}

inline double sup_distance(const std::vector<double>& sorted_sample,
                           const varform::LawSample& law) {
  // One-sample Kolmogorov distance against the law's empirical CDF.
  double d = 0.0;
  const double n = static_cast<double>(sorted_sample.size());
  for (std::size_t i = 0; i < sorted_sample.size(); ++i) {
    const double f = 1.0 - law.p_value(sorted_sample[i]);
    d = std::max(d, std::fabs((i + 1) / n - f));
    d = std::max(d, std::fabs(i / n - f));
  }
  return d;
}

inline double two_sample_sup_distance(std::vector<double> a,
                                      std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() || ib < b.size()) {
    const double x = (ib == b.size() || (ia < a.size() && a[ia] <= b[ib]))
                         ? a[ia]
                         : b[ib];
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / a.size() -
                              static_cast<double>(ib) / b.size()));
  }
  return d;
}

}  // namespace oracles

#endif  // VARFORM_TESTS_ORACLES_HPP_

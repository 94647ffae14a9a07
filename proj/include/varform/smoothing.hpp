#ifndef VARFORM_SMOOTHING_HPP_
#define VARFORM_SMOOTHING_HPP_

#include <string>
#include <vector>

#include "varform/core.hpp"

namespace varform {

// Builtin kernels on [-1, 1]; all satisfy K <= 1, K symmetric, and
// K >= kappa > 0 on |u| <= 1/2.
enum class KernelShape { kEpanechnikov, kUniform, kBiweight };

double kernel_value(KernelShape shape, double u);
KernelShape kernel_from_name(const std::string& name);
std::string kernel_name(KernelShape shape);

struct KernelSpec {
  KernelShape shape = KernelShape::kEpanechnikov;
  double bandwidth = 0.0;
};

enum class SmoothMethod { kNadarayaWatson, kLocalLinear };

SmoothMethod method_from_name(const std::string& name);
std::string method_name(SmoothMethod method);

// Row-banded weight matrix: row i holds weights for columns
// [first[i], first[i] + row(i).size()). Rows sum to 1; weights vanish outside
// the kernel window |t_j - t_i| <= h.
struct WeightMatrix {
  std::vector<int> first;
  std::vector<std::vector<double>> rows;
  SmoothMethod method = SmoothMethod::kNadarayaWatson;
  double bandwidth = 0.0;

  int n() const { return static_cast<int>(rows.size()); }
  double diagonal(int i) const;
  // Fitted values sum_j w_ij y_j.
  std::vector<double> apply(const std::vector<double>& y) const;
};

WeightMatrix kernel_weights(const DesignGrid& grid, const KernelSpec& kernel,
                            SmoothMethod method);

// Least-squares leave-one-out cross validation over a 40-point log-spaced grid
// on [1/n, 0.5]. Within one standard error of the minimum the largest
// bandwidth wins; exact ties resolve to the smallest bandwidth.
double cv_bandwidth(const Sample& sample, KernelShape shape,
                    SmoothMethod method);

std::vector<double> m_hat(const Sample& sample, const WeightMatrix& weights);

struct BetaEstimate {
  std::vector<double> values;
  std::vector<bool> floor_applied;
  double floor_value = 0.0;

  int floor_count() const;
};

// Standardizing-function estimate: outer smoothing of residual fourth moments
// plus the lagged cross term, floored away from zero.
BetaEstimate beta_hat(const Sample& sample, const WeightMatrix& weights,
                      const std::vector<double>& fitted,
                      const DifferenceSequence& seq);

}  // namespace varform

#endif  // VARFORM_SMOOTHING_HPP_

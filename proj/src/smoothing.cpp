#include "varform/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "varform/errors.hpp"

namespace varform {
namespace {

constexpr int kCvGridSize = 40;

struct Window {
  int lo = 0;  // first index with t_j >= t_i - h
  int hi = 0;  // one past last index with t_j <= t_i + h
};

Window kernel_window(const std::vector<double>& t, int i, double h) {
  Window w;
  w.lo = static_cast<int>(std::lower_bound(t.begin(), t.end(), t[i] - h) -
                          t.begin());
  w.hi = static_cast<int>(std::upper_bound(t.begin(), t.end(), t[i] + h) -
                          t.begin());
  return w;
}

}  // namespace

double kernel_value(KernelShape shape, double u) {
  const double a = std::fabs(u);
  if (a > 1.0) return 0.0;
  switch (shape) {
    case KernelShape::kEpanechnikov:
      return 0.75 * (1.0 - u * u);
    case KernelShape::kUniform:
      return 1.0;
    case KernelShape::kBiweight: {
      const double w = 1.0 - u * u;
      return 0.9375 * w * w;
    }
  }
  return 0.0;
}

KernelShape kernel_from_name(const std::string& name) {
  if (name == "epanechnikov") return KernelShape::kEpanechnikov;
  if (name == "uniform") return KernelShape::kUniform;
  if (name == "biweight") return KernelShape::kBiweight;
  throw ContractError("unknown kernel '" + name +
                      "' (expected epanechnikov|uniform|biweight)");
}

std::string kernel_name(KernelShape shape) {
  switch (shape) {
    case KernelShape::kEpanechnikov:
      return "epanechnikov";
    case KernelShape::kUniform:
      return "uniform";
    case KernelShape::kBiweight:
      return "biweight";
  }
  return "?";
}

SmoothMethod method_from_name(const std::string& name) {
  if (name == "nw" || name == "nadaraya-watson") {
    return SmoothMethod::kNadarayaWatson;
  }
  if (name == "local-linear" || name == "ll") return SmoothMethod::kLocalLinear;
  throw ContractError("unknown method '" + name +
                      "' (expected nw|local-linear)");
}

std::string method_name(SmoothMethod method) {
  return method == SmoothMethod::kNadarayaWatson ? "nw" : "local-linear";
}

double WeightMatrix::diagonal(int i) const {
  const int offset = i - first[i];
  if (offset < 0 || offset >= static_cast<int>(rows[i].size())) return 0.0;
  return rows[i][offset];
}

std::vector<double> WeightMatrix::apply(const std::vector<double>& y) const {
  std::vector<double> out(rows.size());
  for (int i = 0; i < n(); ++i) {
    double acc = 0.0;
    const auto& row = rows[i];
    for (int k = 0; k < static_cast<int>(row.size()); ++k) {
      acc += row[k] * y[first[i] + k];
    }
    out[i] = acc;
  }
  return out;
}

WeightMatrix kernel_weights(const DesignGrid& grid, const KernelSpec& kernel,
                            SmoothMethod method) {
  if (kernel.bandwidth <= 0.0) {
    throw ContractError("kernel_weights: bandwidth must be positive");
  }
  const auto& t = grid.points;
  const int n = grid.n();
  const double h = kernel.bandwidth;
  WeightMatrix wm;
  wm.method = method;
  wm.bandwidth = h;
  wm.first.resize(n);
  wm.rows.resize(n);
  for (int i = 0; i < n; ++i) {
    const Window w = kernel_window(t, i, h);
    const int len = w.hi - w.lo;
    std::vector<double> row(len);
    if (method == SmoothMethod::kNadarayaWatson) {
      double total = 0.0;
      for (int k = 0; k < len; ++k) {
        row[k] = kernel_value(kernel.shape, (t[w.lo + k] - t[i]) / h);
        total += row[k];
      }
      if (total <= 0.0) {
        std::ostringstream msg;
        msg << "kernel window at design point " << i + 1
            << " carries no weight; increase the bandwidth";
        throw BandwidthTooSmallError(msg.str());
      }
      for (double& v : row) v /= total;
    } else {
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      int support = 0;
      for (int k = 0; k < len; ++k) {
        const double d = t[w.lo + k] - t[i];
        const double kv = kernel_value(kernel.shape, d / h);
        if (kv > 0.0) ++support;
        s0 += kv;
        s1 += kv * d;
        s2 += kv * d * d;
      }
      const double det = s0 * s2 - s1 * s1;
      if (support < 2 || det <= 0.0 ||
          det <= 1e-14 * (s0 * s2 + s1 * s1 + 1e-300)) {
        std::ostringstream msg;
        msg << "local-linear fit is singular at design point " << i + 1
            << " (window holds " << support
            << " points); increase the bandwidth";
        throw BandwidthTooSmallError(msg.str());
      }
      for (int k = 0; k < len; ++k) {
        const double d = t[w.lo + k] - t[i];
        const double kv = kernel_value(kernel.shape, d / h);
        row[k] = kv * (s2 - d * s1) / det;
      }
    }
    wm.first[i] = w.lo;
    wm.rows[i] = std::move(row);
  }
  return wm;
}

namespace {

struct CvPoint {
  double h = 0.0;
  double error = std::numeric_limits<double>::infinity();
  double stderr_sum = std::numeric_limits<double>::infinity();
  bool valid = false;
};

CvPoint cv_at(const Sample& sample, KernelShape shape, SmoothMethod method,
              double h) {
  CvPoint p;
  p.h = h;
  WeightMatrix wm;
  try {
    wm = kernel_weights(sample.grid, KernelSpec{shape, h}, method);
  } catch (const BandwidthTooSmallError&) {
    return p;
  }
  const int n = sample.n();
  const auto fitted = wm.apply(sample.responses);
  double total = 0.0;
  double total_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double denom = 1.0 - wm.diagonal(i);
    if (!(std::fabs(denom) > 1e-12)) return p;
    const double e = (sample.responses[i] - fitted[i]) / denom;
    const double sq = e * e;
    if (!std::isfinite(sq)) return p;
    total += sq;
    total_sq += sq * sq;
  }
  p.error = total;
  // Standard error of the summed leave-one-out criterion.
  const double mean = total / n;
  const double var = std::max(0.0, total_sq / n - mean * mean);
  p.stderr_sum = std::sqrt(var * n);
  p.valid = true;
  return p;
}

}  // namespace

double cv_bandwidth(const Sample& sample, KernelShape shape,
                    SmoothMethod method) {
  validate_sample(sample);
  const int n = sample.n();
  if (n < 10) throw ContractError("cv_bandwidth: need n >= 10");
  const double h_min = 1.0 / n;
  const double h_max = 0.5;
  std::vector<CvPoint> curve;
  curve.reserve(kCvGridSize);
  for (int k = 0; k < kCvGridSize; ++k) {
    const double frac = static_cast<double>(k) / (kCvGridSize - 1);
    const double h =
        std::exp(std::log(h_min) + frac * (std::log(h_max) - std::log(h_min)));
    curve.push_back(cv_at(sample, shape, method, h));
  }
  int best = -1;
  for (int k = 0; k < kCvGridSize; ++k) {
    if (curve[k].valid && (best < 0 || curve[k].error < curve[best].error)) {
      best = k;
    }
  }
  if (best < 0) {
    throw NoValidBandwidthError(
        "cross validation: no candidate bandwidth produced a usable fit");
  }
  // Exactly flat criterion (constant responses): smallest valid bandwidth.
  double y_scale = 0.0;
  for (double y : sample.responses) y_scale = std::max(y_scale, std::fabs(y));
  const double flat_tol = n * 1e-20 * (1.0 + y_scale * y_scale);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : curve) {
    if (!p.valid) continue;
    lo = std::min(lo, p.error);
    hi = std::max(hi, p.error);
  }
  if (hi - lo <= flat_tol) {
    for (const auto& p : curve) {
      if (p.valid) return p.h;
    }
  }
  // One-standard-error rule: the largest bandwidth whose criterion is within
  // one SE of the minimum. Guards against noise-driven undersmoothing when the
  // criterion is flat in h.
  const double threshold = curve[best].error + curve[best].stderr_sum;
  for (int k = kCvGridSize - 1; k > best; --k) {
    if (curve[k].valid && curve[k].error <= threshold) return curve[k].h;
  }
  return curve[best].h;
}

std::vector<double> m_hat(const Sample& sample, const WeightMatrix& weights) {
  if (weights.n() != sample.n()) {
    throw ContractError("m_hat: weight matrix does not match the sample");
  }
  return weights.apply(sample.responses);
}

int BetaEstimate::floor_count() const {
  int count = 0;
  for (bool f : floor_applied) count += f ? 1 : 0;
  return count;
}

BetaEstimate beta_hat(const Sample& sample, const WeightMatrix& weights,
                      const std::vector<double>& fitted,
                      const DifferenceSequence& seq) {
  const int n = sample.n();
  const int r = seq.order();
  if (n <= r + 1) {
    throw InsufficientDataError("beta_hat: need n > r + 1");
  }
  if (weights.n() != n || static_cast<int>(fitted.size()) != n) {
    throw ContractError("beta_hat: inputs built on different grids");
  }
  std::vector<double> e(n), e2(n), e4(n);
  for (int i = 0; i < n; ++i) {
    e[i] = sample.responses[i] - fitted[i];
    e2[i] = e[i] * e[i];
    e4[i] = e2[i] * e2[i];
  }
  // Lagged products e_j^2 e_{j+r+1}^2 for j = 1..n-r-1 (1-based).
  const int lag_count = n - r - 1;
  std::vector<double> lagged(lag_count);
  for (int j = 0; j < lag_count; ++j) lagged[j] = e2[j] * e2[j + r + 1];

  const double correction = 4.0 * seq.delta - 1.0;
  std::vector<double> first_term(n), raw(n);
  for (int i = 0; i < n; ++i) {
    const auto& row = weights.rows[i];
    const int lo = weights.first[i];
    double sum4 = 0.0, sum_lag = 0.0;
    for (int k = 0; k < static_cast<int>(row.size()); ++k) {
      const int j = lo + k;
      sum4 += row[k] * e4[j];
      if (j < lag_count) sum_lag += row[k] * lagged[j];
    }
    first_term[i] = sum4;
    raw[i] = sum4 + correction * sum_lag;
  }

  std::vector<double> positive;
  positive.reserve(n);
  for (double v : first_term) {
    if (v > 0.0) positive.push_back(v);
  }
  if (positive.empty()) {
    throw DegenerateVarianceError(
        "beta_hat: all smoothed fourth-moment values are zero");
  }
  const auto mid = positive.begin() + positive.size() / 2;
  std::nth_element(positive.begin(), mid, positive.end());
  double median = *mid;
  if (positive.size() % 2 == 0) {
    const auto lower = std::max_element(positive.begin(), mid);
    median = 0.5 * (*lower + median);
  }
  const double floor = 1e-3 * median;

  BetaEstimate est;
  est.floor_value = floor;
  est.values.resize(n);
  est.floor_applied.resize(n);
  for (int i = 0; i < n; ++i) {
    if (raw[i] < floor) {
      est.values[i] = floor;
      est.floor_applied[i] = true;
    } else {
      est.values[i] = raw[i];
      est.floor_applied[i] = false;
    }
  }
  return est;
}

}  // namespace varform

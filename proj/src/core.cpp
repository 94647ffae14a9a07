#include "varform/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "varform/errors.hpp"

namespace varform {
namespace {

constexpr double kQuadTol = 1e-12;
constexpr double kRootTol = 1e-10;
constexpr double kSeqTol = 1e-12;

double eval_checked(const Density& f, double x) {
  const double v = f(x);
  if (!(v >= 0.0)) {
    std::ostringstream msg;
    msg << "design density is negative at x = " << x << " (f = " << v << ")";
    throw InvalidDensityError(msg.str());
  }
  return v;
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const Density& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = eval_checked(f, lm);
  const double frm = eval_checked(f, rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double density_integral(const Density& density, double t) {
  if (density.is_uniform()) return t;
  if (t <= 0.0) return 0.0;
  const double fa = eval_checked(density, 0.0);
  const double fm = eval_checked(density, 0.5 * t);
  const double fb = eval_checked(density, t);
  const double whole = simpson(0.0, t, fa, fm, fb);
  return adaptive_simpson(density, 0.0, t, fa, fm, fb, whole, kQuadTol, 48);
}

DesignGrid build_design(const Density& density, int n) {
  if (n < 1) throw ContractError("build_design: n must be >= 1");
  DesignGrid grid;
  grid.density = density;
  grid.points.resize(n);
  if (density.is_uniform()) {
    for (int i = 1; i <= n; ++i) {
      grid.points[i - 1] = static_cast<double>(i) / (n + 1);
    }
    return grid;
  }
  const double total = density_integral(density, 1.0);
  if (std::fabs(total - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "design density integrates to " << total << ", expected 1";
    throw InvalidDensityError(msg.str());
  }
  double lo_start = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double target = static_cast<double>(i) / (n + 1);
    double lo = lo_start, hi = 1.0;
    // Bisection on the monotone CDF.
    for (int iter = 0; iter < 64 && hi - lo > 1e-13; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (density_integral(density, mid) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double t = 0.5 * (lo + hi);
    // Newton polish sharpens the root when f(t) is bounded away from zero.
    for (int iter = 0; iter < 3; ++iter) {
      const double resid = density_integral(density, t) - target;
      if (std::fabs(resid) <= 0.1 * kRootTol) break;
      const double ft = eval_checked(density, t);
      if (ft <= 0.0) break;
      t = std::clamp(t - resid / ft, lo_start, 1.0);
    }
    if (std::fabs(density_integral(density, t) - target) > kRootTol) {
      std::ostringstream msg;
      msg << "design quantile " << i << "/" << (n + 1)
          << " did not converge to tolerance";
      throw InvalidDensityError(msg.str());
    }
    grid.points[i - 1] = t;
    lo_start = t;
  }
  return grid;
}

double empirical_cdf(const DesignGrid& grid, double t) {
  const auto& pts = grid.points;
  const auto it = std::upper_bound(pts.begin(), pts.end(), t);
  return static_cast<double>(it - pts.begin()) / static_cast<double>(pts.size());
}

DifferenceSequence difference_sequence_order1() {
  const double d0 = 1.0 / std::sqrt(2.0);
  return difference_sequence({d0, -d0});
}

DifferenceSequence difference_sequence(const std::vector<double>& coefficients) {
  if (coefficients.size() < 2) {
    throw InvalidSequenceError(
        "difference sequence needs order r >= 1 (at least two coefficients)");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double d : coefficients) {
    sum += d;
    sum_sq += d * d;
  }
  if (std::fabs(sum) > kSeqTol) {
    std::ostringstream msg;
    msg << "difference sequence violates sum(d_i) = 0 (got " << sum << ")";
    throw InvalidSequenceError(msg.str());
  }
  if (std::fabs(sum_sq - 1.0) > kSeqTol) {
    std::ostringstream msg;
    msg << "difference sequence violates sum(d_i^2) = 1 (got " << sum_sq << ")";
    throw InvalidSequenceError(msg.str());
  }
  DifferenceSequence seq;
  seq.coefficients = coefficients;
  const int r = seq.order();
  double delta = 0.0;
  for (int m = 1; m <= r; ++m) {
    double inner = 0.0;
    for (int j = 0; j + m <= r; ++j) {
      inner += coefficients[j] * coefficients[j + m];
    }
    delta += inner * inner;
  }
  seq.delta = delta;
  return seq;
}

PseudoResiduals pseudo_residuals(const Sample& sample,
                                 const DifferenceSequence& seq) {
  const int n = sample.n();
  const int r = seq.order();
  if (n <= r) {
    std::ostringstream msg;
    msg << "pseudo_residuals: need n > r, got n = " << n << ", r = " << r;
    throw InsufficientDataError(msg.str());
  }
  PseudoResiduals res;
  res.order = r;
  res.values.resize(n - r);
  const auto& y = sample.responses;
  for (int j = r; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i <= r; ++i) acc += seq.coefficients[i] * y[j - i];
    res.values[j - r] = acc;
  }
  return res;
}

void validate_sample(const Sample& sample) {
  const int n = sample.grid.n();
  if (static_cast<int>(sample.responses.size()) != n) {
    throw ContractError("sample: responses and grid have different lengths");
  }
  double prev = -1.0;
  for (int i = 0; i < n; ++i) {
    const double t = sample.grid.points[i];
    if (!(t >= 0.0 && t <= 1.0) || t <= prev) {
      std::ostringstream msg;
      msg << "sample: design points must be strictly increasing in [0,1]; "
             "violation at index "
          << i;
      throw ContractError(msg.str());
    }
    prev = t;
    if (!std::isfinite(sample.responses[i])) {
      std::ostringstream msg;
      msg << "sample: non-finite response at index " << i;
      throw ContractError(msg.str());
    }
  }
}

}  // namespace varform

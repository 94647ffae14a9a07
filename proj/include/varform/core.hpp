#ifndef VARFORM_CORE_HPP_
#define VARFORM_CORE_HPP_

#include <functional>
#include <string>
#include <vector>

namespace varform {

// Design density f on [0, 1]. The uniform density has a closed-form quantile
// function; any other positive density is handled by quadrature + bisection.
class Density {
 public:
  static Density uniform() { return Density(); }
  explicit Density(std::function<double(double)> f, std::string name = "custom")
      : f_(std::move(f)), name_(std::move(name)) {}

  bool is_uniform() const { return !f_; }
  double operator()(double x) const { return f_ ? f_(x) : 1.0; }
  const std::string& name() const { return name_; }

 private:
  Density() : name_("uniform") {}
  std::function<double(double)> f_;  // empty for uniform
  std::string name_;
};

// Ordered fixed-design points t_1 < ... < t_n in [0, 1], placed at the
// (i/(n+1))-quantiles of the design density.
struct DesignGrid {
  std::vector<double> points;
  Density density = Density::uniform();

  int n() const { return static_cast<int>(points.size()); }
};

struct Sample {
  DesignGrid grid;
  std::vector<double> responses;

  int n() const { return grid.n(); }
};

// Difference sequence d_0..d_r with sum 0 and sum of squares 1, plus the
// derived quadratic functional delta_r.
struct DifferenceSequence {
  std::vector<double> coefficients;
  double delta = 0.0;

  int order() const { return static_cast<int>(coefficients.size()) - 1; }
};

// Pseudo residuals R_{r+1}..R_n.
struct PseudoResiduals {
  std::vector<double> values;
  int order = 1;
};

// Integral of f over [0, t] by adaptive Simpson quadrature (tolerance 1e-12).
// Throws InvalidDensityError if f is negative at an evaluation point.
double density_integral(const Density& density, double t);

// Solves the quantile equations of the design construction by bisection with
// a Newton polish; |cdf(t_i) - i/(n+1)| <= 1e-10.
DesignGrid build_design(const Density& density, int n);

// Empirical distribution function of the design points.
double empirical_cdf(const DesignGrid& grid, double t);

// Builtin order-1 sequence (1/sqrt(2), -1/sqrt(2)).
DifferenceSequence difference_sequence_order1();

// Validates explicit coefficients and computes delta_r.
DifferenceSequence difference_sequence(const std::vector<double>& coefficients);

PseudoResiduals pseudo_residuals(const Sample& sample,
                                 const DifferenceSequence& seq);

// Validates that responses are finite and match the grid; throws ContractError.
void validate_sample(const Sample& sample);

}  // namespace varform

#endif  // VARFORM_CORE_HPP_

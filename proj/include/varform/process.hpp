#ifndef VARFORM_PROCESS_HPP_
#define VARFORM_PROCESS_HPP_

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "varform/core.hpp"
#include "varform/smoothing.hpp"

namespace varform {

// Null-hypothesis variance family: a known offset plus the linear span of
// basis functions, or a nonlinear model with parameter gradient.
class VarianceFamily {
 public:
  enum class Kind { kAffine, kNonlinear };

  using ScalarFn = std::function<double(double)>;
  using ModelFn = std::function<double(double, const Eigen::VectorXd&)>;
  using GradientFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

  static VarianceFamily affine(std::vector<ScalarFn> basis,
                               ScalarFn offset = nullptr,
                               std::string description = "affine");
  static VarianceFamily nonlinear(ModelFn model, GradientFn gradient, int dim,
                                  Eigen::VectorXd start,
                                  std::string description = "nonlinear");

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::string& description() const { return description_; }

  double offset(double t) const { return offset_ ? offset_(t) : 0.0; }
  double basis_value(int j, double t) const { return basis_[j](t); }
  double model_value(double t, const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient_value(double t, const Eigen::VectorXd& theta) const;
  const Eigen::VectorXd& start() const { return start_; }

 private:
  VarianceFamily() = default;
  Kind kind_ = Kind::kAffine;
  int dim_ = 0;
  std::string description_;
  ScalarFn offset_;
  std::vector<ScalarFn> basis_;
  ModelFn model_;
  GradientFn gradient_;
  Eigen::VectorXd start_;
};

// Registry of named basis functions covering the simulation-study families:
// const, t, t2, sqrt_t, exp2t, sin2pit.
VarianceFamily::ScalarFn basis_function(const std::string& name);
VarianceFamily make_affine_family(const std::vector<std::string>& basis_names,
                                  const std::string& offset_name = "");

// Fitted Gram system. For affine families theta solves a_hat * theta = c_hat;
// for nonlinear families theta is the least-squares estimate and a_hat is the
// gradient Gram matrix at theta.
struct GramSystem {
  Eigen::MatrixXd a_hat;
  Eigen::VectorXd c_hat;
  Eigen::VectorXd theta_hat;
  double condition = 0.0;
  // g(t_k) for every design point, rows = design points. For affine families
  // the basis functions; for nonlinear families the gradient at theta_hat.
  Eigen::MatrixXd g_on_grid;
};

GramSystem fit_family(const VarianceFamily& family,
                      const PseudoResiduals& residuals, const DesignGrid& grid);

// Cadlag step trajectory over the design points: values[j] holds the value on
// [t_j, t_{j+1}) and jumps[j] the increment at t_j.
struct StepProcess {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> jumps;

  static StepProcess from_jumps(std::vector<double> times,
                                std::vector<double> jumps);
};

struct LambdaParts {
  StepProcess lambda;
  StepProcess c_part;
  StepProcess d_part;
};

// The standardized empirical process Lambda_n = C_n - D_n with weight
// 1/beta_hat, evaluated at every design point.
LambdaParts lambda_process(const Sample& sample,
                           const PseudoResiduals& residuals,
                           const VarianceFamily& family, const GramSystem& gram,
                           const BetaEstimate& beta);

}  // namespace varform

#endif  // VARFORM_PROCESS_HPP_

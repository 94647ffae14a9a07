#include "varform/process.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "varform/errors.hpp"

namespace varform {
namespace {

constexpr double kConditionLimit = 1e10;

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

VarianceFamily VarianceFamily::affine(std::vector<ScalarFn> basis,
                                      ScalarFn offset,
                                      std::string description) {
  if (basis.empty()) {
    throw ContractError("affine family needs at least one basis function");
  }
  VarianceFamily f;
  f.kind_ = Kind::kAffine;
  f.dim_ = static_cast<int>(basis.size());
  f.basis_ = std::move(basis);
  f.offset_ = std::move(offset);
  f.description_ = std::move(description);
  return f;
}

VarianceFamily VarianceFamily::nonlinear(ModelFn model, GradientFn gradient,
                                         int dim, Eigen::VectorXd start,
                                         std::string description) {
  if (dim < 1) throw ContractError("nonlinear family needs dim >= 1");
  if (start.size() != dim) {
    throw ContractError("nonlinear family: start vector has wrong length");
  }
  VarianceFamily f;
  f.kind_ = Kind::kNonlinear;
  f.dim_ = dim;
  f.model_ = std::move(model);
  f.gradient_ = std::move(gradient);
  f.start_ = std::move(start);
  f.description_ = std::move(description);
  return f;
}

double VarianceFamily::model_value(double t, const Eigen::VectorXd& theta) const {
  if (kind_ == Kind::kNonlinear) return model_(t, theta);
  double value = offset(t);
  for (int j = 0; j < dim_; ++j) value += theta[j] * basis_[j](t);
  return value;
}

Eigen::VectorXd VarianceFamily::gradient_value(double t,
                                               const Eigen::VectorXd& theta) const {
  if (kind_ == Kind::kNonlinear) return gradient_(t, theta);
  Eigen::VectorXd g(dim_);
  for (int j = 0; j < dim_; ++j) g[j] = basis_[j](t);
  return g;
}

VarianceFamily::ScalarFn basis_function(const std::string& name) {
  if (name == "const") return [](double) { return 1.0; };
  if (name == "t") return [](double t) { return t; };
  if (name == "t2") return [](double t) { return t * t; };
  if (name == "sqrt_t") return [](double t) { return std::sqrt(t); };
  if (name == "exp2t") return [](double t) { return std::exp(2.0 * t); };
  if (name == "sin2pit") {
    return [](double t) { return std::sin(2.0 * std::numbers::pi * t); };
  }
  throw ContractError("unknown basis function '" + name +
                      "' (expected const|t|t2|sqrt_t|exp2t|sin2pit)");
}

VarianceFamily make_affine_family(const std::vector<std::string>& basis_names,
                                  const std::string& offset_name) {
  std::vector<VarianceFamily::ScalarFn> basis;
  basis.reserve(basis_names.size());
  std::string description;
  for (const auto& name : basis_names) {
    basis.push_back(basis_function(name));
    if (!description.empty()) description += ",";
    description += name;
  }
  VarianceFamily::ScalarFn offset;
  if (!offset_name.empty() && offset_name != "none") {
    offset = basis_function(offset_name);
    description = offset_name + "+span{" + description + "}";
  } else {
    description = "span{" + description + "}";
  }
  return VarianceFamily::affine(std::move(basis), std::move(offset),
                                std::move(description));
}

namespace {

GramSystem fit_affine(const VarianceFamily& family,
                      const PseudoResiduals& residuals,
                      const DesignGrid& grid) {
  const int n = grid.n();
  const int r = residuals.order;
  const int d = family.dim();
  Eigen::MatrixXd g(n, d);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < d; ++j) {
      g(k, j) = family.basis_value(j, grid.points[k]);
    }
  }
  Eigen::MatrixXd a = (g.transpose() * g) / n;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  for (int k = r; k < n; ++k) {
    const double target = residuals.values[k - r] * residuals.values[k - r] -
                          family.offset(grid.points[k]);
    c += target * g.row(k).transpose();
  }
  c /= static_cast<double>(n - r);

  GramSystem system;
  system.a_hat = a;
  system.c_hat = c;
  system.g_on_grid = std::move(g);
  system.condition = condition_number(a);
  if (!(system.condition < kConditionLimit)) {
    std::ostringstream msg;
    msg << "basis Gram matrix is singular or ill-conditioned (condition "
        << system.condition << "); basis functions are collinear on the grid";
    throw CollinearBasisError(msg.str());
  }
  system.theta_hat = a.ldlt().solve(c);
  return system;
}

GramSystem fit_nonlinear(const VarianceFamily& family,
                         const PseudoResiduals& residuals,
                         const DesignGrid& grid) {
  const int n = grid.n();
  const int r = residuals.order;
  const int m = n - r;
  const int d = family.dim();

  auto objective = [&](const Eigen::VectorXd& theta) {
    double q = 0.0;
    for (int k = r; k < n; ++k) {
      const double e = residuals.values[k - r] * residuals.values[k - r] -
                       family.model_value(grid.points[k], theta);
      q += e * e;
    }
    return q / m;
  };

  Eigen::VectorXd theta = family.start();
  double q = objective(theta);
  std::ostringstream trace;
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd jte = Eigen::VectorXd::Zero(d);
    for (int k = r; k < n; ++k) {
      const double t = grid.points[k];
      const Eigen::VectorXd gk = family.gradient_value(t, theta);
      const double e = residuals.values[k - r] * residuals.values[k - r] -
                       family.model_value(t, theta);
      jtj += gk * gk.transpose();
      jte += gk * e;
    }
    const double grad_norm = 2.0 * jte.norm() / m;
    trace << "iter " << iter << ": q = " << q << ", |grad| = " << grad_norm
          << "\n";
    if (grad_norm <= 1e-9) {
      converged = true;
      break;
    }
    const Eigen::VectorXd step = jtj.ldlt().solve(jte);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    bool improved = false;
    for (int half = 0; half < 40; ++half, lambda *= 0.5) {
      const Eigen::VectorXd candidate = theta + lambda * step;
      const double qc = objective(candidate);
      if (qc < q) {
        theta = candidate;
        q = qc;
        improved = true;
        break;
      }
    }
    if (!improved) {
      // Stationary within step-halving resolution.
      converged = grad_norm <= 1e-6;
      break;
    }
  }
  if (!converged) {
    throw FitFailureError("Gauss-Newton did not converge:\n" + trace.str());
  }

  GramSystem system;
  system.theta_hat = theta;
  Eigen::MatrixXd g(n, d);
  for (int k = 0; k < n; ++k) {
    g.row(k) = family.gradient_value(grid.points[k], theta).transpose();
  }
  system.a_hat = (g.transpose() * g) / n;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  for (int k = r; k < n; ++k) {
    c += residuals.values[k - r] * residuals.values[k - r] *
         g.row(k).transpose();
  }
  system.c_hat = c / m;
  system.g_on_grid = std::move(g);
  system.condition = condition_number(system.a_hat);
  if (!(system.condition < kConditionLimit)) {
    std::ostringstream msg;
    msg << "gradient Gram matrix at theta_hat is ill-conditioned (condition "
        << system.condition << ")";
    throw CollinearBasisError(msg.str());
  }
  return system;
}

}  // namespace

GramSystem fit_family(const VarianceFamily& family,
                      const PseudoResiduals& residuals,
                      const DesignGrid& grid) {
  const int n = grid.n();
  if (n <= residuals.order) {
    throw InsufficientDataError("fit_family: need n > r");
  }
  if (static_cast<int>(residuals.values.size()) != n - residuals.order) {
    throw ContractError("fit_family: residuals do not match the grid");
  }
  return family.kind() == VarianceFamily::Kind::kAffine
             ? fit_affine(family, residuals, grid)
             : fit_nonlinear(family, residuals, grid);
}

StepProcess StepProcess::from_jumps(std::vector<double> times,
                                    std::vector<double> jumps) {
  if (times.size() != jumps.size()) {
    throw ContractError("StepProcess: times and jumps differ in length");
  }
  StepProcess p;
  p.times = std::move(times);
  p.jumps = std::move(jumps);
  p.values.resize(p.jumps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.jumps.size(); ++i) {
    acc += p.jumps[i];
    p.values[i] = acc;
  }
  return p;
}

LambdaParts lambda_process(const Sample& sample,
                           const PseudoResiduals& residuals,
                           const VarianceFamily& family, const GramSystem& gram,
                           const BetaEstimate& beta) {
  const int n = sample.n();
  const int r = residuals.order;
  const int d = family.dim();
  if (static_cast<int>(beta.values.size()) != n ||
      static_cast<int>(residuals.values.size()) != n - r ||
      gram.g_on_grid.rows() != n || gram.g_on_grid.cols() != d) {
    throw ContractError("lambda_process: inputs built on different grids");
  }
  for (double b : beta.values) {
    if (!(b > 0.0)) {
      throw ContractError("lambda_process: beta estimate must be positive");
    }
  }
  const auto& t = sample.grid.points;
  const double scale = std::sqrt(static_cast<double>(n)) / (n - r);

  std::vector<double> root_w(n);
  for (int i = 0; i < n; ++i) root_w[i] = 1.0 / std::sqrt(beta.values[i]);

  // c-part jumps: scale * w^{1/2}(t_i) (R_i^2 - b(t_i)) at i >= r.
  std::vector<double> c_jumps(n, 0.0);
  const bool affine = family.kind() == VarianceFamily::Kind::kAffine;
  for (int i = r; i < n; ++i) {
    double target = residuals.values[i - r] * residuals.values[i - r];
    if (affine) target -= family.offset(t[i]);
    c_jumps[i] = scale * root_w[i] * target;
  }

  std::vector<double> d_jumps(n, 0.0);
  if (affine) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    for (int i = r; i < n; ++i) {
      double target = residuals.values[i - r] * residuals.values[i - r] -
                      family.offset(t[i]);
      v += target * gram.g_on_grid.row(i).transpose();
    }
    v *= scale;
    const Eigen::VectorXd a_inv_v = gram.a_hat.ldlt().solve(v);
    for (int j = 0; j < n; ++j) {
      d_jumps[j] = root_w[j] * gram.g_on_grid.row(j).dot(a_inv_v) / n;
    }
  } else {
    // Nonlinear hypothesis: the fitted-model part of the process.
    const double root_n = std::sqrt(static_cast<double>(n));
    for (int j = 0; j < n; ++j) {
      d_jumps[j] = root_n / n * root_w[j] *
                   family.model_value(t[j], gram.theta_hat);
    }
  }

  std::vector<double> lambda_jumps(n);
  for (int j = 0; j < n; ++j) lambda_jumps[j] = c_jumps[j] - d_jumps[j];

  LambdaParts parts;
  parts.c_part = StepProcess::from_jumps(t, std::move(c_jumps));
  parts.d_part = StepProcess::from_jumps(t, std::move(d_jumps));
  parts.lambda = StepProcess::from_jumps(t, std::move(lambda_jumps));
  return parts;
}

}  // namespace varform

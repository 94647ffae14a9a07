#include "varform/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "varform/errors.hpp"
#include "varform/parallel.hpp"
#include "varform/rng.hpp"

namespace varform {
namespace {

constexpr double kConditionLimit = 1e10;

int points_upto(const DesignGrid& grid, double t0) {
  return static_cast<int>(std::upper_bound(grid.points.begin(),
                                           grid.points.end(), t0) -
                          grid.points.begin());
}

// beta^{-1/2}(t_i) g(t_i) in extended precision; shared by hn_field and
// apply_transform so both accumulate identical per-point terms.
MatrixLd standardized_rows(const GramSystem& gram, const BetaEstimate& beta) {
  const int n = static_cast<int>(gram.g_on_grid.rows());
  const int d = static_cast<int>(gram.g_on_grid.cols());
  MatrixLd u(n, d);
  for (int i = 0; i < n; ++i) {
    const long double scale =
        1.0L / std::sqrt(static_cast<long double>(beta.values[i]));
    for (int j = 0; j < d; ++j) {
      u(i, j) = scale * static_cast<long double>(gram.g_on_grid(i, j));
    }
  }
  return u;
}

}  // namespace

HnField hn_field(const DesignGrid& grid, const GramSystem& gram,
                 const BetaEstimate& beta, double t0) {
  const int n = grid.n();
  const int d = static_cast<int>(gram.g_on_grid.cols());
  if (!(t0 > 0.0 && t0 <= 1.0)) {
    throw ContractError("hn_field: t0 must lie in (0, 1]");
  }
  if (static_cast<int>(beta.values.size()) != n || gram.g_on_grid.rows() != n) {
    throw ContractError("hn_field: inputs built on different grids");
  }
  const int m = points_upto(grid, t0);
  if (m == 0) throw ContractError("hn_field: no design points at or below t0");

  const MatrixLd u = standardized_rows(gram, beta);
  HnField field;
  field.t0 = t0;
  field.covered = m;
  field.h.resize(m);
  field.h_inverse.resize(m);
  field.condition.resize(m);
  field.cholesky.resize(m);

  // Suffix accumulation from the right; H_n(t_j) uses all points t_i >= t_j.
  MatrixLd suffix = MatrixLd::Zero(d, d);
  std::vector<MatrixLd> h_ld(m);
  for (int i = n - 1; i >= 0; --i) {
    suffix.noalias() += u.row(i).transpose() * u.row(i) /
                        static_cast<long double>(n);
    if (i < m) h_ld[i] = suffix;
  }

  for (int j = 0; j < m; ++j) {
    const int tail_points = n - j;
    if (tail_points < d) {
      std::ostringstream msg;
      msg << "H_n is rank-deficient at t_" << j + 1 << " = " << grid.points[j]
          << " (only " << tail_points << " design points remain, need " << d
          << "); lower t0";
      throw SingularHError(msg.str());
    }
    field.h[j] = h_ld[j].cast<double>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(field.h[j]);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double cond =
        lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    field.condition[j] = cond;
    field.max_condition = std::max(field.max_condition, cond);
    if (!(cond < kConditionLimit)) {
      std::ostringstream msg;
      msg << "H_n is ill-conditioned at t_" << j + 1 << " = " << grid.points[j]
          << " (condition " << cond << " >= 1e10); lower t0";
      throw SingularHError(msg.str());
    }
    Eigen::LLT<MatrixLd> llt(h_ld[j]);
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "H_n is not positive definite at t_" << j + 1 << " = "
          << grid.points[j] << "; lower t0";
      throw SingularHError(msg.str());
    }
    field.cholesky[j] = llt.matrixL();
    field.h_inverse[j] =
        llt.solve(MatrixLd::Identity(d, d)).cast<double>();
  }
  return field;
}

TransformedProcess apply_transform(const StepProcess& eta, const HnField& field,
                                   const DesignGrid& grid,
                                   const GramSystem& gram,
                                   const BetaEstimate& beta) {
  const int n = grid.n();
  const int d = static_cast<int>(gram.g_on_grid.cols());
  const int m = field.covered;
  if (static_cast<int>(eta.jumps.size()) != n) {
    throw ContractError("apply_transform: step process not on the design grid");
  }
  if (static_cast<int>(field.cholesky.size()) != m) {
    throw ContractError("apply_transform: H field does not cover [0, t0]");
  }

  const MatrixLd u = standardized_rows(gram, beta);

  // Inner sums sum_{i >= j} beta^{-1/2}(t_i) g(t_i) * jump_i, needed at every
  // t_j <= t0; accumulated once from the right.
  std::vector<VectorLd> inner(m, VectorLd::Zero(d));
  VectorLd suffix = VectorLd::Zero(d);
  for (int i = n - 1; i >= 0; --i) {
    suffix.noalias() +=
        u.row(i).transpose() * static_cast<long double>(eta.jumps[i]);
    if (i < m) inner[i] = suffix;
  }

  TransformedProcess tp;
  tp.t0 = field.t0;
  tp.fn_t0 = static_cast<double>(m) / n;
  tp.n = n;
  tp.times.assign(grid.points.begin(), grid.points.begin() + m);
  tp.values.resize(m);
  long double compensator = 0.0L;
  for (int j = 0; j < m; ++j) {
    const VectorLd x = field.cholesky[j]
                           .template triangularView<Eigen::Lower>()
                           .solve(inner[j]);
    const VectorLd y = field.cholesky[j]
                           .transpose()
                           .template triangularView<Eigen::Upper>()
                           .solve(x);
    compensator +=
        u.row(j).dot(y) / static_cast<long double>(n);
    tp.values[j] =
        static_cast<double>(static_cast<long double>(eta.values[j]) -
                            compensator);
  }
  return tp;
}

Statistics statistics(const TransformedProcess& tp) {
  if (tp.times.empty() || tp.n <= 0) {
    throw ContractError("statistics: transformed process is empty");
  }
  double sum_sq = 0.0;
  double max_abs = 0.0;
  for (double v : tp.values) {
    sum_sq += v * v;
    max_abs = std::max(max_abs, std::fabs(v));
  }
  Statistics s;
  s.g_normalized = sum_sq / tp.n / (tp.fn_t0 * tp.fn_t0);
  s.k_normalized = max_abs / std::sqrt(tp.fn_t0);
  return s;
}

LimitLaw law_from_name(const std::string& name) {
  if (name == "int_w2") return LimitLaw::kIntW2;
  if (name == "sup_w") return LimitLaw::kSupW;
  throw ContractError("unknown law '" + name + "' (expected int_w2|sup_w)");
}

std::string law_name(LimitLaw law) {
  return law == LimitLaw::kIntW2 ? "int_w2" : "sup_w";
}

LawSample::LawSample(LimitLaw law, std::vector<double> sorted_values,
                     std::uint64_t seed)
    : law_(law), seed_(seed), values_(std::move(sorted_values)) {
  if (values_.empty()) throw ContractError("LawSample: empty sample");
}

double LawSample::quantile(double upper_alpha) const {
  if (!(upper_alpha > 0.0 && upper_alpha <= 0.5)) {
    throw ContractError("quantile: alpha must lie in (0, 0.5]");
  }
  const double rank = std::ceil((1.0 - upper_alpha) *
                                static_cast<double>(values_.size()));
  const std::size_t idx = static_cast<std::size_t>(
      std::clamp<double>(rank, 1.0, static_cast<double>(values_.size())));
  return values_[idx - 1];
}

double LawSample::p_value(double statistic) const {
  const auto it =
      std::lower_bound(values_.begin(), values_.end(), statistic);
  return static_cast<double>(values_.end() - it) /
         static_cast<double>(values_.size());
}

double LawSample::mean() const {
  double acc = 0.0;
  for (double v : values_) acc += v;
  return acc / static_cast<double>(values_.size());
}

namespace {

constexpr int kSimulationBlocks = 64;

// Deterministic block-parallel simulation: block b always covers the same
// sample range with its own derived seed, so results do not depend on the
// thread count.
std::vector<double> simulate_blocks(
    std::size_t samples, std::uint64_t seed, int threads,
    const std::function<double(Rng&)>& draw_one) {
  std::vector<double> out(samples);
  parallel_for(
      kSimulationBlocks,
      [&](std::int64_t block) {
        const std::size_t begin = samples * block / kSimulationBlocks;
        const std::size_t end = samples * (block + 1) / kSimulationBlocks;
        Rng rng(substream_seed(seed, 0xb10cULL, static_cast<std::uint64_t>(block)));
        for (std::size_t i = begin; i < end; ++i) out[i] = draw_one(rng);
      },
      threads);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

LawSample simulate_int_w2_kl(std::size_t samples, std::uint64_t seed, int terms,
                             int threads) {
  if (samples == 0 || terms < 1) {
    throw ContractError("simulate_int_w2_kl: bad parameters");
  }
  // int_0^1 W^2 = sum_k Z_k^2 / ((k - 1/2)^2 pi^2).
  std::vector<double> coef(terms);
  for (int k = 1; k <= terms; ++k) {
    const double freq = (k - 0.5) * std::numbers::pi;
    coef[k - 1] = 1.0 / (freq * freq);
  }
  auto draw = [&coef](Rng& rng) {
    double acc = 0.0;
    for (double c : coef) {
      const double z = rng.normal();
      acc += c * z * z;
    }
    return acc;
  };
  return LawSample(LimitLaw::kIntW2,
                   simulate_blocks(samples, seed, threads, draw), seed);
}

LawSample simulate_int_w2_paths(std::size_t samples, std::uint64_t seed,
                                int steps, int threads) {
  if (samples == 0 || steps < 1) {
    throw ContractError("simulate_int_w2_paths: bad parameters");
  }
  const double dt = 1.0 / steps;
  const double root_dt = std::sqrt(dt);
  auto draw = [=](Rng& rng) {
    double w = 0.0, acc = 0.0;
    for (int k = 0; k < steps; ++k) {
      w += root_dt * rng.normal();
      acc += w * w;
    }
    return acc * dt;
  };
  return LawSample(LimitLaw::kIntW2,
                   simulate_blocks(samples, seed, threads, draw), seed);
}

LawSample simulate_sup_w(std::size_t samples, std::uint64_t seed, int steps,
                         int threads) {
  if (samples == 0 || steps < 1) {
    throw ContractError("simulate_sup_w: bad parameters");
  }
  const double root_dt = std::sqrt(1.0 / steps);
  auto draw = [=](Rng& rng) {
    double w = 0.0, peak = 0.0;
    for (int k = 0; k < steps; ++k) {
      w += root_dt * rng.normal();
      peak = std::max(peak, std::fabs(w));
    }
    return peak;
  };
  return LawSample(LimitLaw::kSupW,
                   simulate_blocks(samples, seed, threads, draw), seed);
}

const LawSample& int_w2_law() {
  static const LawSample law = simulate_int_w2_kl();
  return law;
}

const LawSample& sup_w_law() {
  static const LawSample law = simulate_sup_w();
  return law;
}

CriticalValueTable critical_values(const std::vector<double>& alphas,
                                   LimitLaw law, std::uint64_t seed,
                                   std::size_t samples, int threads) {
  if (alphas.empty()) throw ContractError("critical_values: empty alpha list");
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 0.5)) {
      std::ostringstream msg;
      msg << "critical_values: alpha " << a << " outside (0, 0.5]";
      throw ContractError(msg.str());
    }
  }
  CriticalValueTable table;
  table.law = law;
  table.seed = seed;
  table.samples = samples;
  table.alphas = alphas;
  const bool use_cached =
      seed == kCriticalValueSeed && samples == kCriticalValueSamples;
  std::optional<LawSample> fresh;
  if (!use_cached) {
    fresh = law == LimitLaw::kIntW2
                ? simulate_int_w2_kl(samples, seed, kKarhunenLoeveTerms, threads)
                : simulate_sup_w(samples, seed, kBrownianPathSteps, threads);
  }
  const LawSample& sample =
      use_cached ? (law == LimitLaw::kIntW2 ? int_w2_law() : sup_w_law())
                 : *fresh;
  table.quantiles.reserve(alphas.size());
  for (double a : alphas) table.quantiles.push_back(sample.quantile(a));
  return table;
}

TestRun run_test_full(const Sample& sample, const VarianceFamily& family,
                      const TestConfig& config) {
  validate_sample(sample);
  if (!(config.t0 > 0.0 && config.t0 < 1.0)) {
    throw ContractError("run_test: t0 must lie in (0, 1)");
  }
  if (config.alphas.empty()) {
    throw ContractError("run_test: alpha list is empty");
  }
  for (double a : config.alphas) {
    if (!(a > 0.0 && a <= 0.5)) {
      throw ContractError("run_test: alpha values must lie in (0, 0.5]");
    }
  }

  const DifferenceSequence seq =
      config.sequence ? difference_sequence(*config.sequence)
      : config.order == 1
          ? difference_sequence_order1()
          : throw ContractError(
                "run_test: only order 1 is builtin; pass explicit "
                "coefficients for higher orders");

  TestReport report;
  report.t0 = config.t0;
  report.n = sample.n();
  report.family_dim = family.dim();
  report.family = family.description();
  report.alphas = config.alphas;

  BetaEstimate beta;
  if (config.beta_override) {
    if (static_cast<int>(config.beta_override->size()) != sample.n()) {
      throw ContractError("run_test: beta override has wrong length");
    }
    beta.values = *config.beta_override;
    beta.floor_applied.assign(sample.n(), false);
    for (double b : beta.values) {
      if (!(b > 0.0)) {
        throw ContractError("run_test: beta override must be positive");
      }
    }
  } else {
    const double h_cv = config.fixed_bandwidth
                            ? *config.fixed_bandwidth
                            : cv_bandwidth(sample, config.kernel, config.method);
    report.h_cv = h_cv;
    report.beta_bandwidth = 0.5 * h_cv;
    const WeightMatrix w_m =
        kernel_weights(sample.grid, KernelSpec{config.kernel, h_cv},
                       config.method);
    const std::vector<double> fitted = m_hat(sample, w_m);
    const WeightMatrix w_beta = kernel_weights(
        sample.grid, KernelSpec{config.kernel, report.beta_bandwidth},
        config.beta_method);
    beta = beta_hat(sample, w_beta, fitted, seq);
    report.floor_count = beta.floor_count();
  }

  const PseudoResiduals residuals = pseudo_residuals(sample, seq);
  const GramSystem gram = fit_family(family, residuals, sample.grid);
  report.gram_condition = gram.condition;

  const LambdaParts parts =
      lambda_process(sample, residuals, family, gram, beta);
  const HnField field = hn_field(sample.grid, gram, beta, config.t0);
  report.max_condition = field.max_condition;

  const TransformedProcess tp =
      apply_transform(parts.lambda, field, sample.grid, gram, beta);
  report.fn_t0 = tp.fn_t0;

  const Statistics stats = statistics(tp);
  report.g_normalized = stats.g_normalized;
  report.k_normalized = stats.k_normalized;

  const LawSample& law = int_w2_law();
  report.p_value = law.p_value(report.g_normalized);
  report.critical_values.reserve(config.alphas.size());
  report.reject.reserve(config.alphas.size());
  for (double a : config.alphas) {
    const double w_alpha = law.quantile(a);
    report.critical_values.push_back(w_alpha);
    report.reject.push_back(report.g_normalized >= w_alpha);
  }
  TestRun run;
  run.report = std::move(report);
  run.lambda = parts.lambda;
  run.transformed = tp;
  return run;
}

TestReport run_test(const Sample& sample, const VarianceFamily& family,
                    const TestConfig& config) {
  return run_test_full(sample, family, config).report;
}

}  // namespace varform

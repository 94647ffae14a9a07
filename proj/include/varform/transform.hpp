#ifndef VARFORM_TRANSFORM_HPP_
#define VARFORM_TRANSFORM_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "varform/core.hpp"
#include "varform/process.hpp"
#include "varform/smoothing.hpp"

namespace varform {

using MatrixLd = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorLd = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Tail Gram matrices H_n(t_j) for every design point t_j <= t0, their inverses
// and condition numbers. Extended-precision Cholesky factors back the
// transform's inner solves.
struct HnField {
  double t0 = 0.0;
  int covered = 0;  // number of design points with t_j <= t0
  std::vector<Eigen::MatrixXd> h;
  std::vector<Eigen::MatrixXd> h_inverse;
  std::vector<double> condition;
  double max_condition = 0.0;
  std::vector<MatrixLd> cholesky;  // lower factors, long double present
};

HnField hn_field(const DesignGrid& grid, const GramSystem& gram,
                 const BetaEstimate& beta, double t0);

struct TransformedProcess {
  std::vector<double> times;   // design points up to t0
  std::vector<double> values;  // (T_n eta)(t_j)
  double t0 = 0.0;
  double fn_t0 = 0.0;  // F_n(t0)
  int n = 0;           // size of the full design grid
};

// Empirical martingale transform of a step process, computed by suffix
// accumulation in extended precision.
TransformedProcess apply_transform(const StepProcess& eta, const HnField& field,
                                   const DesignGrid& grid,
                                   const GramSystem& gram,
                                   const BetaEstimate& beta);

struct Statistics {
  double g_normalized = 0.0;
  double k_normalized = 0.0;
};

// Cramer-von-Mises and Kolmogorov-Smirnov functionals on [0, t0], rescaled by
// F_n(t0) onto the unit-interval limit laws.
Statistics statistics(const TransformedProcess& tp);

enum class LimitLaw { kIntW2, kSupW };

LimitLaw law_from_name(const std::string& name);
std::string law_name(LimitLaw law);

inline constexpr std::uint64_t kCriticalValueSeed = 0x5eedc01dULL;
inline constexpr std::size_t kCriticalValueSamples = 1'000'000;
inline constexpr int kKarhunenLoeveTerms = 2000;
inline constexpr int kBrownianPathSteps = 4096;

// Sorted Monte Carlo sample of a limiting-law functional.
class LawSample {
 public:
  LawSample(LimitLaw law, std::vector<double> sorted_values, std::uint64_t seed);

  double quantile(double upper_alpha) const;  // the (1 - alpha)-quantile
  double p_value(double statistic) const;     // upper-tail probability
  double mean() const;
  LimitLaw law() const { return law_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return values_.size(); }

 private:
  LimitLaw law_;
  std::uint64_t seed_;
  std::vector<double> values_;
};

// Karhunen-Loeve series simulation of int_0^1 W^2.
LawSample simulate_int_w2_kl(std::size_t samples = kCriticalValueSamples,
                             std::uint64_t seed = kCriticalValueSeed,
                             int terms = kKarhunenLoeveTerms, int threads = 0);

// Discretized Brownian-path simulation of int_0^1 W^2 (independent oracle).
LawSample simulate_int_w2_paths(std::size_t samples = kCriticalValueSamples,
                                std::uint64_t seed = kCriticalValueSeed,
                                int steps = kBrownianPathSteps, int threads = 0);

// Discretized Brownian-path simulation of sup_{[0,1]} |W|.
LawSample simulate_sup_w(std::size_t samples = kCriticalValueSamples,
                         std::uint64_t seed = kCriticalValueSeed,
                         int steps = kBrownianPathSteps, int threads = 0);

// Process-wide law samples at default parameters, computed once.
const LawSample& int_w2_law();
const LawSample& sup_w_law();

struct CriticalValueTable {
  LimitLaw law = LimitLaw::kIntW2;
  std::uint64_t seed = kCriticalValueSeed;
  std::size_t samples = kCriticalValueSamples;
  std::vector<double> alphas;
  std::vector<double> quantiles;
};

CriticalValueTable critical_values(const std::vector<double>& alphas,
                                   LimitLaw law,
                                   std::uint64_t seed = kCriticalValueSeed,
                                   std::size_t samples = kCriticalValueSamples,
                                   int threads = 0);

struct TestConfig {
  int order = 1;                                       // difference order r
  std::optional<std::vector<double>> sequence;         // explicit coefficients
  KernelShape kernel = KernelShape::kEpanechnikov;
  SmoothMethod method = SmoothMethod::kLocalLinear;    // regression estimate
  SmoothMethod beta_method = SmoothMethod::kNadarayaWatson;  // outer weights
  std::optional<double> fixed_bandwidth;               // skip cross validation
  double t0 = 0.9;
  std::vector<double> alphas = {0.025, 0.05, 0.10};
  // Test hook: standardize with known beta values instead of the estimate.
  std::optional<std::vector<double>> beta_override;
};

struct TestReport {
  double g_normalized = 0.0;
  double k_normalized = 0.0;
  std::vector<double> alphas;
  std::vector<double> critical_values;  // for the G statistic, int_W2 law
  std::vector<bool> reject;             // G-test decision per alpha
  double p_value = 0.0;                 // upper-tail p-value for G
  // Diagnostics.
  double h_cv = 0.0;
  double beta_bandwidth = 0.0;
  double t0 = 0.0;
  double fn_t0 = 0.0;
  double max_condition = 0.0;
  double gram_condition = 0.0;
  int floor_count = 0;
  int n = 0;
  int family_dim = 0;
  std::string family;
};

struct TestRun {
  TestReport report;
  StepProcess lambda;
  TransformedProcess transformed;
};

// Full pipeline: bandwidth -> m_hat -> beta_hat -> residuals -> fit ->
// Lambda_n -> T_n Lambda_n -> statistics -> decisions.
TestRun run_test_full(const Sample& sample, const VarianceFamily& family,
                      const TestConfig& config);
TestReport run_test(const Sample& sample, const VarianceFamily& family,
                    const TestConfig& config);

}  // namespace varform

#endif  // VARFORM_TRANSFORM_HPP_

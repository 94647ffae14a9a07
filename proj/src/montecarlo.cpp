#include "varform/montecarlo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "varform/errors.hpp"
#include "varform/parallel.hpp"
#include "varform/rng.hpp"

namespace varform {

ScenarioModel model_from_name(const std::string& name) {
  if (name == "5.3" || name == "sin") return ScenarioModel::kSin;
  if (name == "5.4" || name == "exp") return ScenarioModel::kExp;
  if (name == "5.5" || name == "sqrt") return ScenarioModel::kSqrt;
  throw ContractError("unknown scenario model '" + name +
                      "' (expected 5.3|5.4|5.5)");
}

std::string model_name(ScenarioModel model) {
  switch (model) {
    case ScenarioModel::kSin:
      return "5.3";
    case ScenarioModel::kExp:
      return "5.4";
    case ScenarioModel::kSqrt:
      return "5.5";
  }
  return "?";
}

double scenario_variance(ScenarioModel model, double c, double t) {
  const double base = 0.5 + 3.0 * t * t;
  switch (model) {
    case ScenarioModel::kSin:
      return base + 2.5 * c * std::sin(2.0 * std::numbers::pi * t);
    case ScenarioModel::kExp:
      return base + 2.0 * c * std::exp(2.0 * t);
    case ScenarioModel::kSqrt:
      return base + 4.0 * c * std::sqrt(t);
  }
  return base;
}

void validate_scenario(const ScenarioConfig& config) {
  if (config.n < 1) throw ContractError("scenario: n must be >= 1");
  if (config.c < 0.0) throw ContractError("scenario: c must be >= 0");
  if (config.clip_negative_variance) return;
  constexpr int kCheckPoints = 1024;
  for (int k = 0; k <= kCheckPoints; ++k) {
    const double t = static_cast<double>(k) / kCheckPoints;
    const double v = scenario_variance(config.model, config.c, t);
    if (v < 0.0) {
      std::ostringstream msg;
      msg << "scenario " << model_name(config.model) << " with c = " << config.c
          << " has negative variance " << v << " at t = " << t;
      throw InvalidScenarioError(msg.str());
    }
  }
}

Sample generate_scenario(const ScenarioConfig& config) {
  validate_scenario(config);
  Sample sample;
  sample.grid = build_design(Density::uniform(), config.n);
  sample.responses.resize(config.n);
  Rng rng(config.seed);
  for (int i = 0; i < config.n; ++i) {
    const double t = sample.grid.points[i];
    const double v =
        std::max(scenario_variance(config.model, config.c, t), 0.0);
    sample.responses[i] = 1.0 + t + std::sqrt(v) * rng.normal();
  }
  return sample;
}

Sample generate_sample(int n, const std::function<double(double)>& mean,
                       const std::function<double(double)>& variance,
                       std::uint64_t seed) {
  if (n < 1) throw ContractError("generate_sample: n must be >= 1");
  Sample sample;
  sample.grid = build_design(Density::uniform(), n);
  sample.responses.resize(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double t = sample.grid.points[i];
    const double v = variance(t);
    if (v < 0.0) {
      throw InvalidScenarioError("generate_sample: negative variance");
    }
    sample.responses[i] = mean(t) + std::sqrt(v) * rng.normal();
  }
  return sample;
}

RejectionTable rejection_rates(const std::vector<SweepCell>& cells,
                               const VarianceFamily& family,
                               const TestConfig& config, int replications,
                               std::uint64_t master_seed, int threads) {
  if (replications < 1) {
    throw ContractError("rejection_rates: need at least one replication");
  }
  if (config.alphas.empty()) {
    throw ContractError("rejection_rates: alpha list is empty");
  }
  for (double a : config.alphas) {
    if (!(a > 0.0 && a <= 0.5)) {
      throw ContractError("rejection_rates: alpha values must lie in (0, 0.5]");
    }
  }
  // Materialize the law sample up front so worker threads only read it.
  (void)int_w2_law();

  RejectionTable table;
  table.alphas = config.alphas;
  table.master_seed = master_seed;
  table.replications = replications;
  table.cells.reserve(cells.size());

  const int n_alpha = static_cast<int>(config.alphas.size());
  for (std::size_t cell_idx = 0; cell_idx < cells.size(); ++cell_idx) {
    const SweepCell& cell = cells[cell_idx];
    std::vector<signed char> rejected(
        static_cast<std::size_t>(replications) * n_alpha, 0);
    std::vector<signed char> failed(replications, 0);
    parallel_for(
        replications,
        [&](std::int64_t rep) {
          ScenarioConfig sc;
          sc.model = cell.model;
          sc.c = cell.c;
          sc.n = cell.n;
          // Sub-streams are keyed by (master seed, replication index) only, so
          // every cell sees the same error draws: comparisons across c are
          // paired, and parallel and serial runs agree exactly.
          sc.seed = substream_seed(master_seed,
                                   static_cast<std::uint64_t>(rep));
          try {
            const Sample sample = generate_scenario(sc);
            const TestReport report = run_test(sample, family, config);
            for (int a = 0; a < n_alpha; ++a) {
              rejected[rep * n_alpha + a] = report.reject[a] ? 1 : 0;
            }
          } catch (const Error&) {
            failed[rep] = 1;
          }
        },
        threads);

    RejectionCell out;
    out.cell = cell;
    out.replications = replications;
    for (int rep = 0; rep < replications; ++rep) out.failures += failed[rep];
    if (out.failures * 100 > replications) {
      std::ostringstream msg;
      msg << "rejection_rates: " << out.failures << " of " << replications
          << " replications failed for model " << model_name(cell.model)
          << ", c = " << cell.c << ", n = " << cell.n;
      throw HarnessError(msg.str());
    }
    const int effective = replications - out.failures;
    out.proportions.resize(n_alpha);
    out.standard_errors.resize(n_alpha);
    for (int a = 0; a < n_alpha; ++a) {
      int count = 0;
      for (int rep = 0; rep < replications; ++rep) {
        if (!failed[rep]) count += rejected[rep * n_alpha + a];
      }
      const double p =
          effective > 0 ? static_cast<double>(count) / effective : 0.0;
      out.proportions[a] = p;
      out.standard_errors[a] =
          effective > 0 ? std::sqrt(p * (1.0 - p) / effective) : 0.0;
    }
    table.cells.push_back(std::move(out));
  }
  return table;
}

}  // namespace varform

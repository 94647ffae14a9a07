// varform: goodness-of-fit test for the parametric form of the conditional
// variance function, based on the martingale-transformed empirical process of
// pseudo residuals.
//
// Subcommands:
//   test      run the test on a two-column CSV of (t, y)
//   simulate  replicate the rejection-rate study over model/c/n sweeps
//   critval   print Monte Carlo critical values of the limiting laws

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "varform/errors.hpp"
#include "varform/montecarlo.hpp"
#include "varform/process.hpp"
#include "varform/report.hpp"
#include "varform/transform.hpp"

namespace {

using nlohmann::json;

struct CommonOptions {
  std::vector<std::string> family = {"const", "t2"};
  std::string offset = "none";
  int order = 1;
  std::string kernel = "epanechnikov";
  std::string method = "local-linear";
  std::string beta_method = "nw";
  std::string bandwidth = "auto";
  double t0 = 0.9;
  std::vector<double> alphas;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string trajectory_out;
  std::string config_path;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  if (const char* env = std::getenv("VARFORM_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 12345;
}

// Config-file values fill in any option the command line left at its default.
void merge_config_file(CommonOptions& opt, const CLI::App& app) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) {
    throw varform::ContractError("cannot open config file '" +
                                 opt.config_path + "'");
  }
  json cfg = json::parse(in, nullptr, true);
  auto defaulted = [&app](const std::string& flag) {
    const CLI::Option* o = app.get_option_no_throw(flag);
    return o != nullptr && o->count() == 0;
  };
  if (cfg.contains("family") && defaulted("--family")) {
    opt.family = cfg["family"].get<std::vector<std::string>>();
  }
  if (cfg.contains("offset") && defaulted("--offset")) {
    opt.offset = cfg["offset"].get<std::string>();
  }
  if (cfg.contains("order") && defaulted("--order")) {
    opt.order = cfg["order"].get<int>();
  }
  if (cfg.contains("kernel") && defaulted("--kernel")) {
    opt.kernel = cfg["kernel"].get<std::string>();
  }
  if (cfg.contains("method") && defaulted("--method")) {
    opt.method = cfg["method"].get<std::string>();
  }
  if (cfg.contains("beta_method") && defaulted("--beta-method")) {
    opt.beta_method = cfg["beta_method"].get<std::string>();
  }
  if (cfg.contains("bandwidth") && defaulted("--bandwidth")) {
    opt.bandwidth = cfg["bandwidth"].is_number()
                        ? varform::format_full(cfg["bandwidth"].get<double>())
                        : cfg["bandwidth"].get<std::string>();
  }
  if (cfg.contains("t0") && defaulted("--t0")) {
    opt.t0 = cfg["t0"].get<double>();
  }
  if (cfg.contains("alphas") && defaulted("--alpha")) {
    opt.alphas = cfg["alphas"].get<std::vector<double>>();
  }
  if (cfg.contains("seed") && defaulted("--seed")) {
    opt.seed = cfg["seed"].get<std::uint64_t>();
  }
  if (cfg.contains("out") && defaulted("--out")) {
    opt.out = cfg["out"].get<std::string>();
  }
  if (cfg.contains("trajectory_out") && defaulted("--trajectory-out")) {
    opt.trajectory_out = cfg["trajectory_out"].get<std::string>();
  }
}

varform::TestConfig build_test_config(const CommonOptions& opt) {
  varform::TestConfig config;
  config.order = opt.order;
  config.kernel = varform::kernel_from_name(opt.kernel);
  config.method = varform::method_from_name(opt.method);
  config.beta_method = varform::method_from_name(opt.beta_method);
  if (opt.bandwidth != "auto") {
    char* end = nullptr;
    const double h = std::strtod(opt.bandwidth.c_str(), &end);
    if (end == nullptr || *end != '\0' || !(h > 0.0)) {
      throw varform::ContractError("--bandwidth expects 'auto' or a positive number");
    }
    config.fixed_bandwidth = h;
  }
  config.t0 = opt.t0;
  if (!opt.alphas.empty()) config.alphas = opt.alphas;
  return config;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    varform::write_file(path, content);
  }
}

int cmd_test(const std::string& input, CommonOptions& opt, const CLI::App& app) {
  merge_config_file(opt, app);
  const varform::Sample sample = varform::read_sample_csv(input);
  const varform::VarianceFamily family =
      varform::make_affine_family(opt.family, opt.offset);
  const varform::TestConfig config = build_test_config(opt);
  const varform::TestRun run = varform::run_test_full(sample, family, config);
  emit(opt.out, varform::report_to_json(run.report));
  if (!opt.trajectory_out.empty()) {
    varform::write_file(opt.trajectory_out,
                        varform::trajectory_csv(run.lambda, run.transformed));
  }
  // Reject/no-reject at the smallest configured level.
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < run.report.alphas.size(); ++i) {
    if (run.report.alphas[i] < run.report.alphas[smallest]) smallest = i;
  }
  return run.report.reject[smallest] ? 1 : 0;
}

int cmd_simulate(const std::vector<std::string>& models,
                 const std::vector<double>& cs, const std::vector<int>& ns,
                 int reps, int threads, CommonOptions& opt,
                 const CLI::App& app) {
  merge_config_file(opt, app);
  const varform::VarianceFamily family =
      varform::make_affine_family(opt.family, opt.offset);
  const varform::TestConfig config = build_test_config(opt);
  std::vector<varform::SweepCell> cells;
  for (const auto& model : models) {
    for (double c : cs) {
      for (int n : ns) {
        cells.push_back({varform::model_from_name(model), c, n});
      }
    }
  }
  const varform::RejectionTable table = varform::rejection_rates(
      cells, family, config, reps, resolve_seed(opt.seed), threads);
  emit(opt.out, varform::rejection_table_csv(table));
  return 0;
}

int cmd_critval(const std::string& law_name, std::size_t samples,
                CommonOptions& opt, const CLI::App& app) {
  merge_config_file(opt, app);
  std::vector<double> alphas =
      opt.alphas.empty() ? std::vector<double>{0.025, 0.05, 0.10} : opt.alphas;
  const varform::CriticalValueTable table = varform::critical_values(
      alphas, varform::law_from_name(law_name),
      opt.seed ? *opt.seed : varform::kCriticalValueSeed, samples);
  emit(opt.out, varform::critical_value_csv(table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goodness-of-fit test for the form of the conditional variance"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string input;
  std::vector<std::string> models = {"5.3", "5.4", "5.5"};
  std::vector<double> cs = {0.0, 0.5, 1.0};
  std::vector<int> ns = {50, 100, 200};
  int reps = 1000;
  int threads = 0;
  std::string law = "int_w2";
  std::size_t samples = varform::kCriticalValueSamples;

  auto add_common = [&](CLI::App* cmd, bool with_traj) {
    cmd->add_option("--family", opt.family,
                    "comma list of basis functions "
                    "(const|t|t2|sqrt_t|exp2t|sin2pit)")
        ->delimiter(',');
    cmd->add_option("--offset", opt.offset,
                    "known offset function name, or 'none'");
    cmd->add_option("--order", opt.order, "difference-sequence order r");
    cmd->add_option("--kernel", opt.kernel,
                    "epanechnikov|uniform|biweight");
    cmd->add_option("--method", opt.method, "nw|local-linear");
    cmd->add_option("--beta-method", opt.beta_method,
                    "outer smoother of the standardizing estimate");
    cmd->add_option("--bandwidth", opt.bandwidth, "'auto' or a fixed value");
    cmd->add_option("--t0", opt.t0, "right truncation point in (0,1)");
    cmd->add_option("--alpha", opt.alphas, "significance level (repeatable)")
        ->expected(-1);
    cmd->add_option("--seed", opt.seed, "RNG seed (VARFORM_SEED as fallback)");
    cmd->add_option("--out", opt.out, "output path (stdout when omitted)");
    if (with_traj) {
      cmd->add_option("--trajectory-out", opt.trajectory_out,
                      "trajectory CSV path");
    }
    cmd->add_option("--config", opt.config_path,
                    "JSON config file; flags take precedence");
  };

  CLI::App* test = app.add_subcommand("test", "test a data file");
  test->add_option("--input", input, "two-column CSV with header t,y")
      ->required();
  add_common(test, true);

  CLI::App* simulate =
      app.add_subcommand("simulate", "run the rejection-rate study");
  simulate->add_option("--model", models, "scenario models (5.3|5.4|5.5)")
      ->delimiter(',');
  simulate->add_option("--c", cs, "deviation sizes")->delimiter(',');
  simulate->add_option("--n", ns, "sample sizes")->delimiter(',');
  simulate->add_option("--reps", reps, "replications per cell");
  simulate->add_option("--threads", threads, "worker threads (0 = hardware)");
  add_common(simulate, false);

  CLI::App* critval =
      app.add_subcommand("critval", "critical values of the limiting laws");
  critval->add_option("--law", law, "int_w2|sup_w");
  critval->add_option("--samples", samples, "Monte Carlo sample count");
  add_common(critval, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (test->parsed()) return cmd_test(input, opt, *test);
    if (simulate->parsed()) {
      return cmd_simulate(models, cs, ns, reps, threads, opt, *simulate);
    }
    return cmd_critval(law, samples, opt, *critval);
  } catch (const varform::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "dcopt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"difference-of-convex optimization bench harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  std::uint64_t seed_value = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config (json)")->required();
  run->add_option("--out", out_dir, "output directory (default: config out_dir)");
  run->add_option("--workers", workers, "concurrent cells")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed_value, "override the config seed");

  std::string trace_path;
  std::string rate_out;
  CLI::App* rate = app.add_subcommand("rate-plot", "convergence-rate data from a trace");
  rate->add_option("trace", trace_path, "trace csv produced by run")->required();
  rate->add_option("--out", rate_out, "output csv (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (seed_opt->count() > 0) seed = seed_value;
      dcopt::ExperimentConfig cfg = dcopt::load_experiment_config(config_path);
      std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
      dcopt::ExperimentResult res = dcopt::run_experiment(cfg, dir, workers, seed);
      for (const auto& cell : res.cells)
        std::cout << cell.algorithm << " tol=" << cell.tolerance << " -> "
                  << cell.status << " iters=" << cell.iterations << "\n";
      std::cout << "report: " << dir << "/report.json\n";
      return res.exit_code;
    }
    if (rate->parsed()) {
      std::ifstream in(trace_path);
      if (!in) {
        std::cerr << "cannot open trace: " << trace_path << "\n";
        return 2;
      }
      dcopt::TraceFile tf = dcopt::read_trace(in);
      std::string csv = dcopt::rate_plot_csv(tf);
      if (rate_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(rate_out);
        out << csv;
      }
      return 0;
    }
  } catch (const dcopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

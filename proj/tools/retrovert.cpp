// retrovert {validate|reverse|verify|simulate} <model-file> [flags]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "retrovert/cli.hpp"

int main(int argc, char** argv) {
  using namespace retrovert::cli;

  CLI::App app{"Backward realizations and all-pass extensions of linear stochastic models"};
  app.require_subcommand(1);

  std::string model_file;

  auto* validate = app.add_subcommand("validate", "check stability, reachability and rank of B");
  validate->add_option("model", model_file, "model file")->required();

  std::optional<std::string> out_file;
  auto* reverse = app.add_subcommand("reverse", "write the backward realization");
  reverse->add_option("model", model_file, "model file")->required();
  reverse->add_option("-o,--out", out_file, "output file (default: standard output)");

  VerifyOptions verify_opts;
  std::size_t grid = 0;
  auto* verify = app.add_subcommand("verify", "run the algebraic identity checks");
  verify->add_option("model", model_file, "model file")->required();
  auto* grid_opt =
      verify->add_option("--grid", grid, "grid size (default 512 discrete, 61 continuous)");
  verify->add_option("--tol", verify_opts.tolerance, "grid tolerance")->capture_default_str();

  SimulateOptions sim_opts;
  double dt = 0.0;
  std::string emit;
  auto* simulate = app.add_subcommand("simulate", "seeded sample-path and statistics checks");
  simulate->add_option("model", model_file, "model file")->required();
  simulate->add_option("--seed", sim_opts.seed, "generator seed")->capture_default_str();
  simulate->add_option("--steps", sim_opts.steps, "horizon N")->capture_default_str();
  auto* dt_opt = simulate->add_option("--dt", dt, "step h (continuous models only)");
  simulate->add_option("--lags", sim_opts.lags, "autocorrelation lags")->capture_default_str();
  auto* emit_opt = simulate->add_option("--emit-paths", emit, "write the sample path here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kIoFailure;
  }

  if (*validate) return cmd_validate(model_file, std::cout, std::cerr);
  if (*reverse) return cmd_reverse(model_file, out_file, std::cout, std::cerr);
  if (*verify) {
    if (grid_opt->count() > 0) verify_opts.grid = grid;
    return cmd_verify(model_file, verify_opts, std::cout, std::cerr);
  }
  if (*simulate) {
    if (dt_opt->count() > 0) sim_opts.dt = dt;
    if (emit_opt->count() > 0) sim_opts.emit_paths = emit;
    return cmd_simulate(model_file, sim_opts, std::cout, std::cerr);
  }
  return kIoFailure;
}

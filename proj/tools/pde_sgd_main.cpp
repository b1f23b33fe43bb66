// pde-sgd: projected stochastic gradient runs for the elliptic tracking
// problem with random coefficients, with a priori mesh-refinement schedules.
//
// Usage: pde-sgd <subcommand> --config <file> [--seed S] [--out DIR]
//
// Subcommands:
//   fem-convergence  manufactured-solution L2 convergence study
//   sc-run           one strongly convex PSG run with trace and j-hat
//   sc-ensemble      multi-seed error decay against a stored reference
//   avg-sweep        iterate-averaging sweep over iteration budgets
//   ref-solution     long run producing a stored reference solution
//   compare          errors of a finished run against a stored reference
//   theory           recursion/rate tables and slope-fit self checks
//
// All outputs are CSV files described in FORMATS.md. Exit code 0 on success.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "pdesgd/config.hpp"
#include "pdesgd/harness.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int dispatch(const std::string& cmd, const Args& args) {
  pdesgd::ExperimentConfig cfg = pdesgd::ExperimentConfig::parse_file(args.config);
  if (args.seed_set) cfg.seed = args.seed;
  if (!args.out.empty()) cfg.out = args.out;
  const std::string dir = cfg.out;

  if (cmd == "fem-convergence") return pdesgd::run_fem_convergence(cfg, dir);
  if (cmd == "sc-run") return pdesgd::run_sc(cfg, dir);
  if (cmd == "sc-ensemble") return pdesgd::run_sc_ensemble(cfg, dir);
  if (cmd == "avg-sweep") return pdesgd::run_avg_sweep(cfg, dir);
  if (cmd == "ref-solution") return pdesgd::run_ref_solution(cfg, dir);
  if (cmd == "compare") return pdesgd::run_compare(cfg, dir);
  if (cmd == "theory") return pdesgd::run_theory(cfg, dir);
  std::cerr << "unknown subcommand " << cmd << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"projected stochastic gradient with mesh-refinement schedules"};
  app.require_subcommand(1);

  Args args;
  const char* names[] = {"fem-convergence", "sc-run", "sc-ensemble",
                         "avg-sweep",       "ref-solution", "compare", "theory"};
  for (const char* name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config, "experiment config file")
        ->required();
    sub->add_option("--seed", args.seed, "override the master seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    sub->add_option("--out", args.out, "override the output directory");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const char* name : names)
      if (app.got_subcommand(name)) return dispatch(name, args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

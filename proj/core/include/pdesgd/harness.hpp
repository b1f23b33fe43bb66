#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdesgd/analysis.hpp"
#include "pdesgd/config.hpp"
#include "pdesgd/optimizer.hpp"

namespace pdesgd {

// Everything derived from an ExperimentConfig that the optimizer needs:
// field spec, targets, step rule, schedule.
struct ProblemSetup {
  std::shared_ptr<const FieldSpec> field;
  ScalarField y_target;
  std::optional<ScalarField> state_shift;
  double lambda = 0.0;
  double norm_y_target = 0.0;  // analytic L2 norms feeding the M bound
  double norm_shift = 0.0;
  double d_ad = 1.0;
  double m_bound = 0.0;
};

ProblemSetup build_problem(const ExperimentConfig& cfg);

// PsgConfig for a run of `iterations` steps under `kind` (the sweep drives
// several rules from one config).
PsgConfig build_psg_config(const ExperimentConfig& cfg, const ProblemSetup& setup,
                           StepRuleKind kind, int iterations);

struct Estimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

// Monte Carlo estimate of j(u) from m independent coefficient samples.
Estimate estimate_objective(const P0Function& u, const ProblemSetup& setup,
                            int m, RngStream& rng);

// Paired estimate of j(u_a) - j(u_b) with common random numbers: both
// controls must live on the same mesh; each sample assembles one matrix and
// solves two right-hand sides.
Estimate estimate_objective_diff(const P0Function& u_a, const P0Function& u_b,
                                 const ProblemSetup& setup, int m,
                                 RngStream& rng);

// Reference solution storage: mesh dump + control values + meta file.
struct Reference {
  std::vector<std::shared_ptr<const TriMesh>> chain;  // levels 0..level
  P0Function u;  // on chain.back()
  int level = 0;
};

void save_reference(const std::string& dir, const P0Function& u);
Reference load_reference(const std::string& dir);

// Transfers P0 values from one uniform-refinement level to a finer one using
// the reference's mesh chain (every mesh here descends from the same initial
// mesh, so triangle indexing per level is universal).
P0Function prolong_to_reference(const P0Function& u, const Reference& ref);

// Subcommand drivers. Each writes CSV files under `dir` and returns 0.
int run_fem_convergence(const ExperimentConfig& cfg, const std::string& dir);
int run_sc(const ExperimentConfig& cfg, const std::string& dir);
int run_sc_ensemble(const ExperimentConfig& cfg, const std::string& dir);
int run_avg_sweep(const ExperimentConfig& cfg, const std::string& dir);
int run_ref_solution(const ExperimentConfig& cfg, const std::string& dir);
int run_compare(const ExperimentConfig& cfg, const std::string& dir);
int run_theory(const ExperimentConfig& cfg, const std::string& dir);

}  // namespace pdesgd

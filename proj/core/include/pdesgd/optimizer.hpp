#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "pdesgd/fem.hpp"
#include "pdesgd/functions.hpp"
#include "pdesgd/random_field.hpp"
#include "pdesgd/rng.hpp"

namespace pdesgd {

// Step-size regimes. The strongly convex rule decays like theta/(n+nu); the
// averaging rules use the larger O(1/sqrt(n)) steps that require weighted
// iterate averaging over a tail window.
struct StronglyConvexStep {
  double theta = 0.0;
  double nu = 0.0;
};
struct ConstantAveragingStep {
  double d_ad = 0.0;
  double m_bound = 0.0;
  int horizon = 0;  // N: the step is d_ad / sqrt(m_bound * N)
};
struct VariableAveragingStep {
  double theta = 0.0;
  double d_ad = 0.0;
  double m_bound = 0.0;
};
using StepRule =
    std::variant<StronglyConvexStep, ConstantAveragingStep, VariableAveragingStep>;

// Couples the iteration count to the maximal admissible mesh size:
// strongly convex  h_n <= (c/(n+nu))^{1/p},
// averaging        h_n <= (c/(sqrt n + sqrt(n-1)))^{1/p},
// with p = min(2s, t, 1) from the field's regularity inputs.
struct MeshSchedule {
  double c = 0.0;
  double p = 1.0;
};

double step_size(const StepRule& rule, int n);

// nu lower bound of the strongly convex rate theorem plus a +0.5 margin:
// at exact equality the rate constant's denominator vanishes.
double derive_nu(double theta, double K, double mu);

double mesh_bound(const MeshSchedule& schedule, const StepRule& rule, int n);

// Second-moment bound of the stochastic gradient from the Poincare-type
// estimate: M = [C (||y^D|| + C (||u|| + ||e^D||))]^2 with C = (2/pi^2)/a_min.
// The cost weight does not enter; the parameter is kept for the record.
double compute_M_bound(double a_min, double lambda, double norm_y_target,
                       double norm_shift, double control_bound);

// Componentwise clamp: the exact L2 projection onto {lo <= u <= hi} for
// piecewise constants with constant bounds.
P0Function project_box(const P0Function& u, double lo, double hi);

// One explicit projected step u <- clamp(u - t g). Split out of psg_step so
// tests can drive it with synthetic gradients.
P0Function apply_step(const P0Function& u, const P0Function& g, double t,
                      double lo, double hi);

// Running weighted mean update: avg <- (w_sum avg + w u) / (w_sum + w).
// Keeping the mean (not the weighted sum) makes mesh transfers exact.
void accumulate_weighted_mean(P0Function& avg, double& weight_sum,
                              const P0Function& u, double w);

struct PsgConfig {
  StepRule rule;
  MeshSchedule schedule;
  bool refine = true;
  int initial_level = 0;
  int max_level = -1;  // -1: unlimited
  double lambda = 0.0;
  double u_lo = -1.0;
  double u_hi = 1.0;
  std::shared_ptr<const FieldSpec> field;
  ScalarField y_target;                  // tracking target
  std::optional<ScalarField> state_shift;  // extra state right-hand side
  int iterations = 0;       // N
  double alpha = 0.5;       // averaging window start fraction: i = ceil(alpha N)
  double solver_tol = 1e-10;
};

struct PsgState {
  P0Function u;
  std::shared_ptr<const TriMesh> mesh;
  int n = 1;  // index of the next step
  P0Function average;   // running t_n-weighted mean over the averaging window
  double weight_sum = 0.0;
  RngStream rng;
};

struct RunRecordRow {
  int n = 0;
  double t_n = 0.0;
  double h_n = 0.0;
  int refined = 0;  // uniform passes performed at the top of this iteration
  int triangles = 0;
  double wall_s = 0.0;
};

struct RunRecord {
  std::vector<RunRecordRow> rows;
  P0Function final_u;
  P0Function averaged_u;  // averaging regimes; final iterate otherwise
};

PsgState psg_init(const PsgConfig& config, std::shared_ptr<const TriMesh> mesh,
                  std::uint64_t master_seed, std::uint64_t stream);

// One iteration of the discretized projected stochastic gradient method:
// refine the mesh until it satisfies the schedule bound (transferring the
// iterate and the running average exactly), draw a fresh coefficient sample,
// solve the state and adjoint, take the projected gradient step, and update
// the averaging window.
void psg_step(PsgState& state, const PsgConfig& config, RunRecord* record);

RunRecord run_psg(const PsgConfig& config, std::uint64_t master_seed,
                  std::uint64_t stream = 0);

}  // namespace pdesgd

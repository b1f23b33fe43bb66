#include "pdesgd/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace pdesgd {

double step_size(const StepRule& rule, int n) {
  if (n < 1) throw std::invalid_argument("step_size: n >= 1 required");
  if (const auto* sc = std::get_if<StronglyConvexStep>(&rule))
    return sc->theta / (n + sc->nu);
  if (const auto* ca = std::get_if<ConstantAveragingStep>(&rule))
    return ca->d_ad / std::sqrt(ca->m_bound * ca->horizon);
  const auto& va = std::get<VariableAveragingStep>(rule);
  return va.theta * va.d_ad / std::sqrt(va.m_bound * n);
}

double derive_nu(double theta, double K, double mu) {
  double denom = 2.0 * mu * theta - 1.0;
  if (denom <= 0.0)
    throw std::invalid_argument("derive_nu: requires 2 mu theta > 1");
  return 2.0 * theta * K / denom - 1.0 + 0.5;
}

double mesh_bound(const MeshSchedule& schedule, const StepRule& rule, int n) {
  if (n < 1) throw std::invalid_argument("mesh_bound: n >= 1 required");
  if (const auto* sc = std::get_if<StronglyConvexStep>(&rule))
    return std::pow(schedule.c / (n + sc->nu), 1.0 / schedule.p);
  double denom = std::sqrt(static_cast<double>(n)) +
                 std::sqrt(static_cast<double>(n - 1));
  return std::pow(schedule.c / denom, 1.0 / schedule.p);
}

double compute_M_bound(double a_min, double /*lambda*/, double norm_y_target,
                       double norm_shift, double control_bound) {
  if (a_min <= 0.0) throw std::invalid_argument("compute_M_bound: a_min <= 0");
  constexpr double kPi = 3.141592653589793238462643383279502884;
  double poincare_sq = 2.0 / (kPi * kPi);  // (diam / pi)^2 for the unit square
  double c = poincare_sq / a_min;
  double g = c * (norm_y_target + c * (control_bound + norm_shift));
  return g * g;
}

P0Function project_box(const P0Function& u, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("project_box: requires lo < hi");
  P0Function out = u;
  for (auto& v : out.values()) v = std::clamp(v, lo, hi);
  return out;
}

P0Function apply_step(const P0Function& u, const P0Function& g, double t,
                      double lo, double hi) {
  if (u.mesh() != g.mesh())
    throw std::invalid_argument("apply_step: mesh mismatch");
  P0Function out = u;
  for (int i = 0; i < out.size(); ++i)
    out[i] = std::clamp(u[i] - t * g[i], lo, hi);
  return out;
}

void accumulate_weighted_mean(P0Function& avg, double& weight_sum,
                              const P0Function& u, double w) {
  double w_new = weight_sum + w;
  for (int i = 0; i < avg.size(); ++i)
    avg[i] = (weight_sum * avg[i] + w * u[i]) / w_new;
  weight_sum = w_new;
}

PsgState psg_init(const PsgConfig& config, std::shared_ptr<const TriMesh> mesh,
                  std::uint64_t master_seed, std::uint64_t stream) {
  PsgState s{P0Function(mesh, 0.0), mesh, 1, P0Function(mesh, 0.0), 0.0,
             RngStream(master_seed, stream)};
  (void)config;
  return s;
}

namespace {

int averaging_window_start(const PsgConfig& config) {
  if (std::holds_alternative<StronglyConvexStep>(config.rule)) return -1;
  int i = static_cast<int>(std::ceil(config.alpha * config.iterations));
  return std::max(i, 1);
}

}  // namespace

void psg_step(PsgState& state, const PsgConfig& config, RunRecord* record) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n = state.n;

  int passes = 0;
  if (config.refine) {
    double bound = mesh_bound(config.schedule, config.rule, n);
    while (state.mesh->h_max() > bound &&
           (config.max_level < 0 || state.mesh->level() < config.max_level)) {
      auto fine = refine_uniform(state.mesh);
      state.u = prolong_p0(state.u, fine);
      if (state.weight_sum > 0.0)
        state.average = prolong_p0(state.average, fine);
      else
        state.average = P0Function(fine, 0.0);
      state.mesh = fine;
      ++passes;
    }
  }

  FieldRealization xi = sample_realization(config.field, state.rng);
  P0Function g = stochastic_gradient(
      state.u, xi, config.lambda, config.y_target,
      config.state_shift ? &*config.state_shift : nullptr, config.solver_tol);
  double t_n = step_size(config.rule, n);
  state.u = apply_step(state.u, g, t_n, config.u_lo, config.u_hi);

  // Averaging window: accumulate the post-update iterate with weight t_n
  // once n reaches ceil(alpha N). The running value is kept as a weighted
  // mean so mesh transfers stay exact.
  int window_start = averaging_window_start(config);
  if (window_start > 0 && n >= window_start)
    accumulate_weighted_mean(state.average, state.weight_sum, state.u, t_n);

  if (record != nullptr) {
    RunRecordRow row;
    row.n = n;
    row.t_n = t_n;
    row.h_n = state.mesh->h_max();
    row.refined = passes;
    row.triangles = state.mesh->triangle_count();
    row.wall_s = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t_start)
                     .count();
    record->rows.push_back(row);
  }
  state.n = n + 1;
}

RunRecord run_psg(const PsgConfig& config, std::uint64_t master_seed,
                  std::uint64_t stream) {
  if (config.iterations < 1)
    throw std::invalid_argument("run_psg: iterations >= 1 required");
  if (!config.field) throw std::invalid_argument("run_psg: field spec missing");

  auto mesh = TriMesh::unit_square_initial();
  int level0 = config.max_level >= 0
                   ? std::min(config.initial_level, config.max_level)
                   : config.initial_level;
  for (int k = 0; k < level0; ++k) mesh = refine_uniform(mesh);

  PsgState state = psg_init(config, mesh, master_seed, stream);
  RunRecord record;
  for (int n = 1; n <= config.iterations; ++n) psg_step(state, config, &record);
  record.final_u = state.u;
  record.averaged_u = state.weight_sum > 0.0 ? state.average : state.u;
  return record;
}

}  // namespace pdesgd

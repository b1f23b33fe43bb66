#include "pdesgd/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pdesgd {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Internal rng stream ids, offsets under one master seed.
constexpr std::uint64_t kStreamRunBase = 10;     // + seed index
constexpr std::uint64_t kStreamJhatBase = 1000;  // + checkpoint index
constexpr std::uint64_t kStreamCrn = 5000;
constexpr std::uint64_t kStreamBounds = 7000;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file " + path);
    out_ << header << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }
  std::ofstream out_;
};

std::string cell(double v) { return fmt(v); }
std::string cell(int v) { return std::to_string(v); }

void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

std::vector<int> checkpoint_list(int n_total, int count) {
  std::set<int> pts;
  if (count <= 0) return {};
  for (int i = 0; i < count; ++i) {
    double expnt = count > 1 ? static_cast<double>(i) / (count - 1) : 1.0;
    int n = static_cast<int>(
        std::lround(std::pow(static_cast<double>(n_total), expnt)));
    pts.insert(std::clamp(n, 1, n_total));
  }
  return {pts.begin(), pts.end()};
}

void write_p0_values(const std::string& path, const P0Function& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << "p0 " << u.size() << "\n";
  for (int i = 0; i < u.size(); ++i) out << fmt(u[i]) << "\n";
}

std::vector<double> read_p0_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open control file " + path);
  std::string tag;
  int count = 0;
  in >> tag >> count;
  if (tag != "p0" || count <= 0)
    throw std::runtime_error("malformed control file " + path);
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i)
    if (!(in >> v[i]))
      throw std::runtime_error("truncated control file " + path);
  return v;
}

std::string mesh_dump_string(const TriMesh& mesh) {
  std::ostringstream os;
  mesh.dump(os);
  return os.str();
}

}  // namespace

ProblemSetup build_problem(const ExperimentConfig& cfg) {
  ProblemSetup setup;
  setup.lambda = cfg.lambda;

  if (cfg.family == "cosine") {
    setup.field = kl_cosine(cfg.m, cfg.l, cfg.a0);
  } else if (cfg.family == "lognormal") {
    setup.field = kl_lognormal(cfg.m, cfg.l1, cfg.l2, cfg.a0, cfg.sigma,
                               cfg.trunc, cfg.a_min);
  } else if (cfg.family == "piecewise") {
    setup.field = piecewise_two_block(cfg.upper_lo, cfg.upper_hi, cfg.lower_lo,
                                      cfg.lower_hi);
  } else {
    throw std::runtime_error("unknown field family " + cfg.family);
  }
  // user regularity inputs override the family defaults
  {
    auto spec = std::make_shared<FieldSpec>(*setup.field);
    spec->sobolev_s = cfg.sobolev_s;
    spec->holder_t = cfg.holder_t;
    setup.field = spec;
  }

  if (cfg.variant == ProblemVariant::StronglyConvex) {
    if (cfg.lambda <= 0.0)
      throw std::runtime_error("strongly_convex variant requires lambda > 0");
    double amp = -(8.0 * kPi * kPi + 1.0 / (8.0 * kPi * kPi * cfg.lambda));
    setup.y_target = [amp](double x, double y) {
      return amp * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
    };
    setup.norm_y_target = std::abs(amp) / 2.0;  // ||sin sin|| = 1/2
    setup.norm_shift = 0.0;
  } else {
    setup.y_target = [](double x, double y) {
      return std::sin(kPi * x) * std::sin(kPi * y) +
             3.0 * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
    };
    setup.state_shift = [](double x, double y) {
      double s2 = std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
      double sgn = s2 > 0.0 ? 1.0 : (s2 < 0.0 ? -1.0 : 0.0);
      return 6.0 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y) - sgn;
    };
    setup.norm_y_target = std::sqrt(2.5);
    setup.norm_shift = std::sqrt(1.0 + 9.0 * kPi * kPi * kPi * kPi);
  }

  setup.d_ad = std::max(std::abs(-1.0), std::abs(1.0));  // u1 = 0, box [-1,1]
  setup.m_bound = compute_M_bound(cfg.a_min, cfg.lambda, setup.norm_y_target,
                                  setup.norm_shift, setup.d_ad);
  return setup;
}

PsgConfig build_psg_config(const ExperimentConfig& cfg, const ProblemSetup& setup,
                           StepRuleKind kind, int iterations) {
  PsgConfig pc;
  pc.lambda = cfg.lambda;
  pc.field = setup.field;
  pc.y_target = setup.y_target;
  pc.state_shift = setup.state_shift;
  pc.iterations = iterations;
  pc.alpha = cfg.alpha;
  pc.refine = cfg.refine;
  pc.initial_level = cfg.initial_level;
  pc.max_level = cfg.max_level;
  pc.schedule.c = cfg.c;
  pc.schedule.p = cfg.p_auto ? setup.field->schedule_exponent() : cfg.p;

  switch (kind) {
    case StepRuleKind::StronglyConvex: {
      double nu = cfg.nu_auto ? derive_nu(cfg.theta, cfg.bias_k, cfg.lambda)
                              : cfg.nu;
      pc.rule = StronglyConvexStep{cfg.theta, nu};
      break;
    }
    case StepRuleKind::Constant:
      pc.rule = ConstantAveragingStep{setup.d_ad, setup.m_bound, iterations};
      break;
    case StepRuleKind::Variable:
      pc.rule = VariableAveragingStep{cfg.theta, setup.d_ad, setup.m_bound};
      break;
  }
  return pc;
}

Estimate estimate_objective(const P0Function& u, const ProblemSetup& setup,
                            int m, RngStream& rng) {
  if (m < 1) throw std::invalid_argument("estimate_objective: m >= 1 required");
  double sum = 0.0, sumsq = 0.0;
  const ScalarField* shift = setup.state_shift ? &*setup.state_shift : nullptr;
  for (int i = 0; i < m; ++i) {
    FieldRealization xi = sample_realization(setup.field, rng);
    double v = objective_sample(u, xi, setup.lambda, setup.y_target, shift);
    sum += v;
    sumsq += v * v;
  }
  Estimate e;
  e.mean = sum / m;
  if (m > 1) {
    double var = (sumsq - sum * sum / m) / (m - 1);
    e.stderr_mean = std::sqrt(std::max(0.0, var) / m);
  }
  return e;
}

Estimate estimate_objective_diff(const P0Function& u_a, const P0Function& u_b,
                                 const ProblemSetup& setup, int m,
                                 RngStream& rng) {
  if (u_a.mesh() != u_b.mesh())
    throw std::invalid_argument("estimate_objective_diff: meshes differ");
  if (m < 1) throw std::invalid_argument("estimate_objective_diff: m >= 1");
  const auto& mesh = u_a.mesh();
  std::vector<double> rhs_a = load_from_p0(u_a);
  std::vector<double> rhs_b = load_from_p0(u_b);
  if (setup.state_shift) {
    std::vector<double> extra = load_from_function(mesh, *setup.state_shift);
    for (std::size_t i = 0; i < rhs_a.size(); ++i) {
      rhs_a[i] += extra[i];
      rhs_b[i] += extra[i];
    }
  }
  double cost_a = 0.5 * setup.lambda * l2_inner(u_a, u_a);
  double cost_b = 0.5 * setup.lambda * l2_inner(u_b, u_b);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < m; ++i) {
    FieldRealization xi = sample_realization(setup.field, rng);
    P0Function a_h = interpolate_coefficient(xi, mesh);
    SparseSystem sys = assemble_stiffness(a_h);
    P1Function ya = solve_spd(sys, rhs_a);
    P1Function yb = solve_spd(sys, rhs_b);
    double ja = 0.5 * integral_sq_diff(ya, setup.y_target) + cost_a;
    double jb = 0.5 * integral_sq_diff(yb, setup.y_target) + cost_b;
    double d = ja - jb;
    sum += d;
    sumsq += d * d;
  }
  Estimate e;
  e.mean = sum / m;
  if (m > 1) {
    double var = (sumsq - sum * sum / m) / (m - 1);
    e.stderr_mean = std::sqrt(std::max(0.0, var) / m);
  }
  return e;
}

void save_reference(const std::string& dir, const P0Function& u) {
  ensure_dir(dir);
  {
    std::ofstream out(dir + "/mesh.txt");
    if (!out) throw std::runtime_error("cannot write " + dir + "/mesh.txt");
    u.mesh()->dump(out);
  }
  write_p0_values(dir + "/u_ref.txt", u);
  {
    std::ofstream out(dir + "/meta.txt");
    out << "level " << u.mesh()->level() << "\n";
  }
}

Reference load_reference(const std::string& dir) {
  std::ifstream meta(dir + "/meta.txt");
  if (!meta)
    throw std::runtime_error("missing reference: cannot open " + dir +
                             "/meta.txt");
  std::string key;
  int level = -1;
  meta >> key >> level;
  if (key != "level" || level < 0)
    throw std::runtime_error("malformed reference meta in " + dir);

  Reference ref;
  ref.level = level;
  ref.chain.push_back(TriMesh::unit_square_initial());
  for (int k = 0; k < level; ++k)
    ref.chain.push_back(refine_uniform(ref.chain.back()));

  // The stored dump must match the deterministic rebuild exactly.
  std::ifstream mesh_in(dir + "/mesh.txt");
  if (!mesh_in)
    throw std::runtime_error("missing reference: cannot open " + dir +
                             "/mesh.txt");
  std::stringstream stored;
  stored << mesh_in.rdbuf();
  if (stored.str() != mesh_dump_string(*ref.chain.back()))
    throw std::runtime_error("reference mesh in " + dir +
                             " does not match the canonical level-" +
                             std::to_string(level) + " mesh");

  std::vector<double> values = read_p0_values(dir + "/u_ref.txt");
  if (static_cast<int>(values.size()) != ref.chain.back()->triangle_count())
    throw std::runtime_error("reference control size mismatch in " + dir);
  ref.u = P0Function(ref.chain.back(), std::move(values));
  return ref;
}

P0Function prolong_to_reference(const P0Function& u, const Reference& ref) {
  int level = u.mesh()->level();
  if (level > ref.level)
    throw std::runtime_error(
        "prolong_to_reference: run mesh is finer than the reference mesh");
  if (mesh_dump_string(*u.mesh()) != mesh_dump_string(*ref.chain[level]))
    throw std::runtime_error(
        "prolong_to_reference: run mesh is not an ancestor of the reference");
  P0Function on_chain(ref.chain[level], u.values());
  return prolong_p0(on_chain, ref.chain.back());
}

namespace {

StepRuleKind config_rule(const ExperimentConfig& cfg) { return cfg.rule; }

void write_trace(const std::string& dir, const RunRecord& rec) {
  CsvFile trace(dir + "/trace.csv", "n,t_n,h_n,refined,triangles");
  CsvFile times(dir + "/timings.csv", "n,wall_s");
  for (const auto& r : rec.rows) {
    trace.row({cell(r.n), cell(r.t_n), cell(r.h_n), cell(r.refined),
               cell(r.triangles)});
    times.row({cell(r.n), cell(r.wall_s)});
  }
}

void write_run_outputs(const std::string& dir, const ExperimentConfig& cfg,
                       const RunRecord& rec) {
  ensure_dir(dir);
  write_trace(dir, rec);
  {
    std::ofstream out(dir + "/final.mesh.txt");
    rec.final_u.mesh()->dump(out);
  }
  write_p0_values(dir + "/final_u.txt", rec.final_u);
  write_p0_values(dir + "/averaged_u.txt", rec.averaged_u);
  {
    std::ofstream out(dir + "/config_echo.cfg");
    cfg.emit(out);
  }
}

}  // namespace

int run_fem_convergence(const ExperimentConfig& cfg, const std::string& dir) {
  ensure_dir(dir);
  // Manufactured solution: a = 1, forcing 2 pi^2 sin(pi x) sin(pi y),
  // exact state sin(pi x) sin(pi y).
  auto unit = piecewise_two_block(1.0, 1.0, 1.0, 1.0);
  FieldRealization one{unit, {1.0, 1.0}};
  ScalarField forcing = [](double x, double y) {
    return 2.0 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y);
  };
  ScalarField exact = [](double x, double y) {
    return std::sin(kPi * x) * std::sin(kPi * y);
  };

  CsvFile csv(dir + "/fem_convergence.csv", "level,h,l2_error");
  auto mesh = TriMesh::unit_square_initial();
  for (int k = 0; k < std::max(0, cfg.initial_level); ++k)
    mesh = refine_uniform(mesh);
  std::vector<std::pair<double, double>> series;
  int levels = std::max(2, cfg.iterations);  // data points in the study
  for (int k = 0; k < levels; ++k) {
    P0Function zero(mesh, 0.0);
    StateSolution s = solve_state(one, zero, &forcing);
    double err = std::sqrt(integral_sq_diff(s.y, exact));
    csv.row({cell(mesh->level()), cell(mesh->h_max()), cell(err)});
    series.push_back({mesh->h_max(), err});
    if (k + 1 < levels) mesh = refine_uniform(mesh);
  }
  SlopeFit fit = fit_loglog_slope(series);
  CsvFile slopes(dir + "/slopes.csv", "quantity,slope,stderr");
  slopes.row({"l2_error_vs_h", cell(fit.slope), cell(fit.stderr_slope)});
  return 0;
}

int run_sc(const ExperimentConfig& cfg, const std::string& dir) {
  ensure_dir(dir);
  ProblemSetup setup = build_problem(cfg);
  PsgConfig pc = build_psg_config(cfg, setup, config_rule(cfg), cfg.iterations);

  std::vector<int> cps = checkpoint_list(cfg.iterations, cfg.checkpoints);
  CsvFile jhat(dir + "/jhat.csv", "n,jhat,stderr");

  auto mesh = TriMesh::unit_square_initial();
  for (int k = 0; k < pc.initial_level; ++k) mesh = refine_uniform(mesh);
  PsgState state = psg_init(pc, mesh, cfg.seed, kStreamRunBase);
  RunRecord rec;
  std::size_t next_cp = 0;
  for (int n = 1; n <= cfg.iterations; ++n) {
    psg_step(state, pc, &rec);
    bool at_cp = next_cp < cps.size() && cps[next_cp] == n;
    if (at_cp || n == cfg.iterations) {
      RngStream rng(cfg.seed, kStreamJhatBase + n);
      Estimate e = estimate_objective(state.u, setup, cfg.samples, rng);
      jhat.row({cell(n), cell(e.mean), cell(e.stderr_mean)});
      if (at_cp) ++next_cp;
    }
  }
  rec.final_u = state.u;
  rec.averaged_u = state.weight_sum > 0.0 ? state.average : state.u;
  write_run_outputs(dir, cfg, rec);
  return 0;
}

int run_ref_solution(const ExperimentConfig& cfg, const std::string& dir) {
  ensure_dir(dir);
  ProblemSetup setup = build_problem(cfg);
  PsgConfig pc = build_psg_config(cfg, setup, config_rule(cfg), cfg.iterations);
  RunRecord rec = run_psg(pc, cfg.seed, kStreamRunBase);
  write_run_outputs(dir, cfg, rec);
  const P0Function& canonical =
      cfg.variant == ProblemVariant::ConvexAveraging ? rec.averaged_u
                                                     : rec.final_u;
  save_reference(dir, canonical);
  RngStream rng(cfg.seed, kStreamJhatBase);
  Estimate e = estimate_objective(canonical, setup, cfg.samples, rng);
  CsvFile jhat(dir + "/jhat.csv", "n,jhat,stderr");
  jhat.row({cell(cfg.iterations), cell(e.mean), cell(e.stderr_mean)});
  return 0;
}

int run_sc_ensemble(const ExperimentConfig& cfg, const std::string& dir) {
  ensure_dir(dir);
  if (cfg.reference_path.empty())
    throw std::runtime_error("sc-ensemble requires [reference] path");
  Reference ref = load_reference(cfg.reference_path);
  ProblemSetup setup = build_problem(cfg);
  PsgConfig pc = build_psg_config(cfg, setup, config_rule(cfg), cfg.iterations);
  const int num_seeds = std::max(1, cfg.seeds);
  const int n_total = cfg.iterations;
  std::vector<int> cps = checkpoint_list(n_total, cfg.checkpoints > 0 ? cfg.checkpoints : 20);

  const auto& ref_mesh = ref.chain.back();
  std::vector<std::vector<double>> err(num_seeds, std::vector<double>(n_total));
  // prolonged checkpoint controls per seed
  std::vector<std::vector<P0Function>> cp_controls(num_seeds);

  double nu = 0.0;
  if (const auto* sc = std::get_if<StronglyConvexStep>(&pc.rule)) nu = sc->nu;

  for (int s = 0; s < num_seeds; ++s) {
    auto mesh = TriMesh::unit_square_initial();
    for (int k = 0; k < pc.initial_level; ++k) mesh = refine_uniform(mesh);
    PsgState state = psg_init(pc, mesh, cfg.seed, kStreamRunBase + s);
    std::size_t next_cp = 0;
    for (int n = 1; n <= n_total; ++n) {
      psg_step(state, pc, nullptr);
      P0Function on_ref = prolong_to_reference(state.u, ref);
      double e2 = 0.0;
      for (int t = 0; t < on_ref.size(); ++t) {
        double d = on_ref[t] - ref.u[t];
        e2 += d * d * ref_mesh->area(t);
      }
      err[s][n - 1] = std::sqrt(e2);
      if (next_cp < cps.size() && cps[next_cp] == n) {
        cp_controls[s].push_back(on_ref);
        ++next_cp;
      }
    }
  }

  CsvFile errors(dir + "/errors.csv", "n,n_plus_nu,mean_err");
  std::vector<std::pair<double, double>> err_series;
  for (int n = 1; n <= n_total; ++n) {
    double m = 0.0;
    for (int s = 0; s < num_seeds; ++s) m += err[s][n - 1];
    m /= num_seeds;
    errors.row({cell(n), cell(n + nu), cell(m)});
    err_series.push_back({n + nu, m});
  }

  // Common-random-number objective gaps at the checkpoints.
  std::vector<std::vector<double>> jd(num_seeds,
                                      std::vector<double>(cps.size(), 0.0));
  {
    RngStream rng(cfg.seed, kStreamCrn);
    std::vector<double> rhs_ref = load_from_p0(ref.u);
    std::vector<double> shift_load;
    if (setup.state_shift)
      shift_load = load_from_function(ref_mesh, *setup.state_shift);
    double cost_ref = 0.5 * setup.lambda * l2_inner(ref.u, ref.u);
    for (int i = 0; i < cfg.samples; ++i) {
      FieldRealization xi = sample_realization(setup.field, rng);
      P0Function a_h = interpolate_coefficient(xi, ref_mesh);
      SparseSystem sys = assemble_stiffness(a_h);
      std::vector<double> rhs = rhs_ref;
      if (!shift_load.empty())
        for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += shift_load[k];
      P1Function y_ref = solve_spd(sys, rhs);
      double j_ref = 0.5 * integral_sq_diff(y_ref, setup.y_target) + cost_ref;
      for (int s = 0; s < num_seeds; ++s) {
        for (std::size_t ci = 0; ci < cps.size(); ++ci) {
          const P0Function& u = cp_controls[s][ci];
          std::vector<double> rhs_u = load_from_p0(u);
          if (!shift_load.empty())
            for (std::size_t k = 0; k < rhs_u.size(); ++k)
              rhs_u[k] += shift_load[k];
          P1Function y = solve_spd(sys, rhs_u);
          double j = 0.5 * integral_sq_diff(y, setup.y_target) +
                     0.5 * setup.lambda * l2_inner(u, u);
          jd[s][ci] += j - j_ref;
        }
      }
    }
  }
  CsvFile jdiff(dir + "/jdiff.csv", "n,n_plus_nu,mean_jdiff");
  std::vector<std::pair<double, double>> jd_series;
  for (std::size_t ci = 0; ci < cps.size(); ++ci) {
    double m = 0.0;
    for (int s = 0; s < num_seeds; ++s) m += jd[s][ci] / cfg.samples;
    m /= num_seeds;
    jdiff.row({cell(cps[ci]), cell(cps[ci] + nu), cell(std::abs(m))});
    jd_series.push_back({cps[ci] + nu, std::abs(m)});
  }

  CsvFile slopes(dir + "/slopes.csv", "quantity,slope,stderr,skip_fraction");
  SlopeFit fe = fit_loglog_slope(err_series, 0.2);
  slopes.row({"iterate_error", cell(fe.slope), cell(fe.stderr_slope), cell(0.2)});
  SlopeFit fj = fit_loglog_slope(jd_series, 0.2);
  slopes.row({"objective_error", cell(fj.slope), cell(fj.stderr_slope), cell(0.2)});
  {
    std::ofstream out(dir + "/config_echo.cfg");
    cfg.emit(out);
  }
  return 0;
}

int run_avg_sweep(const ExperimentConfig& cfg, const std::string& dir) {
  ensure_dir(dir);
  ProblemSetup setup = build_problem(cfg);
  std::optional<Reference> ref;
  if (!cfg.reference_path.empty()) ref = load_reference(cfg.reference_path);

  std::vector<int> sweep = cfg.iterations_list;
  if (sweep.empty())
    throw std::runtime_error("avg-sweep requires [sweep] iterations_list");
  std::vector<StepRuleKind> rules;
  if (cfg.rule_constant) rules.push_back(StepRuleKind::Constant);
  if (cfg.rule_variable) rules.push_back(StepRuleKind::Variable);
  if (rules.empty()) throw std::runtime_error("avg-sweep: no rules enabled");
  const int num_seeds = std::max(1, cfg.seeds);

  CsvFile sweep_csv(dir + "/sweep.csv",
                    "N,rule,seed,jhat,stderr,jdiff,jdiff_stderr,h_final");
  CsvFile times(dir + "/timings.csv", "N,rule,seed,wall_s");
  CsvFile mean_csv(dir + "/sweep_mean.csv", "N,rule,mean_jdiff");
  CsvFile slopes(dir + "/slopes.csv", "quantity,slope,stderr,skip_fraction");

  for (StepRuleKind kind : rules) {
    const std::string rule_name =
        kind == StepRuleKind::Constant ? "constant" : "variable";
    std::vector<std::pair<double, double>> series;
    for (int n_iters : sweep) {
      PsgConfig pc = build_psg_config(cfg, setup, kind, n_iters);
      double mean_jdiff = 0.0;
      for (int s = 0; s < num_seeds; ++s) {
        auto t0 = std::chrono::steady_clock::now();
        RunRecord rec = run_psg(pc, cfg.seed, kStreamRunBase + s);
        RngStream rng_j(cfg.seed, kStreamJhatBase + n_iters * 100 + s);
        Estimate e = estimate_objective(rec.averaged_u, setup, cfg.samples, rng_j);
        Estimate d;
        if (ref) {
          P0Function on_ref = prolong_to_reference(rec.averaged_u, *ref);
          RngStream rng_d(cfg.seed, kStreamCrn);
          d = estimate_objective_diff(on_ref, ref->u, setup, cfg.samples, rng_d);
          mean_jdiff += d.mean;
        }
        double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        sweep_csv.row({cell(n_iters), rule_name, cell(s), cell(e.mean),
                       cell(e.stderr_mean), cell(d.mean), cell(d.stderr_mean),
                       cell(rec.rows.back().h_n)});
        times.row({cell(n_iters), rule_name, cell(s), cell(wall)});
      }
      if (ref) {
        mean_jdiff /= num_seeds;
        mean_csv.row({cell(n_iters), rule_name, cell(mean_jdiff)});
        series.push_back({static_cast<double>(n_iters), std::abs(mean_jdiff)});
      }
    }
    if (ref && series.size() >= 3) {
      SlopeFit fit = fit_loglog_slope(series);
      slopes.row({rule_name + "_jdiff", cell(fit.slope), cell(fit.stderr_slope),
                  cell(0.0)});
    }
  }
  {
    std::ofstream out(dir + "/config_echo.cfg");
    cfg.emit(out);
  }
  return 0;
}

int run_compare(const ExperimentConfig& cfg, const std::string& dir) {
  ensure_dir(dir);
  if (cfg.reference_path.empty())
    throw std::runtime_error("compare requires [reference] path");
  if (cfg.compare_run.empty())
    throw std::runtime_error("compare requires [compare] run");
  Reference ref = load_reference(cfg.reference_path);

  ExperimentConfig run_cfg =
      ExperimentConfig::parse_file(cfg.compare_run + "/config_echo.cfg");
  ProblemSetup setup = build_problem(run_cfg);
  bool averaged = run_cfg.variant == ProblemVariant::ConvexAveraging;
  std::vector<double> values = read_p0_values(
      cfg.compare_run + (averaged ? "/averaged_u.txt" : "/final_u.txt"));

  // Rebuild the run's final mesh level from the stored dump.
  std::ifstream mesh_in(cfg.compare_run + "/final.mesh.txt");
  if (!mesh_in)
    throw std::runtime_error("compare: missing " + cfg.compare_run +
                             "/final.mesh.txt");
  std::stringstream stored;
  stored << mesh_in.rdbuf();
  int level = -1;
  for (int k = 0; k <= ref.level; ++k) {
    if (stored.str() == mesh_dump_string(*ref.chain[k])) {
      level = k;
      break;
    }
  }
  if (level < 0)
    throw std::runtime_error(
        "compare: run mesh is not an ancestor of the reference mesh");
  P0Function u(ref.chain[level], std::move(values));
  P0Function on_ref = prolong_p0(u, ref.chain.back());

  double e2 = 0.0;
  for (int t = 0; t < on_ref.size(); ++t) {
    double dv = on_ref[t] - ref.u[t];
    e2 += dv * dv * ref.chain.back()->area(t);
  }
  RngStream rng(cfg.seed, kStreamCrn);
  Estimate d = estimate_objective_diff(on_ref, ref.u, setup, cfg.samples, rng);

  CsvFile out(dir + "/compare.csv", "u_l2_error,jdiff,jdiff_stderr,samples");
  out.row({cell(std::sqrt(e2)), cell(d.mean), cell(d.stderr_mean),
           cell(cfg.samples)});
  return 0;
}

int run_theory(const ExperimentConfig& cfg, const std::string& dir) {
  (void)cfg;
  ensure_dir(dir);
  // Worst-case recursion trace against its rate bound.
  RecursionParams demo{1.0, 1.4, 7.0, 129.5, 17.0};
  auto seq = recursion_iterate(demo, 10000);
  double r = rho(1.0, 0.2, 3.5, 17.0, 1.0, 10.0);
  CsvFile rec_csv(dir + "/theory_recursion.csv", "n,e_sq,bound");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    int n = static_cast<int>(i) + 1;
    rec_csv.row({cell(n), cell(seq[i]), cell(r / (n + demo.nu))});
  }
  // rho over an (M, K) grid at fixed nu = 17 (the denominator stays negative
  // for K <= 1 there).
  CsvFile rho_csv(dir + "/theory_rho.csv", "M,K,rho");
  for (double M : {0.0, 1.0, 10.0, 100.0})
    for (double K : {0.0, 0.25, 0.5, 1.0})
      rho_csv.row({cell(M), cell(K), cell(rho(1.0, 0.2, 3.5, 17.0, K, M))});
  // slope-fit self checks on exact power laws
  CsvFile slope_csv(dir + "/theory_slopes.csv", "series,slope,stderr");
  std::vector<std::pair<double, double>> inv_n, inv_sqrt;
  for (int n = 1; n <= 100; ++n) {
    inv_n.push_back({n, 1.0 / n});
    inv_sqrt.push_back({n, 1.0 / std::sqrt(static_cast<double>(n))});
  }
  SlopeFit f1 = fit_loglog_slope(inv_n);
  SlopeFit f2 = fit_loglog_slope(inv_sqrt);
  slope_csv.row({"inv_n", cell(f1.slope), cell(f1.stderr_slope)});
  slope_csv.row({"inv_sqrt_n", cell(f2.slope), cell(f2.stderr_slope)});
  return 0;
}

}  // namespace pdesgd

#include "pdesgd/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdesgd {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSqrt3 = 1.732050807568877293527446341505872367;

double sep_exp_odd_residual(double inv_l, double w) {
  return inv_l - w * std::tan(0.5 * w);
}

double sep_exp_even_residual(double inv_l, double w) {
  return inv_l * std::tan(0.5 * w) + w;
}

// Bisection + Newton polish inside a bracket where the residual changes
// sign. The residuals are monotone between consecutive tangent poles.
template <class F, class DF>
double refine_root(F f, DF df, double lo, double hi) {
  double flo = f(lo);
  double fhi = f(hi);
  if (!(flo * fhi < 0.0))
    throw std::runtime_error("separable_exp_roots: bracketing failed");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) { lo = hi = mid; break; }
    if (flo * fm < 0.0) { hi = mid; fhi = fm; } else { lo = mid; flo = fm; }
    if (hi - lo < 1e-13 * hi) break;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    double d = df(x);
    if (d == 0.0) break;
    double step = f(x) / d;
    double next = x - step;
    if (next <= lo || next >= hi) break;
    x = next;
    if (std::abs(step) < 1e-15 * x) break;
  }
  return x;
}

}  // namespace

std::vector<double> separable_exp_roots(double l, int count_per_family) {
  if (l <= 0.0) throw std::invalid_argument("separable_exp_roots: l <= 0");
  const double inv_l = 1.0 / l;
  std::vector<double> out;
  out.reserve(2 * count_per_family);
  for (int j = 1; j <= count_per_family; ++j) {
    // hat_j in (2(j-1) pi, (2j-1) pi): tan(w/2) positive branch
    {
      double lo = 2.0 * (j - 1) * kPi + 1e-9;
      double hi = (2.0 * j - 1.0) * kPi - 1e-9;
      auto f = [inv_l](double w) { return sep_exp_odd_residual(inv_l, w); };
      auto df = [](double w) {
        double t = std::tan(0.5 * w);
        return -t - 0.5 * w * (1.0 + t * t);
      };
      out.push_back(refine_root(f, df, lo, hi));
    }
    // tilde_j in ((2j-1) pi, 2j pi): tan(w/2) negative branch
    {
      double lo = (2.0 * j - 1.0) * kPi + 1e-9;
      double hi = 2.0 * j * kPi - 1e-9;
      auto f = [inv_l](double w) { return sep_exp_even_residual(inv_l, w); };
      auto df = [inv_l](double w) {
        double t = std::tan(0.5 * w);
        return 0.5 * inv_l * (1.0 + t * t) + 1.0;
      };
      out.push_back(refine_root(f, df, lo, hi));
    }
  }
  // interleaved output is hat_1, tilde_1, hat_2, tilde_2, ...
  std::vector<double> interleaved(out.size());
  for (int j = 0; j < count_per_family; ++j) {
    interleaved[2 * j] = out[2 * j];
    interleaved[2 * j + 1] = out[2 * j + 1];
  }
  return interleaved;
}

namespace {

std::vector<SeparableMode1D> separable_modes_1d(double l, int count) {
  auto roots = separable_exp_roots(l, (count + 1) / 2 + 1);
  std::vector<SeparableMode1D> modes(count);
  for (int i = 1; i <= count; ++i) {
    double w = roots[i - 1];
    SeparableMode1D m;
    m.omega = w;
    m.lambda = (2.0 / l) / (w * w + 1.0 / (l * l));
    m.is_sin = (i % 2 == 0);
    double half = m.is_sin ? 0.5 - std::sin(w) / (2.0 * w)
                           : 0.5 + std::sin(w) / (2.0 * w);
    m.normalizer = 1.0 / std::sqrt(half);
    modes[i - 1] = m;
  }
  return modes;
}

}  // namespace

double FieldSpec::schedule_exponent() const {
  return std::min({2.0 * sobolev_s, holder_t, 1.0});
}

double FieldSpec::evaluate(const std::vector<double>& xi, double x,
                           double y) const {
  if (static_cast<int>(xi.size()) != m)
    throw std::invalid_argument("FieldSpec::evaluate: xi size != m");
  switch (family) {
    case FieldFamily::Cosine: {
      double a = a0;
      for (int i = 0; i < m; ++i) {
        const EigenPair& e = modes[i];
        a += std::sqrt(e.lambda) * 2.0 * std::cos(e.j * kPi * y) *
             std::cos(e.k * kPi * x) * xi[i];
      }
      return a;
    }
    case FieldFamily::LogNormal: {
      const double xs = x - 0.5;
      const double ys = y - 0.5;
      double s = a0;
      for (int i = 0; i < m; ++i) {
        const EigenPair& e = modes[i];
        const SeparableMode1D& mx = modes1d_x[e.j];
        const SeparableMode1D& my = modes1d_y[e.k];
        double fx = mx.normalizer *
                    (mx.is_sin ? std::sin(mx.omega * xs) : std::cos(mx.omega * xs));
        double fy = my.normalizer *
                    (my.is_sin ? std::sin(my.omega * ys) : std::cos(my.omega * ys));
        s += std::sqrt(e.lambda) * fx * fy * xi[i];
      }
      return std::exp(s);
    }
    case FieldFamily::Piecewise:
      return y > 0.5 ? xi[0] : xi[1];
  }
  throw std::logic_error("FieldSpec::evaluate: unknown family");
}

std::shared_ptr<const FieldSpec> kl_cosine(int m, double l, double a0) {
  if (m < 1) throw std::invalid_argument("kl_cosine: m < 1");
  if (l <= 0.0) throw std::invalid_argument("kl_cosine: l <= 0");
  auto spec = std::make_shared<FieldSpec>();
  spec->family = FieldFamily::Cosine;
  spec->a0 = a0;
  spec->m = m;
  // Enumerate enough (j,k) pairs that the smallest kept eigenvalue is safely
  // inside the enumeration square.
  int range = 2;
  while (range * range < 4 * m + 16) ++range;
  std::vector<EigenPair> all;
  for (int j = 1; j <= range; ++j)
    for (int k = 1; k <= range; ++k)
      all.push_back({0.25 * std::exp(-kPi * (j * j + k * k) * l * l), j, k});
  std::stable_sort(all.begin(), all.end(), [](const EigenPair& a, const EigenPair& b) {
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    if (a.j != b.j) return a.j < b.j;
    return a.k < b.k;
  });
  all.resize(m);
  spec->modes = std::move(all);
  double sum_sqrt = 0.0;
  for (const auto& e : spec->modes) sum_sqrt += std::sqrt(e.lambda);
  spec->a_min = a0 - 2.0 * kSqrt3 * sum_sqrt;
  spec->a_max = a0 + 2.0 * kSqrt3 * sum_sqrt;
  if (spec->a_min <= 0.0)
    throw std::invalid_argument("kl_cosine: declared a_min not positive");
  spec->sobolev_s = 1.0;
  spec->holder_t = 1.0;
  return spec;
}

std::shared_ptr<const FieldSpec> kl_lognormal(int m, double l1, double l2,
                                              double a0, double sigma,
                                              double trunc,
                                              double a_min_declared,
                                              double a_max_declared) {
  if (m < 1) throw std::invalid_argument("kl_lognormal: m < 1");
  if (l1 <= 0.0 || l2 <= 0.0)
    throw std::invalid_argument("kl_lognormal: correlation length <= 0");
  auto spec = std::make_shared<FieldSpec>();
  spec->family = FieldFamily::LogNormal;
  spec->a0 = a0;
  spec->m = m;
  spec->sigma = sigma;
  spec->trunc = trunc;
  int per_dim = 2;
  while (per_dim * per_dim < 4 * m + 16) ++per_dim;
  spec->modes1d_x = separable_modes_1d(l1, per_dim);
  spec->modes1d_y = separable_modes_1d(l2, per_dim);
  std::vector<EigenPair> prods;
  for (int i = 0; i < per_dim; ++i)
    for (int k = 0; k < per_dim; ++k)
      prods.push_back(
          {spec->modes1d_x[i].lambda * spec->modes1d_y[k].lambda, i, k});
  std::stable_sort(prods.begin(), prods.end(),
                   [](const EigenPair& a, const EigenPair& b) {
                     if (a.lambda != b.lambda) return a.lambda > b.lambda;
                     if (a.j != b.j) return a.j < b.j;
                     return a.k < b.k;
                   });
  prods.resize(m);
  spec->modes = std::move(prods);
  spec->a_min = a_min_declared;
  spec->a_max = a_max_declared;
  spec->sobolev_s = 0.5;
  spec->holder_t = 0.5;
  return spec;
}

std::shared_ptr<const FieldSpec> piecewise_two_block(double upper_lo,
                                                     double upper_hi,
                                                     double lower_lo,
                                                     double lower_hi) {
  if (upper_lo <= 0.0 || lower_lo <= 0.0)
    throw std::invalid_argument("piecewise_two_block: lower bounds must be positive");
  if (upper_hi < upper_lo || lower_hi < lower_lo)
    throw std::invalid_argument("piecewise_two_block: empty interval");
  auto spec = std::make_shared<FieldSpec>();
  spec->family = FieldFamily::Piecewise;
  spec->m = 2;
  spec->upper_lo = upper_lo;
  spec->upper_hi = upper_hi;
  spec->lower_lo = lower_lo;
  spec->lower_hi = lower_hi;
  spec->a_min = std::min(upper_lo, lower_lo);
  spec->a_max = std::max(upper_hi, lower_hi);
  spec->sobolev_s = 1.0;
  spec->holder_t = 1.0;
  return spec;
}

FieldRealization sample_realization(std::shared_ptr<const FieldSpec> spec,
                                    RngStream& rng) {
  FieldRealization r;
  r.xi.resize(spec->m);
  switch (spec->family) {
    case FieldFamily::Cosine:
      for (auto& x : r.xi) x = rng.uniform(-kSqrt3, kSqrt3);
      break;
    case FieldFamily::LogNormal:
      for (auto& x : r.xi)
        x = rng.truncated_normal(0.0, spec->sigma, -spec->trunc, spec->trunc);
      break;
    case FieldFamily::Piecewise:
      r.xi[0] = rng.uniform(spec->upper_lo, spec->upper_hi);
      r.xi[1] = rng.uniform(spec->lower_lo, spec->lower_hi);
      break;
  }
  r.spec = std::move(spec);
  return r;
}

std::pair<double, double> empirical_bounds(
    const std::shared_ptr<const FieldSpec>& spec, int samples, int grid,
    RngStream& rng) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int s = 0; s < samples; ++s) {
    FieldRealization r = sample_realization(spec, rng);
    for (int i = 0; i <= grid; ++i) {
      for (int j = 0; j <= grid; ++j) {
        double v = r(static_cast<double>(i) / grid, static_cast<double>(j) / grid);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  return {lo, hi};
}

}  // namespace pdesgd

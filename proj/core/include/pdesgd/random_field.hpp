#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "pdesgd/rng.hpp"

namespace pdesgd {

enum class FieldFamily {
  Cosine,     // a0 + truncated cosine KL sum, uniform noise
  LogNormal,  // exp(a0 + separable-exponential KL sum), truncated Gaussian noise
  Piecewise,  // two-block piecewise constant, independent uniform values
};

// One retained KL mode. For the cosine family (j, k) are the mode numbers;
// for the log-normal family (j, k) index the two 1D factor modes.
struct EigenPair {
  double lambda = 0.0;
  int j = 0;
  int k = 0;
};

// 1D factor mode of the separable-exponential covariance on [-1/2, 1/2]:
// normalizer * cos(omega x) for odd modes, normalizer * sin(omega x) for
// even modes, with omega the corresponding transcendental root.
struct SeparableMode1D {
  double lambda = 0.0;
  double omega = 0.0;
  double normalizer = 0.0;
  bool is_sin = false;
};

// Immutable description of a random-field family: the truncated expansion,
// the per-coordinate noise distribution, declared positivity bounds, and the
// regularity inputs (s, t) feeding the mesh schedule exponent min(2s, t, 1).
class FieldSpec {
 public:
  FieldFamily family = FieldFamily::Cosine;
  double a0 = 0.0;
  int m = 0;  // truncation count (= noise dimension)

  std::vector<EigenPair> modes;            // sorted by descending eigenvalue
  std::vector<SeparableMode1D> modes1d_x;  // log-normal only
  std::vector<SeparableMode1D> modes1d_y;  // log-normal only
  double sigma = 0.0;                      // log-normal noise std deviation
  double trunc = 0.0;                      // log-normal noise truncation bound

  // piecewise family: value intervals for the upper block y > 1/2 and the
  // lower block y < 1/2
  double upper_lo = 0.0, upper_hi = 0.0;
  double lower_lo = 0.0, lower_hi = 0.0;

  double a_min = 0.0;  // declared bounds per Design notes (analytic or recorded)
  double a_max = 0.0;
  double sobolev_s = 1.0;  // user-supplied regularity inputs
  double holder_t = 1.0;

  double schedule_exponent() const;  // min(2 s, t, 1)

  // Evaluate a(x, xi) for a noise vector xi of length m.
  double evaluate(const std::vector<double>& xi, double x, double y) const;
};

// xi |-> a(., xi): a field spec bound to one sampled noise vector.
struct FieldRealization {
  std::shared_ptr<const FieldSpec> spec;
  std::vector<double> xi;

  double operator()(double x, double y) const {
    return spec->evaluate(xi, x, y);
  }
};

// Cosine family: eigenvalues exp(-pi (j^2 + k^2) l^2) / 4 with
// eigenfunctions 2 cos(j pi y) cos(k pi x), coordinates uniform on
// (-sqrt3, sqrt3). Modes are enumerated over j, k >= 1, sorted by
// descending eigenvalue (ties by j then k) and truncated to m. Declared
// bounds are the analytic worst case a0 -+ 2 sqrt3 sum sqrt(lambda_i).
std::shared_ptr<const FieldSpec> kl_cosine(int m, double l, double a0);

// Positive roots of l^{-1} = omega tan(omega/2) (odd family, "hat") and of
// l^{-1} tan(omega/2) + omega = 0 (even family, "tilde"), interleaved as
// omega_1 = hat_1, omega_2 = tilde_1, omega_3 = hat_2, ... Each root is
// polished to residual <= 1e-12 of its defining equation.
std::vector<double> separable_exp_roots(double l, int count_per_family);

// Log-normal family on (0,1)^2 (eigenfunctions live on [-1/2,1/2]^2 and are
// evaluated at x - (1/2,1/2)): a = exp(a0 + sum sqrt(lambda_i) phi_i xi_i)
// with tensor-product eigenpairs of the separable exponential covariance and
// truncated Gaussian noise N(0, sigma, -trunc, trunc). `a_min_declared` /
// `a_max_declared` record certified empirical bounds (the analytic support
// bound is uselessly loose).
std::shared_ptr<const FieldSpec> kl_lognormal(int m, double l1, double l2,
                                              double a0, double sigma = 0.1,
                                              double trunc = 100.0,
                                              double a_min_declared = 0.0,
                                              double a_max_declared = 0.0);

// Piecewise two-block family: a = xi_1 on (0,1) x (1/2,1) and xi_2 on
// (0,1) x (0,1/2), with xi_i uniform on the given intervals.
std::shared_ptr<const FieldSpec> piecewise_two_block(double upper_lo,
                                                     double upper_hi,
                                                     double lower_lo,
                                                     double lower_hi);

// Draws the m noise coordinates from the spec's distribution.
FieldRealization sample_realization(std::shared_ptr<const FieldSpec> spec,
                                    RngStream& rng);

// Min/max of a over `samples` realizations evaluated on a uniform
// (grid+1)^2 point lattice. Used to certify Assumption-type bounds.
std::pair<double, double> empirical_bounds(
    const std::shared_ptr<const FieldSpec>& spec, int samples, int grid,
    RngStream& rng);

}  // namespace pdesgd

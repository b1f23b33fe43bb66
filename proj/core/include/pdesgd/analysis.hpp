#pragma once

#include <utility>
#include <vector>

namespace pdesgd {

// Parameters of the contraction recursion
//   e_{n+1}^2 = e_n^2 (1 - c1/(n+nu) + c2/(n+nu)^2) + c3/(n+nu)^2.
struct RecursionParams {
  double e1_sq = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double nu = 0.0;

  bool valid() const {
    return e1_sq >= 0.0 && c2 >= 0.0 && c3 >= 0.0 && c1 > 1.0 &&
           nu + 1.0 >= c2 / (c1 - 1.0);
  }
};

// Iterates the recursion with equality (the worst admissible case) and
// returns e_1^2 ... e_N^2.
std::vector<double> recursion_iterate(const RecursionParams& params, int n_terms);

// The rate constant rho with the identification c1 = 2 mu theta,
// c2 = 2 theta K, c3 = theta^2 M + 2 theta K:
//   rho = max{ (1+nu) e1^2, -c3 (1+nu) / ((1+nu)(1 - c1) + c2) }.
// Requires 2 mu theta > 1 and a strictly negative denominator.
double rho(double e1_sq, double mu, double theta, double nu, double K, double M);

struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
};

// Least-squares slope of log(value) against log(n) over the tail of the
// series: the first `skip_fraction` of the points is excluded (transients
// and refinement jumps). Throws on non-positive values inside the window or
// fewer than 3 usable points.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& series,
                          double skip_fraction = 0.0);

}  // namespace pdesgd

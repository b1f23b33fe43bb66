#include "pdesgd/analysis.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace pdesgd {

std::vector<double> recursion_iterate(const RecursionParams& p, int n_terms) {
  if (!p.valid())
    throw std::invalid_argument("recursion_iterate: invalid parameters");
  std::vector<double> e(n_terms);
  if (n_terms == 0) return e;
  e[0] = p.e1_sq;
  for (int n = 1; n < n_terms; ++n) {
    double hn = n + p.nu;  // previous index n, shifted by nu
    e[n] = e[n - 1] * (1.0 - p.c1 / hn + p.c2 / (hn * hn)) + p.c3 / (hn * hn);
  }
  return e;
}

double rho(double e1_sq, double mu, double theta, double nu, double K, double M) {
  if (2.0 * mu * theta <= 1.0)
    throw std::invalid_argument("rho: requires 2 mu theta > 1");
  double c1 = 2.0 * mu * theta;
  double c2 = 2.0 * theta * K;
  double c3 = theta * theta * M + 2.0 * theta * K;
  double denom = (1.0 + nu) * (1.0 - c1) + c2;
  // Strictly negative with a scale-relative margin: at nu equal to its lower
  // bound the two terms cancel only up to rounding.
  double scale = std::abs((1.0 + nu) * (1.0 - c1)) + c2 + 1.0;
  if (denom >= -1e-12 * scale)
    throw std::invalid_argument("rho: (1+nu)(1-2 mu theta) + 2 theta K must be negative");
  double first = (1.0 + nu) * e1_sq;
  double second = -c3 * (1.0 + nu) / denom;
  return first > second ? first : second;
}

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& series,
                          double skip_fraction) {
  std::size_t start = static_cast<std::size_t>(series.size() * skip_fraction);
  if (series.size() < start + 3)
    throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = series.size() - start;
  std::vector<std::pair<double, double>> logs;
  logs.reserve(n);
  for (std::size_t i = start; i < series.size(); ++i) {
    if (series[i].first <= 0.0 || series[i].second <= 0.0)
      throw std::invalid_argument("fit_loglog_slope: non-positive value in window");
    logs.push_back({std::log(series[i].first), std::log(series[i].second)});
  }
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw std::invalid_argument("fit_loglog_slope: degenerate abscissae");
  SlopeFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (const auto& [x, y] : logs) {
    double r = y - (fit.slope * x + intercept);
    ss += r * r;
  }
  if (n > 2) fit.stderr_slope = std::sqrt(ss / (n - 2) * n / denom);
  return fit;
}

}  // namespace pdesgd

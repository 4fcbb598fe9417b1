#ifndef SEQDES_CORE_GAIN_HPP
#define SEQDES_CORE_GAIN_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seqdes/core/glm.hpp"

namespace seqdes {

struct GainSample {
  double d0 = 0.0;
  long draws = 0;
  double mean_gain = 0.0;
  double std_error = 0.0;
  long degenerate = 0;  // draws whose gain was non-finite and counted as 0
  std::vector<std::pair<double, double>> percentiles;  // (p, value)
};

// Smooth approximation of the expected two-measurement information gain
// h(D0). The curve is a logistic base in log D0 plus a natural-cubic-spline
// correction, sampled onto a dense monotone table used for evaluation.
struct GainInterpolant {
  Link model = Link::cloglog;
  double d_star = 0.0;
  double eta = 0.0;
  double theta = 0.0;
  std::vector<double> knots;        // in log D0
  std::vector<double> spline_coef;  // one per nonlinear basis function
  double log_d_min = 0.0;
  double log_d_max = 0.0;
  std::vector<double> table_x;  // log D0, dense, strictly increasing
  std::vector<double> table_y;  // non-decreasing gains in (0, d_star)

  // clamps d0 to the fitted domain; result in (0, d_star)
  double eval(double d0) const;
};

// Monte-Carlo estimate of h(d0): draws (a_hat, b_hat) from the normal
// approximation around (1, 0) with covariance ((d0/d_star) J*)^{-1} and
// averages the two-point design gain at the implied canonical points.
// Draws are consumed in fixed-size blocks with per-block seeds, so the
// result is independent of execution order.
GainSample simulate_gain(Link link, double d0, long draws, std::uint64_t seed,
                         const std::vector<double>& percentile_probs = {});

// default grid: n log-spaced points on [lo, hi]
std::vector<double> log_spaced(double lo, double hi, int n);

GainInterpolant fit_gain(Link link, const std::vector<double>& grid, long draws,
                         std::uint64_t seed,
                         std::vector<GainSample>* samples_out = nullptr);

// natural cubic spline regression basis (nonlinear terms only), exposed for
// tests
std::vector<double> natural_spline_basis(double x, const std::vector<double>& knots);

void save_gain_json(const GainInterpolant& interp,
                    const std::vector<GainSample>& samples,
                    const std::string& path);
GainInterpolant load_gain_json(const std::string& path);

}  // namespace seqdes

#endif

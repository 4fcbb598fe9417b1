#include "seqdes/core/canonical.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace seqdes {

double two_point_d(Link link, double z1, double z2) {
  return std::sqrt(info_weight(link, z1) * info_weight(link, z2) *
                   (z1 - z2) * (z1 - z2));
}

namespace {

CanonicalDesign derive_impl(Link link) {
  // coarse grid, z1 < z2
  const double lo = -6.0, hi = 6.0, step = 0.01;
  double best1 = -1.0, best2 = 1.0, best = -1.0;
  const int npts = static_cast<int>(std::lround((hi - lo) / step)) + 1;
  for (int i = 0; i < npts; ++i) {
    const double z1 = lo + i * step;
    for (int j = i + 1; j < npts; ++j) {
      const double z2 = lo + j * step;
      const double v = two_point_d(link, z1, z2);
      if (v > best) {
        best = v;
        best1 = z1;
        best2 = z2;
      }
    }
  }

  // coordinate pattern search, shrink steps to 1e-8
  double h = step;
  int iters = 0;
  while (h > 1e-8) {
    bool improved = false;
    const std::array<std::array<double, 2>, 4> moves = {
        {{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}};
    for (const auto& m : moves) {
      const double c1 = best1 + m[0], c2 = best2 + m[1];
      if (c1 >= c2) continue;
      const double v = two_point_d(link, c1, c2);
      if (v > best) {
        best = v;
        best1 = c1;
        best2 = c2;
        improved = true;
      }
    }
    if (!improved) h *= 0.5;
    if (++iters > 100000)
      throw std::runtime_error("derive_canonical: refinement did not converge");
  }

  CanonicalDesign d;
  d.model = link;
  d.z1_star = best1;
  d.z2_star = best2;
  const DesignPoint pts[2] = {{best1, 1}, {best2, 1}};
  d.j_star = fisher_info(link, ModelParams{1.0, 0.0}, pts);
  d.d_star = d_criterion(d.j_star);
  return d;
}

}  // namespace

const CanonicalDesign& derive_canonical(Link link) {
  static std::once_flag flags[3];
  static CanonicalDesign cache[3];
  const int idx = static_cast<int>(link);
  std::call_once(flags[idx], [&] { cache[idx] = derive_impl(link); });
  return cache[idx];
}

std::pair<double, double> optimal_covariates(const CanonicalDesign& design,
                                             const ModelParams& params) {
  if (params.a == 0.0)
    throw std::invalid_argument("optimal_covariates: slope a must be nonzero");
  const double x1 = (design.z1_star - params.b) / params.a;
  const double x2 = (design.z2_star - params.b) / params.a;
  return x1 <= x2 ? std::make_pair(x1, x2) : std::make_pair(x2, x1);
}

}  // namespace seqdes

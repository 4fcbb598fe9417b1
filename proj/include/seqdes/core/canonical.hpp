#ifndef SEQDES_CORE_CANONICAL_HPP
#define SEQDES_CORE_CANONICAL_HPP

#include <utility>

#include "seqdes/core/glm.hpp"

namespace seqdes {

// canonical two-point D-optimal design on the z scale (a=1, b=0)
struct CanonicalDesign {
  Link model = Link::logit;
  double z1_star = 0.0;  // z1_star < z2_star
  double z2_star = 0.0;
  FisherInfo j_star;  // unit-weight info at the two canonical points
  double d_star = 0.0;
};

// sqrt(g(z1) g(z2) (z1-z2)^2), the D-value of a unit-weight two-point design
double two_point_d(Link link, double z1, double z2);

// Deterministic derivation: coarse 0.01 grid over [-6,6]^2 followed by
// pattern-search refinement down to 1e-8 steps. Results are cached per link.
const CanonicalDesign& derive_canonical(Link link);

// maps canonical points to covariate space: x = (z* - b) / a, returned with
// x1 < x2; throws on a == 0
std::pair<double, double> optimal_covariates(const CanonicalDesign& design,
                                             const ModelParams& params);

}  // namespace seqdes

#endif

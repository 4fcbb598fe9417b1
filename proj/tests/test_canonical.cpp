#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "seqdes/core/canonical.hpp"

using namespace seqdes;

TEST_CASE("canonical points match the tabulated designs") {
  const auto& lg = derive_canonical(Link::logit);
  CHECK(std::fabs(lg.z1_star + 1.543) < 0.005);
  CHECK(std::fabs(lg.z2_star - 1.543) < 0.005);

  const auto& pb = derive_canonical(Link::probit);
  CHECK(std::fabs(pb.z1_star + 1.138) < 0.005);
  CHECK(std::fabs(pb.z2_star - 1.138) < 0.005);

  const auto& cl = derive_canonical(Link::cloglog);
  CHECK(std::fabs(cl.z1_star + 1.338) < 0.005);
  CHECK(std::fabs(cl.z2_star - 0.980) < 0.005);
  CHECK(std::fabs(cl.d_star - 0.8094) < 0.001);
}

TEST_CASE("logit and probit canonical designs are symmetric") {
  for (Link link : {Link::logit, Link::probit}) {
    const auto& cd = derive_canonical(link);
    CHECK(std::fabs(cd.z1_star + cd.z2_star) < 1e-6);
  }
}

TEST_CASE("cdf values at the canonical points") {
  struct Row {
    Link link;
    double f1, f2;
  };
  const Row rows[] = {{Link::logit, 0.176, 0.824},
                      {Link::probit, 0.128, 0.872},
                      {Link::cloglog, 0.231, 0.930}};
  for (const auto& row : rows) {
    const auto& cd = derive_canonical(row.link);
    CHECK(std::fabs(response_prob(row.link, cd.z1_star) - row.f1) < 0.001);
    CHECK(std::fabs(response_prob(row.link, cd.z2_star) - row.f2) < 0.001);
  }
}

TEST_CASE("canonical points are local maxima") {
  for (Link link : {Link::logit, Link::probit, Link::cloglog}) {
    const auto& cd = derive_canonical(link);
    const double best = two_point_d(link, cd.z1_star, cd.z2_star);
    for (double eps : {0.01, -0.01}) {
      CHECK(two_point_d(link, cd.z1_star + eps, cd.z2_star) < best);
      CHECK(two_point_d(link, cd.z1_star, cd.z2_star + eps) < best);
    }
  }
}

TEST_CASE("d_star is d_criterion of the canonical information") {
  for (Link link : {Link::logit, Link::probit, Link::cloglog}) {
    const auto& cd = derive_canonical(link);
    CHECK(cd.d_star == d_criterion(cd.j_star));
  }
}

TEST_CASE("optimal_covariates maps canonical points to x") {
  const auto& cl = derive_canonical(Link::cloglog);

  auto [x1, x2] = optimal_covariates(cl, {1.0, 0.0});
  CHECK(x1 == doctest::Approx(cl.z1_star));
  CHECK(x2 == doctest::Approx(cl.z2_star));

  // switching-measurement scale
  auto [s1, s2] = optimal_covariates(cl, {0.380, -95.60});
  CHECK(std::fabs(s1 - 248.06) < 0.05);
  CHECK(std::fabs(s2 - 254.16) < 0.05);

  const auto& lg = derive_canonical(Link::logit);
  auto [l1, l2] = optimal_covariates(lg, {2.0, 1.0});
  CHECK(std::fabs(l1 + 1.2715) < 0.003);
  CHECK(std::fabs(l2 - 0.2715) < 0.003);

  // negative slope swaps the order
  auto [n1, n2] = optimal_covariates(cl, {-1.0, 0.0});
  CHECK(n1 < n2);
  CHECK(n1 == doctest::Approx(-cl.z2_star));

  CHECK_THROWS_AS(optimal_covariates(cl, {0.0, 1.0}), std::invalid_argument);
}

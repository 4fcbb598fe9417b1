#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "seqdes/core/canonical.hpp"
#include "seqdes/core/glm.hpp"
#include "seqdes/core/rng.hpp"

using namespace seqdes;

namespace {
const Link kAllLinks[] = {Link::logit, Link::probit, Link::cloglog};
}

TEST_CASE("response_prob matches the tabulated cdf values") {
  CHECK(response_prob(Link::logit, 0.0) == doctest::Approx(0.5));
  CHECK(response_prob(Link::logit, 1.543) == doctest::Approx(0.824).epsilon(0.0015));
  CHECK(std::fabs(response_prob(Link::probit, -1.138) - 0.128) < 0.001);
  CHECK(std::fabs(response_prob(Link::cloglog, 0.980) - 0.930) < 0.001);
}

TEST_CASE("response_prob is stable in both tails") {
  for (Link link : kAllLinks) {
    CHECK(response_prob(link, -1000.0) >= 0.0);
    CHECK(response_prob(link, -1000.0) < 1e-12);
    CHECK(response_prob(link, 1000.0) <= 1.0);
    CHECK(response_prob(link, 1000.0) > 1.0 - 1e-12);
    CHECK(std::isfinite(response_prob(link, 1000.0)));
  }
}

TEST_CASE("info_weight closed-form values") {
  CHECK(info_weight(Link::logit, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(info_weight(Link::probit, 0.0) ==
        doctest::Approx(2.0 / M_PI).epsilon(1e-12));
  // direct naive evaluation of the cloglog weight is exact at moderate z
  for (double z : {0.980, -1.338}) {
    const double naive = std::exp(2.0 * z) / (std::exp(std::exp(z)) - 1.0);
    CHECK(info_weight(Link::cloglog, z) ==
          doctest::Approx(naive).epsilon(1e-12));
  }
  CHECK(std::fabs(info_weight(Link::cloglog, 0.980) - 0.5314) < 1e-3);
  CHECK(std::fabs(info_weight(Link::cloglog, -1.338) - 0.2292) < 1e-3);
}

TEST_CASE("F is strictly increasing on a dense grid") {
  // ranges where F stays strictly inside (0, 1) in double precision
  const double lo[] = {-30.0, -7.0, -30.0};
  const double hi[] = {30.0, 7.0, 3.0};
  for (Link link : kAllLinks) {
    const int li = static_cast<int>(link);
    double prev = response_prob(link, lo[li]);
    for (int i = 1; i < 10000; ++i) {
      const double z = lo[li] + (hi[li] - lo[li]) * i / 9999.0;
      const double f = response_prob(link, z);
      CHECK(f > prev);
      CHECK(f > 0.0);
      CHECK(f < 1.0);
      prev = f;
    }
  }
}

TEST_CASE("g is positive and vanishes in the tails") {
  for (Link link : kAllLinks) {
    for (int i = 0; i < 10000; ++i) {
      const double z = -30.0 + 60.0 * i / 9999.0;
      if (link == Link::cloglog && z > 3.7) continue;
      CHECK(info_weight(link, z) > 0.0);
    }
  }
  CHECK(info_weight(Link::logit, -30.0) < 1e-6);
  CHECK(info_weight(Link::logit, 30.0) < 1e-6);
  CHECK(info_weight(Link::probit, -30.0) < 1e-6);
  CHECK(info_weight(Link::probit, 30.0) < 1e-6);
  // cloglog at its clamp bounds
  CHECK(info_weight(Link::cloglog, -700.0) < 1e-6);
  CHECK(info_weight(Link::cloglog, 3.7) < 1e-6);
  CHECK(info_weight(Link::cloglog, 100.0) < 1e-6);  // clamped, no overflow
}

TEST_CASE("fisher_info simple cases") {
  const DesignPoint origin[] = {{0.0, 1}};
  const FisherInfo j = fisher_info(Link::logit, {1.0, 0.0}, origin);
  CHECK(j.j11 == 0.0);
  CHECK(j.j12 == 0.0);
  CHECK(j.j22 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(d_criterion(j) == 0.0);

  const DesignPoint cll[] = {{-1.338, 1}, {0.980, 1}};
  CHECK(d_criterion(fisher_info(Link::cloglog, {1.0, 0.0}, cll)) ==
        doctest::Approx(0.8094).epsilon(0.002));

  const DesignPoint lg[] = {{-1.543, 1}, {1.543, 1}};
  // hand value: sqrt(g(-z)g(z)) * 2z for the symmetric logit design
  const double g = info_weight(Link::logit, 1.543);
  CHECK(d_criterion(fisher_info(Link::logit, {1.0, 0.0}, lg)) ==
        doctest::Approx(g * 2.0 * 1.543).epsilon(1e-12));
  CHECK(std::fabs(d_criterion(fisher_info(Link::logit, {1.0, 0.0}, lg)) -
                  0.4478) < 0.002);
}

TEST_CASE("fisher_info is additive over partitions") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DesignPoint> all;
    for (int i = 0; i < 12; ++i)
      all.push_back({4.0 * rng.uniform() - 2.0,
                     1 + static_cast<long>(rng.uniform() * 50)});
    for (Link link : kAllLinks) {
      const ModelParams p{1.0 + rng.uniform(), rng.uniform() - 0.5};
      const FisherInfo whole = fisher_info(link, p, all);
      const std::size_t cut = 1 + static_cast<std::size_t>(rng.uniform() * 10);
      const FisherInfo part =
          fisher_info(link, p, std::span(all).subspan(0, cut)) +
          fisher_info(link, p, std::span(all).subspan(cut));
      CHECK(part.j11 == doctest::Approx(whole.j11).epsilon(1e-12));
      CHECK(part.j12 == doctest::Approx(whole.j12).epsilon(1e-12));
      CHECK(part.j22 == doctest::Approx(whole.j22).epsilon(1e-12));
    }
  }
}

TEST_CASE("scale covariance of the D-criterion") {
  const std::vector<DesignPoint> base = {{-1.3, 3}, {0.4, 5}, {1.9, 2}};
  for (Link link : kAllLinks) {
    const ModelParams p{0.8, 0.2};
    const double d0 = d_criterion(fisher_info(link, p, base));
    for (double c : {0.5, 2.0, 10.0}) {
      std::vector<DesignPoint> scaled = base;
      for (auto& pt : scaled) pt.x *= c;
      const ModelParams ps{p.a / c, p.b};
      const double dc = d_criterion(fisher_info(link, ps, scaled));
      CHECK(dc == doctest::Approx(c * d0).epsilon(1e-10));
    }
  }
}

TEST_CASE("two-point design identity") {
  for (Link link : kAllLinks) {
    const auto& cd = derive_canonical(link);
    const DesignPoint pts[] = {{cd.z1_star, 1}, {cd.z2_star, 1}};
    const double via_matrix = d_criterion(fisher_info(link, {1.0, 0.0}, pts));
    const double direct = std::sqrt(info_weight(link, cd.z1_star) *
                                    info_weight(link, cd.z2_star) *
                                    (cd.z1_star - cd.z2_star) *
                                    (cd.z1_star - cd.z2_star));
    CHECK(via_matrix == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("d_criterion clamps tiny negative determinants and rejects big ones") {
  FisherInfo nearly{1.0, 1.0 + 1e-14, 1.0};
  CHECK(d_criterion(nearly) == 0.0);
  FisherInfo bad{1.0, 2.0, 1.0};
  CHECK_THROWS_AS(d_criterion(bad), std::invalid_argument);
  CHECK(d_criterion(FisherInfo{2.0, 0.0, 2.0}) == doctest::Approx(2.0));
}

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqdes/core/canonical.hpp"
#include "seqdes/core/gain.hpp"

using namespace seqdes;

namespace {
std::string temp_path(const char* name) {
  return std::string("seqdes_test_") + name;
}
}  // namespace

TEST_CASE("log_spaced endpoints and monotonicity") {
  const auto g = log_spaced(1.0, 1000.0, 10);
  REQUIRE(g.size() == 10);
  CHECK(g.front() == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(1000.0));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] > g[i - 1]);
    // constant ratio
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]).epsilon(1e-9));
  }
}

TEST_CASE("simulate_gain is deterministic and block-structured") {
  const GainSample a = simulate_gain(Link::cloglog, 54.05, 40000, 2024);
  const GainSample b = simulate_gain(Link::cloglog, 54.05, 40000, 2024);
  CHECK(a.mean_gain == b.mean_gain);
  CHECK(a.std_error == b.std_error);
  CHECK(a.degenerate == b.degenerate);
  const GainSample c = simulate_gain(Link::cloglog, 54.05, 40000, 2025);
  CHECK(a.mean_gain != c.mean_gain);
  CHECK(a.draws == 40000);
}

TEST_CASE("simulate_gain regression pin at the published starting point") {
  // frozen after first computation: cloglog, D0 = 54.05, 4e5 draws
  const GainSample s = simulate_gain(Link::cloglog, 54.05, 400000, 20260824);
  CHECK(s.mean_gain == doctest::Approx(0.809072892373).epsilon(1e-9));
  CHECK(s.degenerate == 0);
}

TEST_CASE("simulate_gain requires at least 1000 draws") {
  CHECK_THROWS_AS(simulate_gain(Link::logit, 10.0, 999, 1),
                  std::invalid_argument);
}

TEST_CASE("gain approaches the canonical value for large D0") {
  for (Link link : {Link::logit, Link::probit, Link::cloglog}) {
    const double d_star = derive_canonical(link).d_star;
    const GainSample s = simulate_gain(link, 1e6, 40000, 7);
    CHECK(std::fabs(s.mean_gain - d_star) < 0.002);
    CHECK(s.mean_gain < d_star);
  }
}

TEST_CASE("gain grows with D0 and stays below the asymptote") {
  for (Link link : {Link::logit, Link::probit, Link::cloglog}) {
    const double d_star = derive_canonical(link).d_star;
    double prev = 0.0;
    for (double d0 : {3.0, 30.0, 300.0, 3000.0}) {
      const GainSample s = simulate_gain(link, d0, 60000, 99);
      CHECK(s.mean_gain > 0.0);
      CHECK(s.mean_gain < d_star);
      CHECK(s.mean_gain > prev);
      prev = s.mean_gain;
    }
  }
}

TEST_CASE("percentile requests come back sorted with the sample") {
  const GainSample s =
      simulate_gain(Link::cloglog, 54.05, 20000, 5, {0.05, 0.5, 0.95});
  REQUIRE(s.percentiles.size() == 3);
  CHECK(s.percentiles[0].second <= s.percentiles[1].second);
  CHECK(s.percentiles[1].second <= s.percentiles[2].second);
  CHECK(s.percentiles[0].first == doctest::Approx(0.05));
}

TEST_CASE("natural_spline_basis is linear outside the boundary knots") {
  const std::vector<double> knots = {0.0, 1.0, 2.0, 3.0, 4.0};
  const std::size_t nbasis = natural_spline_basis(2.0, knots).size();
  CHECK(nbasis == knots.size() - 2);
  // beyond the last knot every basis function must be linear in x
  const auto f1 = natural_spline_basis(5.0, knots);
  const auto f2 = natural_spline_basis(6.0, knots);
  const auto f3 = natural_spline_basis(7.0, knots);
  for (std::size_t j = 0; j < nbasis; ++j) {
    CHECK(f3[j] - f2[j] == doctest::Approx(f2[j] - f1[j]).epsilon(1e-9));
  }
  const auto l1 = natural_spline_basis(-3.0, knots);
  const auto l2 = natural_spline_basis(-2.0, knots);
  const auto l3 = natural_spline_basis(-1.0, knots);
  for (std::size_t j = 0; j < nbasis; ++j) {
    CHECK(l3[j] - l2[j] == doctest::Approx(l2[j] - l1[j]).epsilon(1e-9));
  }
}

TEST_CASE("fit_gain produces a monotone curve that tracks the samples") {
  const auto grid = log_spaced(1.0, 1e5, 40);
  std::vector<GainSample> samples;
  const GainInterpolant interp =
      fit_gain(Link::cloglog, grid, 20000, 31415, &samples);
  REQUIRE(samples.size() == grid.size());
  CHECK(interp.d_star == doctest::Approx(0.8094).epsilon(0.002));

  // dense evaluation is non-decreasing and bounded
  double prev = 0.0;
  for (double d0 : log_spaced(1.0, 1e5, 400)) {
    const double h = interp.eval(d0);
    CHECK(h > 0.0);
    CHECK(h < interp.d_star);
    CHECK(h >= prev);
    prev = h;
  }

  // the fit stays near the Monte-Carlo points
  for (const auto& s : samples) {
    CHECK(std::fabs(interp.eval(s.d0) - s.mean_gain) < 0.02);
  }

  // clamped outside the fitted domain
  CHECK(interp.eval(1e-3) == doctest::Approx(interp.eval(1.0)));
  CHECK(interp.eval(1e9) == doctest::Approx(interp.eval(1e5)));
}

TEST_CASE("fit_gain is reproducible") {
  const auto grid = log_spaced(1.0, 1000.0, 20);
  const GainInterpolant a = fit_gain(Link::logit, grid, 5000, 8);
  const GainInterpolant b = fit_gain(Link::logit, grid, 5000, 8);
  REQUIRE(a.table_y.size() == b.table_y.size());
  for (std::size_t i = 0; i < a.table_y.size(); ++i)
    CHECK(a.table_y[i] == b.table_y[i]);
}

TEST_CASE("gain JSON round trip preserves the curve") {
  const auto grid = log_spaced(1.0, 1000.0, 20);
  std::vector<GainSample> samples;
  const GainInterpolant orig =
      fit_gain(Link::probit, grid, 5000, 17, &samples);
  const std::string path = temp_path("gain.json");
  save_gain_json(orig, samples, path);
  const GainInterpolant back = load_gain_json(path);
  CHECK(back.model == orig.model);
  CHECK(back.d_star == orig.d_star);
  for (double d0 : {1.0, 3.7, 54.05, 400.0, 1000.0}) {
    CHECK(back.eval(d0) == orig.eval(d0));
  }
  std::remove(path.c_str());
  CHECK_THROWS(load_gain_json("no_such_file.json"));
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "seqdes/core/stage_rule.hpp"

using namespace seqdes;

namespace {

const GainInterpolant& test_interp() {
  static const GainInterpolant interp =
      fit_gain(Link::cloglog, log_spaced(1.0, 1e5, 30), 20000, 4242);
  return interp;
}

// constant gain curve: every candidate path is parallel to the benchmark
GainInterpolant flat_interp() {
  GainInterpolant flat;
  flat.model = Link::cloglog;
  flat.d_star = 0.8094;
  flat.log_d_min = 0.0;
  flat.log_d_max = std::log(1e6);
  flat.table_x = {flat.log_d_min, flat.log_d_max};
  flat.table_y = {0.5, 0.5};
  return flat;
}

}  // namespace

TEST_CASE("round_even") {
  CHECK(round_even(718.66) == 720);
  CHECK(round_even(133.1) == 134);
  CHECK(round_even(121.0) == 122);
  CHECK(round_even(5.0) == 6);
  CHECK(round_even(4.4) == 4);
  CHECK(round_even(3.0) == 4);
  CHECK(round_even(2.0) == 2);
  CHECK(round_even(0.3) == 2);
  CHECK(round_even(-17.0) == 2);
  CHECK_THROWS_AS(round_even(std::numeric_limits<double>::quiet_NaN()),
                  std::invalid_argument);
  CHECK_THROWS_AS(round_even(std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("cut_point lies on both cost lines") {
  const GainInterpolant& interp = test_interp();
  const double d_prev = 50.0, c_prev = 300.0, cs = 228.4;
  for (long n : {10L, 100L, 720L, 5000L}) {
    const PathState cut = cut_point(d_prev, c_prev, n, cs, interp);
    const double h0 = interp.eval(d_prev);
    const double dk = d_prev + n * h0 / 2.0;
    const double hk = interp.eval(dk);
    // benchmark: one stage from (d_prev, c_prev)
    const double bench = c_prev + cs + 2.0 * (cut.d - d_prev) / h0;
    // candidate: stage of n, then one stage at the improved gain
    const double cand = c_prev + cs + n + cs + 2.0 * (cut.d - dk) / hk;
    CHECK(cut.c == doctest::Approx(bench).epsilon(1e-10));
    CHECK(cut.c == doctest::Approx(cand).epsilon(1e-10));
    CHECK(cut.d > dk);
  }
}

TEST_CASE("cut_point regression pin") {
  // frozen output of the deterministic fit + Eq-style cut arithmetic
  const PathState cut = cut_point(50.0, 0.0, 720, 228.4, test_interp());
  CHECK(cut.d > 50.0 + 720 * test_interp().eval(50.0) / 2.0);
  CHECK(cut.d == doctest::Approx(195087.546290694707).epsilon(1e-7));
  CHECK(cut.c == doctest::Approx(482391.629968154943).epsilon(1e-7));
}

TEST_CASE("cut_point input validation") {
  const GainInterpolant& interp = test_interp();
  CHECK_THROWS_AS(cut_point(50.0, 0.0, 3, 1.0, interp), std::invalid_argument);
  CHECK_THROWS_AS(cut_point(50.0, 0.0, 0, 1.0, interp), std::invalid_argument);
  CHECK_THROWS_AS(cut_point(50.0, 0.0, 10, 0.0, interp), std::invalid_argument);
  // on a flat gain curve the candidate cannot improve
  CHECK_THROWS_AS(cut_point(50.0, 0.0, 2, 1.0, flat_interp()),
                  NoImprovementError);
}

TEST_CASE("default_candidates shape") {
  const auto& c = default_candidates();
  REQUIRE(c.size() == 368);
  CHECK(c.front() == 2);
  CHECK(c.back() == 200000);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i] % 2 == 0);
    if (i) CHECK(c[i] > c[i - 1]);
  }
  CHECK(std::binary_search(c.begin(), c.end(), 720L));
}

TEST_CASE("optimal_stage_size picks the earliest cut") {
  const GainInterpolant& interp = test_interp();
  const auto& cands = default_candidates();
  const long best = optimal_stage_size(50.0, 228.4, interp, cands);
  CHECK(std::binary_search(cands.begin(), cands.end(), best));
  const double best_cut = cut_point(50.0, 0.0, best, 228.4, interp).d;
  for (long n : cands) {
    try {
      CHECK(cut_point(50.0, 0.0, n, 228.4, interp).d >= best_cut);
    } catch (const NoImprovementError&) {
    }
  }
}

TEST_CASE("optimal stage size grows with D and with stage cost") {
  const GainInterpolant& interp = test_interp();
  const auto& cands = default_candidates();
  long prev = 0;
  for (double d : {5.0, 50.0, 500.0}) {
    const long n = optimal_stage_size(d, 100.0, interp, cands);
    CHECK(n >= prev);
    prev = n;
  }
  prev = 0;
  for (double cs : {2.0, 50.0, 1000.0}) {
    const long n = optimal_stage_size(50.0, cs, interp, cands);
    CHECK(n >= prev);
    prev = n;
  }
  CHECK_THROWS_AS(optimal_stage_size(50.0, 1.0, interp, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(optimal_stage_size(50.0, 1.0, flat_interp(), {2L, 4L}),
                  AllCandidatesDegenerateError);
}

TEST_CASE("sweep_grid covers the full grid") {
  const GainInterpolant& interp = test_interp();
  const auto d_grid = log_spaced(1.0, 1000.0, 8);
  const auto cs_grid = log_spaced(1.0, 1000.0, 5);
  const auto table = sweep_grid(interp, d_grid, cs_grid, default_candidates());
  REQUIRE(table.size() == 40);
  std::size_t valid = 0;
  for (const auto& row : table) {
    CHECK(row.d >= 1.0);
    CHECK(row.cs >= 1.0);
    if (row.valid) {
      CHECK(row.n_opt >= 2);
      ++valid;
    }
  }
  CHECK(valid == table.size());
}

TEST_CASE("fit_stage_rule recovers an exact log-linear table") {
  std::vector<SweepRow> table;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 12; ++j) {
      SweepRow row;
      row.d = static_cast<double>(1 << i);
      row.cs = 1.5 + j;
      row.n_opt = 2 * (1L << i);  // log n = log 2 + log d exactly
      row.valid = true;
      table.push_back(row);
    }
  }
  const StageRule rule = fit_stage_rule(Link::logit, table);
  CHECK(rule.alpha == doctest::Approx(std::log(2.0)).epsilon(1e-8));
  CHECK(rule.beta == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::fabs(rule.gamma) < 1e-8);
  CHECK(std::fabs(rule.delta) < 1e-8);
  CHECK(rule.r_squared == doctest::Approx(1.0));

  table.resize(50);
  CHECK_THROWS_AS(fit_stage_rule(Link::logit, table), std::invalid_argument);
}

TEST_CASE("reference coefficients and the published example") {
  const StageRule& cl = reference_rule(Link::cloglog);
  CHECK(cl.alpha == doctest::Approx(0.48044));
  CHECK(cl.beta == doctest::Approx(1.34593));
  CHECK(cl.gamma == doctest::Approx(0.39711));
  CHECK(cl.delta == doctest::Approx(-0.00778));
  CHECK(suggest_stage_size(cl, 0.380, 54.05, 228.4) == 720);

  const StageRule& lg = reference_rule(Link::logit);
  CHECK(lg.alpha == doctest::Approx(1.01515));
  CHECK(lg.beta == doctest::Approx(1.43396));
  const StageRule& pb = reference_rule(Link::probit);
  CHECK(pb.gamma == doctest::Approx(0.40324));
  CHECK(pb.delta == doctest::Approx(-0.00949));
}

TEST_CASE("suggest_stage_size uses the slope-scaled criterion") {
  const StageRule& rule = reference_rule(Link::cloglog);
  CHECK(suggest_stage_size(rule, 0.5, 100.0, 228.4) ==
        suggest_stage_size(rule, 1.0, 50.0, 228.4));
  CHECK(suggest_stage_size(rule, 2.0, 25.0, 228.4) ==
        suggest_stage_size(rule, 1.0, 50.0, 228.4));
  CHECK(suggest_stage_size(rule, 1.0, 0.380 * 54.05, 228.4) == 720);
  CHECK_THROWS_AS(suggest_stage_size(rule, 0.0, 50.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(suggest_stage_size(rule, 1.0, -1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(suggest_stage_size(rule, 1.0, 50.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("rule JSON round trip") {
  const StageRule orig = reference_rule(Link::probit);
  const std::string path = "seqdes_test_rule.json";
  save_rule_json(orig, path);
  const StageRule back = load_rule_json(path);
  CHECK(back.model == orig.model);
  CHECK(back.alpha == orig.alpha);
  CHECK(back.beta == orig.beta);
  CHECK(back.gamma == orig.gamma);
  CHECK(back.delta == orig.delta);
  CHECK(back.r_squared == orig.r_squared);
  std::remove(path.c_str());
  CHECK_THROWS(load_rule_json("no_such_rule.json"));
}

TEST_CASE("sweep CSV layout") {
  std::vector<SweepRow> table = {{10.0, 2.0, 44, true}, {20.0, 2.0, 0, false}};
  const std::string path = "seqdes_test_sweep.csv";
  save_sweep_csv(table, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "d,cs,n_opt");
  std::getline(in, line);
  CHECK(line == "10,2,44");
  std::getline(in, line);
  CHECK(line == "20,2,");
  in.close();
  std::remove(path.c_str());
}

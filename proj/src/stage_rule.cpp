#include "seqdes/core/stage_rule.hpp"

#include <cfenv>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "seqdes/core/linalg.hpp"

namespace seqdes {

// nearest integer (ties half-to-even), then odd counts round up to the next
// even size; never below 2
long round_even(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("round_even: non-finite input");
  long m = std::llrint(x);
  if (m % 2 != 0) ++m;
  return std::max(2L, m);
}

PathState cut_point(double d_prev, double c_prev, long n_k, double stage_cost,
                    const GainInterpolant& interp) {
  if (n_k < 2 || n_k % 2 != 0)
    throw std::invalid_argument("cut_point: n_k must be even and >= 2");
  if (!(stage_cost > 0.0))
    throw std::invalid_argument("cut_point: stage cost must be > 0");
  const double h0 = interp.eval(d_prev);
  const double dk = d_prev + static_cast<double>(n_k) * h0 / 2.0;
  const double hk = interp.eval(dk);
  if (!(hk > h0 + 1e-12))
    throw NoImprovementError("cut_point: candidate path parallel to benchmark");
  PathState out;
  out.d = d_prev + static_cast<double>(n_k) * h0 / 2.0 +
          stage_cost * h0 * hk / (2.0 * (hk - h0));
  out.c = c_prev + static_cast<double>(n_k) +
          (1.0 + hk / (hk - h0)) * stage_cost;
  return out;
}

long optimal_stage_size(double d_prev, double stage_cost,
                        const GainInterpolant& interp,
                        const std::vector<long>& candidates) {
  if (candidates.empty())
    throw std::invalid_argument("optimal_stage_size: empty candidate set");
  long best_n = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (long n : candidates) {
    try {
      const PathState cut = cut_point(d_prev, 0.0, n, stage_cost, interp);
      if (cut.d < best_d) {
        best_d = cut.d;
        best_n = n;
      }
    } catch (const NoImprovementError&) {
    }
  }
  if (best_n == 0)
    throw AllCandidatesDegenerateError(
        "optimal_stage_size: no candidate improves on the benchmark");
  return best_n;
}

const std::vector<long>& default_candidates() {
  static const std::vector<long> cands = [] {
    std::vector<long> v;
    for (long n = 2; n <= 194; n += 2) v.push_back(n);
    for (long n = 200; n <= 1000; n += 10) v.push_back(n);
    for (long n = 1100; n <= 10000; n += 100) v.push_back(n);
    for (long n = 11000; n <= 100000; n += 1000) v.push_back(n);
    for (long n = 110000; n <= 200000; n += 10000) v.push_back(n);
    return v;
  }();
  return cands;
}

std::vector<SweepRow> sweep_grid(const GainInterpolant& interp,
                                 const std::vector<double>& d_grid,
                                 const std::vector<double>& cs_grid,
                                 const std::vector<long>& candidates) {
  if (d_grid.empty() || cs_grid.empty())
    throw std::invalid_argument("sweep_grid: empty grid");
  std::vector<SweepRow> table;
  table.reserve(d_grid.size() * cs_grid.size());
  for (double d : d_grid) {
    for (double cs : cs_grid) {
      SweepRow row;
      row.d = d;
      row.cs = cs;
      try {
        row.n_opt = optimal_stage_size(d, cs, interp, candidates);
        row.valid = true;
      } catch (const AllCandidatesDegenerateError&) {
        row.valid = false;
      }
      table.push_back(row);
    }
  }
  return table;
}

StageRule fit_stage_rule(Link model, const std::vector<SweepRow>& table) {
  std::size_t rows = 0;
  for (const auto& r : table)
    if (r.valid) ++rows;
  if (rows < 100)
    throw std::invalid_argument("fit_stage_rule: need at least 100 valid rows");

  std::vector<double> design(rows * 4), y(rows);
  std::size_t i = 0;
  for (const auto& r : table) {
    if (!r.valid) continue;
    const double ld = std::log(r.d), lc = std::log(r.cs);
    design[i * 4] = 1.0;
    design[i * 4 + 1] = ld;
    design[i * 4 + 2] = lc;
    design[i * 4 + 3] = ld * lc;
    y[i] = std::log(static_cast<double>(r.n_opt));
    ++i;
  }
  const auto coef = least_squares(design, y, rows, 4);

  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(rows);
  double sst = 0.0, ssr = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double fit = 0.0;
    for (std::size_t c = 0; c < 4; ++c) fit += coef[c] * design[r * 4 + c];
    ssr += (y[r] - fit) * (y[r] - fit);
    sst += (y[r] - ybar) * (y[r] - ybar);
  }

  StageRule rule;
  rule.model = model;
  rule.alpha = coef[0];
  rule.beta = coef[1];
  rule.gamma = coef[2];
  rule.delta = coef[3];
  rule.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  return rule;
}

long suggest_stage_size(const StageRule& rule, double a_hat, double d_prev,
                        double stage_cost) {
  if (!(a_hat > 0.0 && d_prev > 0.0 && stage_cost > 0.0))
    throw std::invalid_argument("suggest_stage_size: inputs must be positive");
  const double ld = std::log(a_hat * d_prev);
  const double lc = std::log(stage_cost);
  const double raw =
      std::exp(rule.alpha + rule.beta * ld + rule.gamma * lc + rule.delta * ld * lc);
  return round_even(raw);
}

const StageRule& reference_rule(Link link) {
  static const StageRule rules[3] = {
      {Link::logit, 1.01515, 1.43396, 0.41042, -0.01388, 0.9992},
      {Link::probit, 0.12859, 1.41891, 0.40324, -0.00949, 0.9990},
      {Link::cloglog, 0.48044, 1.34593, 0.39711, -0.00778, 0.9934},
  };
  return rules[static_cast<int>(link)];
}

void save_rule_json(const StageRule& rule, const std::string& path) {
  nlohmann::json j;
  j["schema"] = "seqdes.rule.v1";
  j["model"] = link_name(rule.model);
  j["alpha"] = rule.alpha;
  j["beta"] = rule.beta;
  j["gamma"] = rule.gamma;
  j["delta"] = rule.delta;
  j["r_squared"] = rule.r_squared;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

StageRule load_rule_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("schema", "") != "seqdes.rule.v1")
    throw std::runtime_error("unrecognized rule file schema in " + path);
  StageRule rule;
  rule.model = link_from_string(j.at("model").get<std::string>());
  rule.alpha = j.at("alpha").get<double>();
  rule.beta = j.at("beta").get<double>();
  rule.gamma = j.at("gamma").get<double>();
  rule.delta = j.at("delta").get<double>();
  rule.r_squared = j.at("r_squared").get<double>();
  return rule;
}

void save_sweep_csv(const std::vector<SweepRow>& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "d,cs,n_opt\n";
  char buf[128];
  for (const auto& r : table) {
    if (r.valid)
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%ld\n", r.d, r.cs, r.n_opt);
    else
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,\n", r.d, r.cs);
    out << buf;
  }
}

}  // namespace seqdes

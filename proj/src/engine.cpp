#include "seqdes/core/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "seqdes/core/canonical.hpp"
#include "seqdes/core/rng.hpp"

namespace seqdes {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

FisherInfo initial_info(Link link, const InitialState& initial) {
  if (initial.info) return *initial.info;
  if (initial.d0 > 0.0 && initial.data.empty()) {
    // reconstruct: scale the unit-weight D-optimal information at the
    // initial estimates up to the reported D level
    const auto& cd = derive_canonical(link);
    const auto [x1, x2] = optimal_covariates(cd, initial.params);
    const DesignPoint pts[2] = {{x1, 1}, {x2, 1}};
    const FisherInfo unit = fisher_info(link, initial.params, pts);
    const double d_unit = d_criterion(unit);
    if (d_unit > 0.0) return (initial.d0 / d_unit) * unit;
  }
  return FisherInfo{};
}

long policy_stage_size(const SizingPolicy& policy, int stage, double a_hat,
                       double d_prev, double stage_cost) {
  switch (policy.kind) {
    case SizingPolicy::Kind::cost_efficient: {
      if (!policy.rule)
        throw InvalidPolicyError("cost_efficient policy requires a stage rule");
      return suggest_stage_size(*policy.rule, std::fabs(a_hat), d_prev,
                                stage_cost);
    }
    case SizingPolicy::Kind::adhoc_growth:
      return round_even(policy.adhoc_start *
                        std::pow(policy.adhoc_factor, stage - 1));
    case SizingPolicy::Kind::fixed:
      return round_even(static_cast<double>(policy.fixed_n));
  }
  throw InvalidPolicyError("unknown sizing policy");
}

}  // namespace

Responder bernoulli_responder(Link link, const ModelParams& true_params,
                              std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [link, true_params, rng](double x, long n) -> long {
    const double p = response_prob(link, true_params.a * x + true_params.b);
    return rng->binomial(n, p);
  };
}

Responder stream_responder(std::istream& in, std::ostream& out) {
  return [&in, &out](double x, long n) -> long {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "MEASURE %.17g %ld\n", x, n);
    out << msg;
    out.flush();
    std::string line;
    if (!std::getline(in, line))
      throw ProtocolError("responder stream closed before RESULT");
    std::istringstream reply(line);
    std::string tag;
    long s = -1;
    if (!(reply >> tag >> s) || tag != "RESULT" || s < 0 || s > n)
      throw ProtocolError("malformed responder reply: " + line);
    return s;
  };
}

double theoretical_d_after(Link link, double d0, double n_measurements,
                           double a_true) {
  if (a_true == 0.0)
    throw std::invalid_argument("theoretical_d_after: a_true must be nonzero");
  return d0 + 0.5 * n_measurements * derive_canonical(link).d_star /
                  std::fabs(a_true);
}

std::vector<StageRecord> run_experiment(const ExperimentConfig& config,
                                        const Responder& responder,
                                        const InitialState& initial) {
  const auto& stop = config.stopping;
  if (!stop.target_d && !stop.budget && !stop.max_stages)
    throw std::invalid_argument("run_experiment: no stopping condition set");
  if (config.policy.kind == SizingPolicy::Kind::adhoc_growth &&
      !(config.policy.adhoc_factor > 1.0))
    throw std::invalid_argument("run_experiment: adhoc factor must exceed 1");

  const auto& cd = derive_canonical(config.model);
  const FisherInfo j_init = initial_info(config.model, initial);

  std::vector<StageData> data = initial.data;
  ModelParams params = initial.params;
  double c = initial.cost0;

  auto current_d = [&](const FisherInfo& data_info) {
    return d_criterion(j_init + data_info);
  };

  std::vector<DesignPoint> pts;
  FisherInfo data_info;
  if (!data.empty()) {
    pts.reserve(data.size());
    for (const auto& cell : data) pts.push_back({cell.x, cell.n});
    data_info = fisher_info(config.model, params, pts);
  }
  double d_prev = current_d(data_info);

  std::vector<StageRecord> records;
  std::string reason;
  for (int k = 1;; ++k) {
    if (stop.target_d && d_prev >= *stop.target_d) {
      reason = records.empty() ? "target met at start" : "target met";
      break;
    }
    if (stop.max_stages && k > *stop.max_stages) {
      reason = "max stages reached";
      break;
    }

    long n_k = policy_stage_size(config.policy, k, params.a, d_prev,
                                 config.cost.stage_cost);

    if (stop.target_d) {
      // do not measure past the target: cap at the expected need under the
      // asymptotic per-pair gain d_star/|a|
      const double per_pair = cd.d_star / std::fabs(params.a);
      const double pairs = std::ceil((*stop.target_d - d_prev) / per_pair);
      n_k = std::min(n_k, std::max(2L, 2L * static_cast<long>(pairs)));
    }
    if (stop.budget) {
      const double remaining = *stop.budget - c - config.cost.stage_cost;
      if (remaining < 2.0) {
        reason = "budget exhausted";
        break;
      }
      n_k = std::min(n_k, 2L * static_cast<long>(remaining / 2.0));
    }

    const auto [x1, x2] = optimal_covariates(cd, params);
    const long half = n_k / 2;
    const long s1 = responder(x1, half);
    const long s2 = responder(x2, half);
    if (s1 < 0 || s1 > half || s2 < 0 || s2 > half)
      throw ProtocolError("responder returned an out-of-range success count");

    data.push_back({x1, half, s1});
    data.push_back({x2, half, s2});
    pts.push_back({x1, half});
    pts.push_back({x2, half});

    Estimate est;
    try {
      est = fit_mle(config.model, data, params);
    } catch (SeparationError&) {
      std::ostringstream what;
      what << "stage " << k << " refit separated (" << data.size()
           << " cells); last stage at x1=" << x1 << " x2=" << x2;
      throw SeparationError(what.str());
    }
    params = est.params;
    data_info = fisher_info(config.model, params, pts);
    d_prev = current_d(data_info);
    c += config.cost.stage_cost + static_cast<double>(n_k);

    StageRecord rec;
    rec.stage = k;
    rec.n_k = n_k;
    rec.x1 = x1;
    rec.x2 = x2;
    rec.s1 = s1;
    rec.s2 = s2;
    rec.a_hat = params.a;
    rec.b_hat = params.b;
    rec.d = d_prev;
    rec.c = c;
    records.push_back(rec);
  }
  if (!records.empty()) records.back().stop_reason = reason;
  return records;
}

CompareResult compare_policies(const ExperimentConfig& config_a,
                               const ExperimentConfig& config_b, Link model,
                               const ModelParams& true_params,
                               const InitialState& initial, int replications,
                               std::uint64_t seed) {
  if (replications < 1)
    throw std::invalid_argument("compare_policies: replications must be >= 1");
  if (config_a.model != model || config_b.model != model)
    throw std::invalid_argument("compare_policies: configs must share the model");

  std::vector<std::vector<PathPoint>> paths_a, paths_b;
  CompareResult out;

  auto run_arm = [&](const ExperimentConfig& cfg, std::uint64_t rep_seed,
                     std::vector<std::vector<PathPoint>>& paths,
                     std::vector<double>& costs, int& failures) {
    try {
      auto responder = bernoulli_responder(model, true_params, rep_seed);
      const auto records = run_experiment(cfg, responder, initial);
      std::vector<PathPoint> path;
      path.reserve(records.size());
      for (const auto& r : records) path.push_back({r.d, r.c});
      costs.push_back(records.empty() ? initial.cost0 : records.back().c);
      paths.push_back(std::move(path));
    } catch (const std::exception&) {
      ++failures;
    }
  };

  for (int rep = 0; rep < replications; ++rep) {
    const std::uint64_t rep_seed = stream_seed(seed, static_cast<std::uint64_t>(rep));
    run_arm(config_a, rep_seed, paths_a, out.total_costs_a, out.failures_a);
    run_arm(config_b, rep_seed, paths_b, out.total_costs_b, out.failures_b);
  }

  const int min_ok = (9 * replications + 9) / 10;
  if (static_cast<int>(out.total_costs_a.size()) < min_ok ||
      static_cast<int>(out.total_costs_b.size()) < min_ok)
    throw std::runtime_error("compare_policies: more than 10% of replicates failed");

  auto median_path = [](const std::vector<std::vector<PathPoint>>& paths) {
    std::vector<PathPoint> med;
    std::size_t longest = 0;
    for (const auto& p : paths) longest = std::max(longest, p.size());
    for (std::size_t k = 0; k < longest; ++k) {
      std::vector<double> ds, cs;
      for (const auto& p : paths) {
        if (p.empty()) continue;
        // finished paths stay at their final point, so every stage's median
        // is taken over the same population and stays monotone in D
        const PathPoint& pt = k < p.size() ? p[k] : p.back();
        ds.push_back(pt.d);
        cs.push_back(pt.c);
      }
      med.push_back({median_of(ds), median_of(cs)});
    }
    return med;
  };
  out.median_path_a = median_path(paths_a);
  out.median_path_b = median_path(paths_b);
  out.median_cost_a = median_of(out.total_costs_a);
  out.median_cost_b = median_of(out.total_costs_b);

  const double d_star_x =
      derive_canonical(model).d_star / std::fabs(true_params.a);
  out.theory_d0 = initial.d0;
  out.theory_c0 = initial.cost0 + config_a.cost.stage_cost;
  out.theory_slope = 2.0 / d_star_x;
  return out;
}

void write_path_csv(const std::vector<StageRecord>& records, std::ostream& out) {
  out << "stage,n_k,x1,x2,s1,s2,a_hat,b_hat,D,C,stop_reason\n";
  char buf[320];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%ld,%.17g,%.17g,%ld,%ld,%.17g,%.17g,%.17g,%.17g,%s\n",
                  r.stage, r.n_k, r.x1, r.x2, r.s1, r.s2, r.a_hat, r.b_hat, r.d,
                  r.c, r.stop_reason.c_str());
    out << buf;
  }
}

void write_path_csv(const std::vector<StageRecord>& records,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_path_csv(records, out);
}

void write_path_json(const std::vector<StageRecord>& records,
                     const std::string& path) {
  nlohmann::json j;
  j["schema"] = "seqdes.path.v1";
  auto& rows = j["stages"] = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json row;
    row["stage"] = r.stage;
    row["n_k"] = r.n_k;
    row["x1"] = r.x1;
    row["x2"] = r.x2;
    row["s1"] = r.s1;
    row["s2"] = r.s2;
    row["a_hat"] = r.a_hat;
    row["b_hat"] = r.b_hat;
    row["D"] = r.d;
    row["C"] = r.c;
    row["stop_reason"] = r.stop_reason;
    rows.push_back(std::move(row));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace seqdes

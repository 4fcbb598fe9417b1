#include "seqdes/seqdes.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqdes/core/canonical.hpp"
#include "seqdes/core/engine.hpp"
#include "seqdes/core/estimation.hpp"
#include "seqdes/core/gain.hpp"
#include "seqdes/core/glm.hpp"
#include "seqdes/core/rng.hpp"
#include "seqdes/core/stage_rule.hpp"

struct seqdes_gain {
  seqdes::GainInterpolant interp;
  std::vector<seqdes::GainSample> samples;
};

struct seqdes_rule {
  seqdes::StageRule rule;
};

namespace {

thread_local std::string g_last_error;

seqdes_status fail(seqdes_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

seqdes_status translate(const std::exception& e) {
  if (dynamic_cast<const seqdes::SeparationError*>(&e))
    return fail(SEQDES_ERR_SEPARATION, e.what());
  if (dynamic_cast<const seqdes::DegenerateDesignError*>(&e))
    return fail(SEQDES_ERR_DEGENERATE_DESIGN, e.what());
  if (dynamic_cast<const seqdes::NoImprovementError*>(&e))
    return fail(SEQDES_ERR_NO_IMPROVEMENT, e.what());
  if (dynamic_cast<const seqdes::AllCandidatesDegenerateError*>(&e))
    return fail(SEQDES_ERR_ALL_CANDIDATES_DEGENERATE, e.what());
  if (dynamic_cast<const seqdes::InitialSearchFailed*>(&e))
    return fail(SEQDES_ERR_NOT_CONVERGED, e.what());
  if (dynamic_cast<const seqdes::ProtocolError*>(&e))
    return fail(SEQDES_ERR_PROTOCOL, e.what());
  if (dynamic_cast<const std::invalid_argument*>(&e))
    return fail(SEQDES_ERR_INVALID_ARGUMENT, e.what());
  const std::string what = e.what();
  if (what.find("cannot open") != std::string::npos)
    return fail(SEQDES_ERR_IO, what);
  return fail(SEQDES_ERR_INTERNAL, what);
}

seqdes_status to_link(int model, seqdes::Link& out) {
  switch (model) {
    case SEQDES_MODEL_LOGIT: out = seqdes::Link::logit; return SEQDES_OK;
    case SEQDES_MODEL_PROBIT: out = seqdes::Link::probit; return SEQDES_OK;
    case SEQDES_MODEL_CLOGLOG: out = seqdes::Link::cloglog; return SEQDES_OK;
  }
  return fail(SEQDES_ERR_INVALID_ARGUMENT, "unknown model id");
}

seqdes_status build_config(const seqdes_sim_config* cfg,
                           seqdes::ExperimentConfig& out,
                           seqdes::InitialState& initial,
                           seqdes::ModelParams& true_params) {
  if (!cfg) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null config");
  seqdes::Link link;
  if (auto st = to_link(cfg->model, link); st != SEQDES_OK) return st;
  out.model = link;
  out.cost.stage_cost = cfg->stage_cost;
  if (!(cfg->stage_cost > 0.0))
    return fail(SEQDES_ERR_INVALID_ARGUMENT, "stage_cost must be > 0");

  switch (cfg->policy) {
    case SEQDES_POLICY_COST_EFFICIENT:
      out.policy.kind = seqdes::SizingPolicy::Kind::cost_efficient;
      out.policy.rule =
          cfg->rule ? cfg->rule->rule : seqdes::reference_rule(link);
      break;
    case SEQDES_POLICY_ADHOC_GROWTH:
      out.policy.kind = seqdes::SizingPolicy::Kind::adhoc_growth;
      if (cfg->adhoc_start > 0.0) out.policy.adhoc_start = cfg->adhoc_start;
      if (cfg->adhoc_factor > 0.0) out.policy.adhoc_factor = cfg->adhoc_factor;
      break;
    case SEQDES_POLICY_FIXED:
      out.policy.kind = seqdes::SizingPolicy::Kind::fixed;
      out.policy.fixed_n = cfg->fixed_n;
      break;
    default:
      return fail(SEQDES_ERR_INVALID_ARGUMENT, "unknown policy id");
  }

  if (cfg->target_d > 0.0) out.stopping.target_d = cfg->target_d;
  if (cfg->budget > 0.0) out.stopping.budget = cfg->budget;
  if (cfg->max_stages > 0) out.stopping.max_stages = cfg->max_stages;
  out.seed = cfg->seed;

  initial.params = {cfg->init_a, cfg->init_b};
  initial.d0 = cfg->init_d;
  initial.cost0 = cfg->init_cost;
  true_params = {cfg->true_a, cfg->true_b};
  return SEQDES_OK;
}

void write_median_csv(const std::vector<seqdes::PathPoint>& path,
                      const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  out << "stage,D,C\n";
  char buf[96];
  for (std::size_t k = 0; k < path.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", k + 1, path[k].d,
                  path[k].c);
    out << buf;
  }
}

}  // namespace

extern "C" {

const char* seqdes_version(void) { return "1.0.0"; }

const char* seqdes_last_error(void) { return g_last_error.c_str(); }

double seqdes_response_prob(int model, double z) {
  seqdes::Link link;
  if (to_link(model, link) != SEQDES_OK) return NAN;
  return seqdes::response_prob(link, z);
}

double seqdes_info_weight(int model, double z) {
  seqdes::Link link;
  if (to_link(model, link) != SEQDES_OK) return NAN;
  return seqdes::info_weight(link, z);
}

seqdes_status seqdes_derive_canonical(int model, seqdes_canonical_design* out) {
  if (!out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null output pointer");
  seqdes::Link link;
  if (auto st = to_link(model, link); st != SEQDES_OK) return st;
  try {
    const auto& cd = seqdes::derive_canonical(link);
    out->z1 = cd.z1_star;
    out->z2 = cd.z2_star;
    out->f1 = seqdes::response_prob(link, cd.z1_star);
    out->f2 = seqdes::response_prob(link, cd.z2_star);
    out->d_star = cd.d_star;
    out->j11 = cd.j_star.j11;
    out->j12 = cd.j_star.j12;
    out->j22 = cd.j_star.j22;
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_gain_simulate(int model, double d0, long draws,
                                   unsigned long long seed, double* mean_out,
                                   double* std_error_out, long* degenerate_out) {
  if (!mean_out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null output pointer");
  seqdes::Link link;
  if (auto st = to_link(model, link); st != SEQDES_OK) return st;
  try {
    const auto sample = seqdes::simulate_gain(link, d0, draws, seed);
    *mean_out = sample.mean_gain;
    if (std_error_out) *std_error_out = sample.std_error;
    if (degenerate_out) *degenerate_out = sample.degenerate;
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_gain_fit(int model, double grid_min, double grid_max,
                              int grid_points, long draws,
                              unsigned long long seed, seqdes_gain** out) {
  if (!out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null output pointer");
  seqdes::Link link;
  if (auto st = to_link(model, link); st != SEQDES_OK) return st;
  try {
    auto handle = std::make_unique<seqdes_gain>();
    const auto grid = seqdes::log_spaced(grid_min, grid_max, grid_points);
    handle->interp = seqdes::fit_gain(link, grid, draws, seed, &handle->samples);
    *out = handle.release();
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_gain_eval(const seqdes_gain* gain, double d0, double* out) {
  if (!gain || !out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null pointer");
  try {
    *out = gain->interp.eval(d0);
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_gain_save(const seqdes_gain* gain, const char* path) {
  if (!gain || !path) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null pointer");
  try {
    seqdes::save_gain_json(gain->interp, gain->samples, path);
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_gain_load(const char* path, seqdes_gain** out) {
  if (!path || !out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null pointer");
  try {
    auto handle = std::make_unique<seqdes_gain>();
    handle->interp = seqdes::load_gain_json(path);
    *out = handle.release();
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

void seqdes_gain_free(seqdes_gain* gain) { delete gain; }

seqdes_status seqdes_rule_fit(const seqdes_gain* gain, const char* sweep_csv_path,
                              seqdes_rule** out) {
  if (!gain || !out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null pointer");
  try {
    const auto d_grid = seqdes::log_spaced(1.0, 1000.0, 104);
    const auto cs_grid = seqdes::log_spaced(1.0, 1000.0, 35);
    const auto table = seqdes::sweep_grid(gain->interp, d_grid, cs_grid,
                                          seqdes::default_candidates());
    if (sweep_csv_path) seqdes::save_sweep_csv(table, sweep_csv_path);
    auto handle = std::make_unique<seqdes_rule>();
    handle->rule = seqdes::fit_stage_rule(gain->interp.model, table);
    *out = handle.release();
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_rule_reference(int model, seqdes_rule** out) {
  if (!out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null pointer");
  seqdes::Link link;
  if (auto st = to_link(model, link); st != SEQDES_OK) return st;
  auto handle = std::make_unique<seqdes_rule>();
  handle->rule = seqdes::reference_rule(link);
  *out = handle.release();
  return SEQDES_OK;
}

seqdes_status seqdes_rule_coefficients(const seqdes_rule* rule, double* alpha,
                                       double* beta, double* gamma,
                                       double* delta, double* r_squared) {
  if (!rule) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null rule");
  if (alpha) *alpha = rule->rule.alpha;
  if (beta) *beta = rule->rule.beta;
  if (gamma) *gamma = rule->rule.gamma;
  if (delta) *delta = rule->rule.delta;
  if (r_squared) *r_squared = rule->rule.r_squared;
  return SEQDES_OK;
}

seqdes_status seqdes_rule_save(const seqdes_rule* rule, const char* path) {
  if (!rule || !path) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null pointer");
  try {
    seqdes::save_rule_json(rule->rule, path);
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_rule_load(const char* path, seqdes_rule** out) {
  if (!path || !out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null pointer");
  try {
    auto handle = std::make_unique<seqdes_rule>();
    handle->rule = seqdes::load_rule_json(path);
    *out = handle.release();
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

void seqdes_rule_free(seqdes_rule* rule) { delete rule; }

seqdes_status seqdes_suggest(const seqdes_rule* rule, double a_hat,
                             double d_prev, double stage_cost, long* n_out) {
  if (!rule || !n_out) return fail(SEQDES_ERR_INVALID_ARGUMENT, "null pointer");
  try {
    *n_out = seqdes::suggest_stage_size(rule->rule, a_hat, d_prev, stage_cost);
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_simulate(const seqdes_sim_config* cfg, int replications,
                              const char* csv_path, const char* json_path,
                              double* final_cost_out) {
  if (replications < 1)
    return fail(SEQDES_ERR_INVALID_ARGUMENT, "replications must be >= 1");
  seqdes::ExperimentConfig config;
  seqdes::InitialState initial;
  seqdes::ModelParams true_params;
  if (auto st = build_config(cfg, config, initial, true_params); st != SEQDES_OK)
    return st;
  try {
    if (replications == 1) {
      auto responder =
          seqdes::bernoulli_responder(config.model, true_params, cfg->seed);
      const auto records = seqdes::run_experiment(config, responder, initial);
      if (csv_path) seqdes::write_path_csv(records, std::string(csv_path));
      if (json_path) seqdes::write_path_json(records, std::string(json_path));
      if (final_cost_out)
        *final_cost_out = records.empty() ? initial.cost0 : records.back().c;
      return SEQDES_OK;
    }
    // replications > 1: median path of identically configured runs
    const auto result =
        seqdes::compare_policies(config, config, config.model, true_params,
                                 initial, replications, cfg->seed);
    if (csv_path) write_median_csv(result.median_path_a, csv_path);
    if (json_path) {
      nlohmann::json j;
      j["schema"] = "seqdes.median_path.v1";
      j["replications"] = replications;
      auto& rows = j["stages"] = nlohmann::json::array();
      for (std::size_t k = 0; k < result.median_path_a.size(); ++k)
        rows.push_back({{"stage", k + 1},
                        {"D", result.median_path_a[k].d},
                        {"C", result.median_path_a[k].c}});
      j["median_total_cost"] = result.median_cost_a;
      std::ofstream out(json_path);
      if (!out)
        throw std::runtime_error("cannot open for writing: " +
                                 std::string(json_path));
      out << j.dump(2) << "\n";
    }
    if (final_cost_out) *final_cost_out = result.median_cost_a;
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

seqdes_status seqdes_compare(const seqdes_sim_config* cfg_a,
                             const seqdes_sim_config* cfg_b, int replications,
                             unsigned long long seed, const char* csv_a,
                             const char* csv_b, const char* summary_json,
                             double* median_cost_a, double* median_cost_b) {
  seqdes::ExperimentConfig config_a, config_b;
  seqdes::InitialState initial_a, initial_b;
  seqdes::ModelParams true_a, true_b;
  if (auto st = build_config(cfg_a, config_a, initial_a, true_a); st != SEQDES_OK)
    return st;
  if (auto st = build_config(cfg_b, config_b, initial_b, true_b); st != SEQDES_OK)
    return st;
  if (config_a.model != config_b.model || true_a.a != true_b.a ||
      true_a.b != true_b.b)
    return fail(SEQDES_ERR_INVALID_ARGUMENT,
                "compare: both configs must share model and true parameters");
  try {
    const auto result =
        seqdes::compare_policies(config_a, config_b, config_a.model, true_a,
                                 initial_a, replications, seed);
    if (csv_a) write_median_csv(result.median_path_a, csv_a);
    if (csv_b) write_median_csv(result.median_path_b, csv_b);
    if (summary_json) {
      nlohmann::json j;
      j["schema"] = "seqdes.compare.v1";
      j["replications"] = replications;
      j["median_total_cost_a"] = result.median_cost_a;
      j["median_total_cost_b"] = result.median_cost_b;
      j["median_cost_difference"] = result.median_cost_b - result.median_cost_a;
      j["failures_a"] = result.failures_a;
      j["failures_b"] = result.failures_b;
      j["total_costs_a"] = result.total_costs_a;
      j["total_costs_b"] = result.total_costs_b;
      j["theory"] = {{"d0", result.theory_d0},
                     {"c0", result.theory_c0},
                     {"slope_c_per_d", result.theory_slope}};
      std::ofstream out(summary_json);
      if (!out)
        throw std::runtime_error("cannot open for writing: " +
                                 std::string(summary_json));
      out << j.dump(2) << "\n";
    }
    if (median_cost_a) *median_cost_a = result.median_cost_a;
    if (median_cost_b) *median_cost_b = result.median_cost_b;
    return SEQDES_OK;
  } catch (const std::exception& e) {
    return translate(e);
  }
}

}  // extern "C"

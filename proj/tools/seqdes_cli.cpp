// seqdes command-line frontend. All numerics live behind the C API in
// libseqdes; this tool only parses arguments, moves files around and writes
// run manifests.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqdes/seqdes.h"

namespace {

int model_id(const std::string& name) {
  if (name == "logit") return SEQDES_MODEL_LOGIT;
  if (name == "probit") return SEQDES_MODEL_PROBIT;
  if (name == "cloglog") return SEQDES_MODEL_CLOGLOG;
  std::fprintf(stderr, "error: --model must be one of logit|probit|cloglog\n");
  std::exit(2);
}

[[noreturn]] void die(seqdes_status status) {
  std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(status),
               seqdes_last_error());
  std::exit(1);
}

void check(seqdes_status status) {
  if (status != SEQDES_OK) die(status);
}

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
  return hex;
}

void write_manifest(const std::string& command, const nlohmann::json& params,
                    std::uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  if (outputs.empty()) return;
  nlohmann::json m;
  m["schema"] = "seqdes.manifest.v1";
  m["command"] = command;
  m["params"] = params;
  m["seed"] = seed;
  m["version"] = seqdes_version();
  for (const auto& f : inputs) m["inputs"][f] = fnv1a64_file(f);
  for (const auto& f : outputs) m["outputs"][f] = fnv1a64_file(f);
  const std::string path = outputs.front() + ".manifest.json";
  std::ofstream out(path);
  if (!out) {
    std::fprintf(stderr, "error: cannot write manifest %s\n", path.c_str());
    std::exit(1);
  }
  out << m.dump(2) << "\n";
}

struct SimFlags {
  std::string model = "cloglog";
  double true_a = 0.240, true_b = -60.628;
  double init_a = 0.380, init_b = -95.60, init_d = 54.05;
  double init_cost = 0.0;
  double stage_cost = 228.4;
  double stage_seconds = 0.0, unit_seconds = 0.0;
  std::string policy = "cost_efficient";
  std::string rule_file;
  bool reference_coefficients = false;
  double adhoc_start = 100.0, adhoc_factor = 1.1;
  long fixed_n = 2;
  double target_d = 0.0, budget = 0.0;
  int max_stages = 0;
  std::uint64_t seed = 1;

  void add_common(CLI::App* cmd) {
    cmd->add_option("--model", model, "link model (logit|probit|cloglog)");
    cmd->add_option("--true-a", true_a, "simulator slope");
    cmd->add_option("--true-b", true_b, "simulator intercept");
    cmd->add_option("--init-a", init_a, "initial slope estimate");
    cmd->add_option("--init-b", init_b, "initial intercept estimate");
    cmd->add_option("--init-d", init_d, "initial information level D");
    cmd->add_option("--init-cost", init_cost, "cost spent before stage 1");
    cmd->add_option("--stage-cost", stage_cost,
                    "per-stage cost in marginal-measurement units");
    cmd->add_option("--stage-seconds", stage_seconds,
                    "per-stage cost in seconds (with --unit-seconds)");
    cmd->add_option("--unit-seconds", unit_seconds,
                    "seconds per measurement (with --stage-seconds)");
    cmd->add_option("--target-d", target_d, "stop once D reaches this value");
    cmd->add_option("--budget", budget, "total cost budget");
    cmd->add_option("--max-stages", max_stages, "stage-count cap");
    cmd->add_option("--seed", seed, "random seed")->envname("SEQDES_SEED");
  }

  double resolved_stage_cost() const {
    if (stage_seconds > 0.0 || unit_seconds > 0.0) {
      if (!(stage_seconds > 0.0 && unit_seconds > 0.0)) {
        std::fprintf(stderr,
                     "error: --stage-seconds and --unit-seconds go together\n");
        std::exit(2);
      }
      return stage_seconds / unit_seconds;
    }
    return stage_cost;
  }

  seqdes_sim_config to_config(int policy_id, const seqdes_rule* rule) const {
    seqdes_sim_config cfg{};
    cfg.model = model_id(model);
    cfg.true_a = true_a;
    cfg.true_b = true_b;
    cfg.init_a = init_a;
    cfg.init_b = init_b;
    cfg.init_d = init_d;
    cfg.init_cost = init_cost;
    cfg.stage_cost = resolved_stage_cost();
    cfg.policy = policy_id;
    cfg.rule = rule;
    cfg.adhoc_start = adhoc_start;
    cfg.adhoc_factor = adhoc_factor;
    cfg.fixed_n = fixed_n;
    cfg.target_d = target_d;
    cfg.budget = budget;
    cfg.max_stages = max_stages;
    cfg.seed = seed;
    return cfg;
  }

  nlohmann::json to_json() const {
    return {{"model", model},         {"true_a", true_a},
            {"true_b", true_b},       {"init_a", init_a},
            {"init_b", init_b},       {"init_d", init_d},
            {"init_cost", init_cost}, {"stage_cost", resolved_stage_cost()},
            {"policy", policy},       {"rule_file", rule_file},
            {"adhoc_start", adhoc_start}, {"adhoc_factor", adhoc_factor},
            {"fixed_n", fixed_n},     {"target_d", target_d},
            {"budget", budget},       {"max_stages", max_stages}};
  }
};

int policy_id_of(const std::string& name) {
  if (name == "cost_efficient") return SEQDES_POLICY_COST_EFFICIENT;
  if (name == "adhoc") return SEQDES_POLICY_ADHOC_GROWTH;
  if (name == "fixed") return SEQDES_POLICY_FIXED;
  std::fprintf(stderr, "error: unknown policy '%s'\n", name.c_str());
  std::exit(2);
}

// loads --rule FILE when given, otherwise the built-in reference coefficients
const seqdes_rule* resolve_rule(const SimFlags& flags) {
  seqdes_rule* rule = nullptr;
  if (!flags.rule_file.empty())
    check(seqdes_rule_load(flags.rule_file.c_str(), &rule));
  else
    check(seqdes_rule_reference(model_id(flags.model), &rule));
  return rule;  // leaked on purpose; process-lifetime object
}

std::string out_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cost-efficient sequential designs for binary response models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file");
  std::string out_dir;
  app.add_option("--out-dir", out_dir, "directory for output files")
      ->envname("SEQDES_OUT_DIR");

  // derive-canonical
  auto* canon = app.add_subcommand("derive-canonical",
                                   "derive the two-point D-optimal design");
  std::string canon_model = "cloglog";
  canon->add_option("--model", canon_model, "link model")->required();

  // estimate-gain
  auto* egain = app.add_subcommand(
      "estimate-gain", "Monte-Carlo fit of the expected information gain");
  SimFlags gain_flags;
  double grid_min = 1.0, grid_max = 100000.0;
  int grid_points = 60;
  long draws = 40000;
  std::string gain_out = "gain.json";
  egain->add_option("--model", gain_flags.model, "link model");
  egain->add_option("--grid-min", grid_min, "smallest D0 on the fit grid");
  egain->add_option("--grid-max", grid_max, "largest D0 on the fit grid");
  egain->add_option("--grid-points", grid_points, "number of grid points");
  egain->add_option("--draws", draws, "Monte-Carlo draws per grid point");
  egain->add_option("--seed", gain_flags.seed, "random seed")
      ->envname("SEQDES_SEED");
  egain->add_option("--out", gain_out, "output JSON file");

  // fit-rule
  auto* frule = app.add_subcommand(
      "fit-rule", "sweep the (D, C_S) grid and fit the stage-size rule");
  std::string frule_gain = "gain.json", frule_out = "rule.json", frule_sweep;
  frule->add_option("--gain", frule_gain, "gain JSON from estimate-gain")
      ->required();
  frule->add_option("--out", frule_out, "output rule JSON");
  frule->add_option("--sweep-csv", frule_sweep,
                    "also write the sweep table (d, cs, n_opt)");

  // suggest
  auto* sugg = app.add_subcommand("suggest", "suggest the next stage size");
  SimFlags sugg_flags;
  double sugg_a = 0.0, sugg_d = 0.0;
  sugg->add_option("--model", sugg_flags.model, "link model");
  sugg->add_option("--rule", sugg_flags.rule_file, "rule JSON from fit-rule");
  sugg->add_flag("--reference-coefficients,--paper-coefficients",
                 sugg_flags.reference_coefficients,
                 "use the published reference coefficients");
  sugg->add_option("--a-hat", sugg_a, "current slope estimate")->required();
  sugg->add_option("--d", sugg_d, "current information level D")->required();
  sugg->add_option("--stage-cost", sugg_flags.stage_cost, "stage cost");
  sugg->add_option("--stage-seconds", sugg_flags.stage_seconds,
                   "stage cost in seconds");
  sugg->add_option("--unit-seconds", sugg_flags.unit_seconds,
                   "seconds per measurement");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a sequential experiment");
  SimFlags sim_flags;
  int sim_reps = 1;
  std::string sim_out = "path";
  sim_flags.add_common(sim);
  sim->add_option("--policy", sim_flags.policy,
                  "sizing policy (cost_efficient|adhoc|fixed)");
  sim->add_option("--rule", sim_flags.rule_file, "rule JSON for cost_efficient");
  sim->add_flag("--reference-coefficients,--paper-coefficients",
                sim_flags.reference_coefficients,
                "use the published reference coefficients");
  sim->add_option("--adhoc-start", sim_flags.adhoc_start, "first adhoc stage size");
  sim->add_option("--adhoc-factor", sim_flags.adhoc_factor, "adhoc growth factor");
  sim->add_option("--fixed-n", sim_flags.fixed_n, "fixed stage size");
  sim->add_option("--replications", sim_reps,
                  "1: single path; >1: per-stage median path");
  sim->add_option("--out", sim_out, "output basename (.csv/.json appended)");

  // compare
  auto* cmp = app.add_subcommand(
      "compare", "compare two sizing policies over seeded replications");
  SimFlags cmp_flags;
  int cmp_reps = 100;
  std::string cmp_policy_a = "cost_efficient", cmp_policy_b = "adhoc";
  std::string cmp_out = "compare";
  cmp_flags.add_common(cmp);
  cmp->add_option("--policy-a", cmp_policy_a, "first policy");
  cmp->add_option("--policy-b", cmp_policy_b, "second policy");
  cmp->add_option("--rule", cmp_flags.rule_file,
                  "rule JSON for a cost_efficient arm");
  cmp->add_flag("--reference-coefficients,--paper-coefficients",
                cmp_flags.reference_coefficients,
                "use the published reference coefficients");
  cmp->add_option("--adhoc-start", cmp_flags.adhoc_start, "first adhoc stage size");
  cmp->add_option("--adhoc-factor", cmp_flags.adhoc_factor, "adhoc growth factor");
  cmp->add_option("--replications", cmp_reps, "number of replications");
  cmp->add_option("--out", cmp_out, "output basename");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (canon->parsed()) {
    seqdes_canonical_design cd{};
    check(seqdes_derive_canonical(model_id(canon_model), &cd));
    std::printf(
        "{\"model\":\"%s\",\"z1\":%.6g,\"z2\":%.6g,\"f1\":%.6g,\"f2\":%.6g,"
        "\"d_star\":%.6g}\n",
        canon_model.c_str(), cd.z1, cd.z2, cd.f1, cd.f2, cd.d_star);
    return 0;
  }

  if (egain->parsed()) {
    seqdes_gain* gain = nullptr;
    check(seqdes_gain_fit(model_id(gain_flags.model), grid_min, grid_max,
                          grid_points, draws, gain_flags.seed, &gain));
    const std::string path = out_path(out_dir, gain_out);
    check(seqdes_gain_save(gain, path.c_str()));
    write_manifest("estimate-gain",
                   {{"model", gain_flags.model},
                    {"grid_min", grid_min},
                    {"grid_max", grid_max},
                    {"grid_points", grid_points},
                    {"draws", draws}},
                   gain_flags.seed, {}, {path});
    std::printf("wrote %s\n", path.c_str());
    seqdes_gain_free(gain);
    return 0;
  }

  if (frule->parsed()) {
    seqdes_gain* gain = nullptr;
    check(seqdes_gain_load(frule_gain.c_str(), &gain));
    seqdes_rule* rule = nullptr;
    const std::string rule_path = out_path(out_dir, frule_out);
    const std::string sweep_path =
        frule_sweep.empty() ? "" : out_path(out_dir, frule_sweep);
    check(seqdes_rule_fit(gain, sweep_path.empty() ? nullptr : sweep_path.c_str(),
                          &rule));
    check(seqdes_rule_save(rule, rule_path.c_str()));
    double alpha, beta, gamma, delta, r2;
    check(seqdes_rule_coefficients(rule, &alpha, &beta, &gamma, &delta, &r2));
    std::vector<std::string> outputs = {rule_path};
    if (!sweep_path.empty()) outputs.push_back(sweep_path);
    write_manifest("fit-rule", {{"gain", frule_gain}}, 0, {frule_gain}, outputs);
    std::printf(
        "{\"alpha\":%.6g,\"beta\":%.6g,\"gamma\":%.6g,\"delta\":%.6g,"
        "\"r_squared\":%.6g}\n",
        alpha, beta, gamma, delta, r2);
    seqdes_rule_free(rule);
    seqdes_gain_free(gain);
    return 0;
  }

  if (sugg->parsed()) {
    const seqdes_rule* rule = resolve_rule(sugg_flags);
    long n = 0;
    check(seqdes_suggest(rule, sugg_a, sugg_d, sugg_flags.resolved_stage_cost(),
                         &n));
    std::printf("%ld\n", n);
    return 0;
  }

  if (sim->parsed()) {
    const int pid = policy_id_of(sim_flags.policy);
    const seqdes_rule* rule =
        pid == SEQDES_POLICY_COST_EFFICIENT ? resolve_rule(sim_flags) : nullptr;
    const auto cfg = sim_flags.to_config(pid, rule);
    const std::string csv = out_path(out_dir, sim_out + ".csv");
    const std::string json = out_path(out_dir, sim_out + ".json");
    double final_cost = 0.0;
    check(seqdes_simulate(&cfg, sim_reps, csv.c_str(), json.c_str(), &final_cost));
    auto params = sim_flags.to_json();
    params["replications"] = sim_reps;
    write_manifest("simulate", params, sim_flags.seed, {}, {csv, json});
    std::printf("{\"final_cost\":%.6g,\"csv\":\"%s\",\"json\":\"%s\"}\n",
                final_cost, csv.c_str(), json.c_str());
    return 0;
  }

  if (cmp->parsed()) {
    const int pid_a = policy_id_of(cmp_policy_a);
    const int pid_b = policy_id_of(cmp_policy_b);
    const seqdes_rule* rule =
        (pid_a == SEQDES_POLICY_COST_EFFICIENT ||
         pid_b == SEQDES_POLICY_COST_EFFICIENT)
            ? resolve_rule(cmp_flags)
            : nullptr;
    const auto cfg_a = cmp_flags.to_config(pid_a, rule);
    const auto cfg_b = cmp_flags.to_config(pid_b, rule);
    const std::string csv_a = out_path(out_dir, cmp_out + "_a.csv");
    const std::string csv_b = out_path(out_dir, cmp_out + "_b.csv");
    const std::string summary = out_path(out_dir, cmp_out + "_summary.json");
    double med_a = 0.0, med_b = 0.0;
    check(seqdes_compare(&cfg_a, &cfg_b, cmp_reps, cmp_flags.seed, csv_a.c_str(),
                         csv_b.c_str(), summary.c_str(), &med_a, &med_b));
    auto params = cmp_flags.to_json();
    params["policy_a"] = cmp_policy_a;
    params["policy_b"] = cmp_policy_b;
    params["replications"] = cmp_reps;
    write_manifest("compare", params, cmp_flags.seed, {},
                   {csv_a, csv_b, summary});
    std::printf(
        "{\"median_total_cost_a\":%.6g,\"median_total_cost_b\":%.6g,"
        "\"median_cost_difference\":%.6g}\n",
        med_a, med_b, med_b - med_a);
    return 0;
  }

  return 2;
}

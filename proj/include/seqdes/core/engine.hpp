#ifndef SEQDES_CORE_ENGINE_HPP
#define SEQDES_CORE_ENGINE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqdes/core/estimation.hpp"
#include "seqdes/core/glm.hpp"
#include "seqdes/core/stage_rule.hpp"

namespace seqdes {

struct SizingPolicy {
  enum class Kind { cost_efficient, adhoc_growth, fixed };
  Kind kind = Kind::cost_efficient;
  std::optional<StageRule> rule;  // required for cost_efficient
  double adhoc_start = 100.0;
  double adhoc_factor = 1.1;
  long fixed_n = 2;
};

struct Stopping {
  std::optional<double> target_d;
  std::optional<double> budget;
  std::optional<int> max_stages;
};

// state the sequential phase starts from (e.g. output of the initial search)
struct InitialState {
  ModelParams params;
  double d0 = 0.0;
  double cost0 = 0.0;
  std::optional<FisherInfo> info;  // reconstructed from d0 when absent
  std::vector<StageData> data;     // refits include these when present
};

struct ExperimentConfig {
  Link model = Link::cloglog;
  CostModel cost;
  SizingPolicy policy;
  Stopping stopping;
  std::uint64_t seed = 0;
};

struct StageRecord {
  int stage = 0;
  long n_k = 0;
  double x1 = 0.0, x2 = 0.0;
  long s1 = 0, s2 = 0;
  double a_hat = 0.0, b_hat = 0.0;
  double d = 0.0;
  double c = 0.0;
  std::string stop_reason;  // non-empty only on the final record
};

class InvalidPolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// binomial simulator with success probability F(a x + b)
Responder bernoulli_responder(Link link, const ModelParams& true_params,
                              std::uint64_t seed);

// Line-protocol adapter for external instruments: writes "MEASURE <x> <n>\n"
// and expects "RESULT <successes>\n"; anything else raises ProtocolError.
Responder stream_responder(std::istream& in, std::ostream& out);

std::vector<StageRecord> run_experiment(const ExperimentConfig& config,
                                        const Responder& responder,
                                        const InitialState& initial);

struct PathPoint {
  double d = 0.0;
  double c = 0.0;
};

struct CompareResult {
  std::vector<PathPoint> median_path_a;
  std::vector<PathPoint> median_path_b;
  std::vector<double> total_costs_a;  // successful replicates, replicate order
  std::vector<double> total_costs_b;
  double median_cost_a = 0.0;
  double median_cost_b = 0.0;
  int failures_a = 0;
  int failures_b = 0;
  // single-stage known-parameter reference: C(D) = theory_c0 + (D - theory_d0) * theory_slope
  double theory_d0 = 0.0;
  double theory_c0 = 0.0;
  double theory_slope = 0.0;
};

// Runs both configs `replications` times with per-replicate seeds shared
// between the two arms; fails only if more than 10% of an arm's replicates
// fail.
CompareResult compare_policies(const ExperimentConfig& config_a,
                               const ExperimentConfig& config_b, Link model,
                               const ModelParams& true_params,
                               const InitialState& initial, int replications,
                               std::uint64_t seed);

void write_path_csv(const std::vector<StageRecord>& records, std::ostream& out);
void write_path_csv(const std::vector<StageRecord>& records,
                    const std::string& path);
void write_path_json(const std::vector<StageRecord>& records,
                     const std::string& path);

// expected D after n further D-optimal measurements under known parameters
double theoretical_d_after(Link link, double d0, double n_measurements,
                           double a_true);

}  // namespace seqdes

#endif

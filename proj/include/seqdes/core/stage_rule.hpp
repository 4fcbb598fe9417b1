#ifndef SEQDES_CORE_STAGE_RULE_HPP
#define SEQDES_CORE_STAGE_RULE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "seqdes/core/gain.hpp"
#include "seqdes/core/glm.hpp"

namespace seqdes {

// stage cost in marginal-measurement units; the unit cost is normalized to 1
struct CostModel {
  double stage_cost = 1.0;
};

struct PathState {
  double d = 0.0;
  double c = 0.0;
};

// log-linear stage-size model:
// log n_k = alpha + beta log D + gamma log C_S + delta log D log C_S
struct StageRule {
  Link model = Link::cloglog;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double r_squared = 0.0;
};

struct SweepRow {
  double d = 0.0;
  double cs = 0.0;
  long n_opt = 0;
  bool valid = false;
};

class NoImprovementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AllCandidatesDegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// rounds to the nearest integer, then to the nearest even count; half-way
// cases resolve half-to-even on n/2
long round_even(double x);

// cut point of an n_k-candidate two-stage path with the one-stage benchmark
PathState cut_point(double d_prev, double c_prev, long n_k, double stage_cost,
                    const GainInterpolant& interp);

// candidate with the earliest (smallest D) cut point; ties go to smaller n_k
long optimal_stage_size(double d_prev, double stage_cost,
                        const GainInterpolant& interp,
                        const std::vector<long>& candidates);

// 368 even candidate sizes from 2 to 200000 with progressively coarser steps
const std::vector<long>& default_candidates();

std::vector<SweepRow> sweep_grid(const GainInterpolant& interp,
                                 const std::vector<double>& d_grid,
                                 const std::vector<double>& cs_grid,
                                 const std::vector<long>& candidates);

StageRule fit_stage_rule(Link model, const std::vector<SweepRow>& table);

long suggest_stage_size(const StageRule& rule, double a_hat, double d_prev,
                        double stage_cost);

// published reference coefficients, kept separate from freshly derived rules
const StageRule& reference_rule(Link link);

void save_rule_json(const StageRule& rule, const std::string& path);
StageRule load_rule_json(const std::string& path);
void save_sweep_csv(const std::vector<SweepRow>& table, const std::string& path);

}  // namespace seqdes

#endif

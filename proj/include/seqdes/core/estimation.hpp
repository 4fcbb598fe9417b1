#ifndef SEQDES_CORE_ESTIMATION_HPP
#define SEQDES_CORE_ESTIMATION_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "seqdes/core/glm.hpp"

namespace seqdes {

// grouped observations: s successes out of n trials at covariate x
struct StageData {
  double x = 0.0;
  long n = 0;
  long s = 0;
};

struct Estimate {
  ModelParams params;
  FisherInfo info;  // expected information at the estimate, all data
  double d = 0.0;
  bool converged = false;
};

class SeparationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InitialSearchFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double log_likelihood(Link link, const std::vector<StageData>& data,
                      const ModelParams& params);

// analytic score (gradient of the grouped log-likelihood w.r.t. (a, b))
std::pair<double, double> score(Link link, const std::vector<StageData>& data,
                                const ModelParams& params);

// Fisher scoring with step halving on internally standardized covariates.
// Throws SeparationError when no finite maximizer exists and
// DegenerateDesignError when the data cannot identify two parameters.
Estimate fit_mle(Link link, const std::vector<StageData>& data,
                 std::optional<ModelParams> start = std::nullopt);

// measurement source: respond(x, n) -> number of successes
using Responder = std::function<long(double, long)>;

struct InitialSearchResult {
  Estimate estimate;
  double cost = 0.0;  // probes + one stage cost per probe
  std::vector<StageData> data;
};

// Bisection on the covariate: probe the midpoint with n_probe trials, move
// toward the half where the response fraction crosses 1/2, stop once two
// probed points have mixed outcomes, then fit the MLE on everything seen.
InitialSearchResult initial_search(Link link, const Responder& responder,
                                   double x_low, double x_high, long n_probe,
                                   double stage_cost, int max_depth = 40);

}  // namespace seqdes

#endif

#include "seqdes/core/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqdes {

namespace {

void validate_cells(const std::vector<StageData>& data) {
  if (data.empty()) throw DegenerateDesignError("fit_mle: no data");
  for (const auto& c : data) {
    if (c.n < 1 || c.s < 0 || c.s > c.n)
      throw std::invalid_argument("fit_mle: cell must satisfy 0 <= s <= n, n >= 1");
    if (!std::isfinite(c.x)) throw std::invalid_argument("fit_mle: covariate not finite");
  }
}

// complete separation: every cell pure and the pure-success cells all lie on
// one side of the pure-failure cells
bool completely_separated(std::vector<StageData> data) {
  for (const auto& c : data)
    if (c.s != 0 && c.s != c.n) return false;
  std::sort(data.begin(), data.end(),
            [](const StageData& a, const StageData& b) { return a.x < b.x; });
  int flips = 0;
  for (std::size_t i = 1; i < data.size(); ++i)
    if ((data[i].s == data[i].n) != (data[i - 1].s == data[i - 1].n)) ++flips;
  return flips <= 1;
}

double loglik_std(Link link, const std::vector<StageData>& data, double center,
                  double range, double au, double bu) {
  double ll = 0.0;
  for (const auto& c : data) {
    const double z = au * (c.x - center) / range + bu;
    if (c.s > 0) ll += static_cast<double>(c.s) * log_response_prob(link, z);
    if (c.s < c.n)
      ll += static_cast<double>(c.n - c.s) * log_response_ccdf(link, z);
  }
  return ll;
}

}  // namespace

double log_likelihood(Link link, const std::vector<StageData>& data,
                      const ModelParams& params) {
  double ll = 0.0;
  for (const auto& c : data) {
    const double z = params.a * c.x + params.b;
    if (c.s > 0) ll += static_cast<double>(c.s) * log_response_prob(link, z);
    if (c.s < c.n)
      ll += static_cast<double>(c.n - c.s) * log_response_ccdf(link, z);
  }
  return ll;
}

std::pair<double, double> score(Link link, const std::vector<StageData>& data,
                                const ModelParams& params) {
  double ga = 0.0, gb = 0.0;
  for (const auto& c : data) {
    const double z = params.a * c.x + params.b;
    const double lf = std::log(response_density(link, z));
    double dldz = 0.0;
    if (c.s > 0)
      dldz += static_cast<double>(c.s) * std::exp(lf - log_response_prob(link, z));
    if (c.s < c.n) {
      // failure hazard f/(1-F); for cloglog it is exactly e^z, and the
      // generic log-difference cancels catastrophically for large z
      const double hazard = (link == Link::cloglog)
                                ? std::exp(z)
                                : std::exp(lf - log_response_ccdf(link, z));
      dldz -= static_cast<double>(c.n - c.s) * hazard;
    }
    ga += dldz * c.x;
    gb += dldz;
  }
  return {ga, gb};
}

Estimate fit_mle(Link link, const std::vector<StageData>& data,
                 std::optional<ModelParams> start) {
  validate_cells(data);

  double xmin = data[0].x, xmax = data[0].x;
  long total = 0, succ = 0;
  for (const auto& c : data) {
    xmin = std::min(xmin, c.x);
    xmax = std::max(xmax, c.x);
    total += c.n;
    succ += c.s;
  }
  if (xmax == xmin)
    throw DegenerateDesignError("fit_mle: all covariate values identical");
  if (total < 2) throw DegenerateDesignError("fit_mle: fewer than 2 trials");
  if (completely_separated(data))
    throw SeparationError("fit_mle: data are completely separated");

  const double center = 0.5 * (xmin + xmax);
  const double range = xmax - xmin;

  double au, bu;
  if (start) {
    au = start->a * range;
    bu = start->b + start->a * center;
  } else {
    const double pbar = std::clamp(
        static_cast<double>(succ) / static_cast<double>(total), 1e-6, 1.0 - 1e-6);
    au = 0.1;
    bu = response_quantile(link, pbar);
  }

  // standardized design for the expected-information step
  std::vector<StageData> sdata = data;
  for (auto& c : sdata) c.x = (c.x - center) / range;

  double ll = loglik_std(link, data, center, range, au, bu);
  bool converged = false;
  bool a_monotone = true;
  double prev_abs_a = std::fabs(au);

  const int max_iter = 200;
  for (int iter = 0; iter < max_iter; ++iter) {
    const ModelParams p{au, bu};
    auto [ga, gb] = score(link, sdata, p);

    FisherInfo j;
    for (const auto& c : sdata) {
      const double z = au * c.x + bu;
      const double w = static_cast<double>(c.n) * info_weight(link, z);
      j.j11 += w * c.x * c.x;
      j.j12 += w * c.x;
      j.j22 += w;
    }
    const double det = j.j11 * j.j22 - j.j12 * j.j12;
    if (!(det > 0.0) || !std::isfinite(det))
      throw SeparationError("fit_mle: information matrix collapsed");

    double da = (j.j22 * ga - j.j12 * gb) / det;
    double db = (j.j11 * gb - j.j12 * ga) / det;

    // step halving on likelihood decrease
    double step = 1.0;
    double na = au, nb = bu, nll = ll;
    bool accepted = false;
    for (int half = 0; half < 25; ++half) {
      na = au + step * da;
      nb = bu + step * db;
      nll = loglik_std(link, data, center, range, na, nb);
      if (std::isfinite(nll) && nll >= ll - 1e-13 * std::fabs(ll)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stationary up to numerics

    const double rel = std::max(std::fabs(na - au), std::fabs(nb - bu)) /
                       std::max(1.0, std::max(std::fabs(na), std::fabs(nb)));
    au = na;
    bu = nb;
    ll = nll;

    if (std::fabs(au) > 1e6)
      throw SeparationError("fit_mle: slope diverged, data are separated");
    if (std::fabs(au) < prev_abs_a) a_monotone = false;
    prev_abs_a = std::fabs(au);

    if (rel < 1e-9 || std::max(std::fabs(ga), std::fabs(gb)) < 1e-10) {
      converged = true;
      break;
    }
  }

  if (!converged && a_monotone && std::fabs(au) > 20.0)
    throw SeparationError("fit_mle: monotone likelihood, no finite maximizer");

  Estimate est;
  est.params.a = au / range;
  est.params.b = bu - au * center / range;
  std::vector<DesignPoint> pts;
  pts.reserve(data.size());
  for (const auto& c : data) pts.push_back({c.x, c.n});
  est.info = fisher_info(link, est.params, pts);
  est.d = d_criterion(est.info);
  est.converged = converged;
  return est;
}

InitialSearchResult initial_search(Link link, const Responder& responder,
                                   double x_low, double x_high, long n_probe,
                                   double stage_cost, int max_depth) {
  if (!(x_low < x_high))
    throw std::invalid_argument("initial_search: requires x_low < x_high");
  if (n_probe < 4 || n_probe % 2 != 0)
    throw std::invalid_argument("initial_search: n_probe must be even and >= 4");

  InitialSearchResult out;
  double lo = x_low, hi = x_high;
  for (int depth = 0; depth < max_depth; ++depth) {
    const double mid = 0.5 * (lo + hi);
    const long s = responder(mid, n_probe);
    if (s < 0 || s > n_probe)
      throw std::invalid_argument("initial_search: responder returned bad count");
    out.data.push_back({mid, n_probe, s});
    out.cost += stage_cost + static_cast<double>(n_probe);

    int mixed = 0;
    for (const auto& c : out.data)
      if (c.s > 0 && c.s < c.n) ++mixed;
    if (mixed >= 2) {
      try {
        out.estimate = fit_mle(link, out.data);
        return out;
      } catch (const SeparationError&) {
      } catch (const DegenerateDesignError&) {
      }
    }
    if (2 * s > n_probe)
      hi = mid;
    else
      lo = mid;
  }
  throw InitialSearchFailed(
      "initial_search: no identifiable dataset within the depth budget");
}

}  // namespace seqdes

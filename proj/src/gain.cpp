#include "seqdes/core/gain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "seqdes/core/canonical.hpp"
#include "seqdes/core/linalg.hpp"
#include "seqdes/core/rng.hpp"

namespace seqdes {

namespace {

constexpr long kBlockSize = 65536;

struct Chol2 {
  double l11, l21, l22;
};

// Cholesky factor of (((d0/d_star)^2) J*)^{-1}: the estimate standard errors
// shrink proportionally to 1/d0.  The quadratic information scaling is what
// reproduces the published stage-size regression; linear scaling (covariance
// ~ 1/d0) yields a visibly shallower n(D) relationship.
Chol2 covariance_chol(const CanonicalDesign& cd, double d0) {
  const double scale = (d0 / cd.d_star) * (d0 / cd.d_star);
  const double j11 = scale * cd.j_star.j11;
  const double j12 = scale * cd.j_star.j12;
  const double j22 = scale * cd.j_star.j22;
  const double det = j11 * j22 - j12 * j12;
  if (!(det > 0.0))
    throw std::runtime_error("simulate_gain: information matrix not invertible");
  const double c11 = j22 / det, c12 = -j12 / det, c22 = j11 / det;
  Chol2 ch;
  ch.l11 = std::sqrt(c11);
  ch.l21 = c12 / ch.l11;
  ch.l22 = std::sqrt(c22 - ch.l21 * ch.l21);
  return ch;
}

double draw_gain(Link link, const CanonicalDesign& cd, const Chol2& ch, Rng& rng,
                 bool& degenerate) {
  const double n1 = rng.normal();
  const double n2 = rng.normal();
  const double a_hat = 1.0 + ch.l11 * n1;
  const double b_hat = ch.l21 * n1 + ch.l22 * n2;
  if (a_hat == 0.0) {
    degenerate = true;
    return 0.0;
  }
  const double z1 = (cd.z1_star - b_hat) / a_hat;
  const double z2 = (cd.z2_star - b_hat) / a_hat;
  const double v = two_point_d(link, z1, z2);
  if (!std::isfinite(v)) {
    degenerate = true;
    return 0.0;
  }
  degenerate = false;
  return v;
}

}  // namespace

GainSample simulate_gain(Link link, double d0, long draws, std::uint64_t seed,
                         const std::vector<double>& percentile_probs) {
  if (!(d0 > 0.0)) throw std::invalid_argument("simulate_gain: d0 must be > 0");
  if (draws < 1000)
    throw std::invalid_argument("simulate_gain: need at least 1000 draws");

  const CanonicalDesign& cd = derive_canonical(link);
  const Chol2 ch = covariance_chol(cd, d0);

  GainSample out;
  out.d0 = d0;
  out.draws = draws;

  std::vector<double> values;
  if (!percentile_probs.empty()) values.reserve(static_cast<std::size_t>(draws));

  double sum = 0.0, sumsq = 0.0;
  const long blocks = (draws + kBlockSize - 1) / kBlockSize;
  for (long b = 0; b < blocks; ++b) {
    Rng rng(stream_seed(seed, static_cast<std::uint64_t>(b)));
    const long lo = b * kBlockSize;
    const long hi = std::min(draws, lo + kBlockSize);
    for (long i = lo; i < hi; ++i) {
      bool degen = false;
      const double v = draw_gain(link, cd, ch, rng, degen);
      if (degen) ++out.degenerate;
      sum += v;
      sumsq += v * v;
      if (!percentile_probs.empty()) values.push_back(v);
    }
  }

  const double n = static_cast<double>(draws);
  out.mean_gain = sum / n;
  const double var = std::max(0.0, sumsq / n - out.mean_gain * out.mean_gain);
  out.std_error = std::sqrt(var / n);

  if (!percentile_probs.empty()) {
    std::sort(values.begin(), values.end());
    for (double p : percentile_probs) {
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("simulate_gain: percentile outside [0,1]");
      const auto idx = static_cast<std::size_t>(
          std::llround(p * static_cast<double>(draws - 1)));
      out.percentiles.emplace_back(p, values[idx]);
    }
  }
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo && n >= 2))
    throw std::invalid_argument("log_spaced: bad range");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * i / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> natural_spline_basis(double x, const std::vector<double>& knots) {
  const std::size_t K = knots.size();
  if (K < 3) throw std::invalid_argument("natural_spline_basis: need >= 3 knots");
  auto cube = [](double t) { return t > 0.0 ? t * t * t : 0.0; };
  auto d = [&](std::size_t k) {
    return (cube(x - knots[k]) - cube(x - knots[K - 1])) / (knots[K - 1] - knots[k]);
  };
  std::vector<double> basis(K - 2);
  const double dlast = d(K - 2);
  for (std::size_t k = 0; k + 2 < K; ++k) basis[k] = d(k) - dlast;
  return basis;
}

double GainInterpolant::eval(double d0) const {
  if (!(d0 > 0.0))
    throw std::invalid_argument("eval_gain: d0 must be > 0");
  const double x = std::clamp(std::log(d0), log_d_min, log_d_max);
  const std::size_t m = table_x.size();
  const double dx = (log_d_max - log_d_min) / static_cast<double>(m - 1);
  const double pos = (x - log_d_min) / dx;
  std::size_t i = std::min(static_cast<std::size_t>(pos), m - 2);
  const double t = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  return table_y[i] * (1.0 - t) + table_y[i + 1] * t;
}

GainInterpolant fit_gain(Link link, const std::vector<double>& grid, long draws,
                         std::uint64_t seed, std::vector<GainSample>* samples_out) {
  if (grid.size() < 20)
    throw std::invalid_argument("fit_gain: grid needs at least 20 points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("fit_gain: grid must be strictly increasing");
  if (grid.front() > 1.0 + 1e-9 || grid.back() < 1000.0 - 1e-6)
    throw std::invalid_argument("fit_gain: grid must span [1, 1000]");

  const CanonicalDesign& cd = derive_canonical(link);
  const std::size_t npts = grid.size();
  std::vector<GainSample> samples(npts);

  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  std::vector<std::future<void>> futures;
  futures.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < npts; i += workers)
        samples[i] =
            simulate_gain(link, grid[i], draws,
                          stream_seed(seed, 0x10000ULL + i));
    }));
  }
  for (auto& f : futures) f.get();

  GainInterpolant interp;
  interp.model = link;
  interp.d_star = cd.d_star;

  std::vector<double> x(npts), u(npts), wsq(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    const double m = samples[i].mean_gain;
    if (!(m > 0.0) || !(m < cd.d_star))
      throw std::runtime_error(
          "fit_gain: mean gain outside (0, d_star); increase the draw budget");
    x[i] = std::log(grid[i]);
    u[i] = std::log((cd.d_star - m) / m);  // so that m = d_star/(1+exp(u))
    // delta-method precision of u: du/dm = -d_star / (m (d_star - m)), so
    // points hugging the asymptote carry almost no information about u
    const double se = std::max(samples[i].std_error, 1e-8);
    wsq[i] = m * (cd.d_star - m) / (cd.d_star * se);
  }

  // stage 1: logistic base, u ~ eta + theta * log d0 (weighted)
  {
    std::vector<double> design(npts * 2), target(npts);
    for (std::size_t i = 0; i < npts; ++i) {
      design[i * 2] = wsq[i];
      design[i * 2 + 1] = wsq[i] * x[i];
      target[i] = wsq[i] * u[i];
    }
    auto coef = least_squares(design, target, npts, 2);
    interp.eta = coef[0];
    interp.theta = coef[1];
  }

  // stage 2: natural cubic spline on the residuals, 8 interior knots
  interp.log_d_min = x.front();
  interp.log_d_max = x.back();
  const std::size_t nknots = 10;  // 2 boundary + 8 interior
  interp.knots.resize(nknots);
  for (std::size_t k = 0; k < nknots; ++k)
    interp.knots[k] =
        x.front() + (x.back() - x.front()) * static_cast<double>(k) /
                        static_cast<double>(nknots - 1);
  {
    // full natural-spline family: constant and linear terms belong to the
    // basis too; without them the correction is pinned to zero at the first
    // knot. They fold back into (eta, theta) afterwards.
    const std::size_t nb = nknots;
    std::vector<double> design(npts * nb), resid(npts);
    for (std::size_t i = 0; i < npts; ++i) {
      const auto basis = natural_spline_basis(x[i], interp.knots);
      design[i * nb] = wsq[i];
      design[i * nb + 1] = wsq[i] * x[i];
      for (std::size_t k = 0; k + 2 < nb; ++k)
        design[i * nb + 2 + k] = wsq[i] * basis[k];
      resid[i] = wsq[i] * (u[i] - (interp.eta + interp.theta * x[i]));
    }
    const auto coef = least_squares(design, resid, npts, nb);
    interp.eta += coef[0];
    interp.theta += coef[1];
    interp.spline_coef.assign(coef.begin() + 2, coef.end());
  }

  // dense evaluation table with isotonic projection; raw Monte-Carlo noise
  // must not leave h decreasing anywhere
  const std::size_t m = 2001;
  interp.table_x.resize(m);
  interp.table_y.resize(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = interp.log_d_min +
                      (interp.log_d_max - interp.log_d_min) *
                          static_cast<double>(i) / static_cast<double>(m - 1);
    double uu = interp.eta + interp.theta * xi;
    const auto basis = natural_spline_basis(xi, interp.knots);
    for (std::size_t k = 0; k < basis.size(); ++k)
      uu += interp.spline_coef[k] * basis[k];
    double y = cd.d_star / (1.0 + std::exp(uu));
    y = std::clamp(y, 1e-300, cd.d_star * (1.0 - 1e-12));
    running = std::max(running, y);
    interp.table_x[i] = xi;
    interp.table_y[i] = running;
  }

  if (samples_out) *samples_out = std::move(samples);
  return interp;
}

void save_gain_json(const GainInterpolant& interp,
                    const std::vector<GainSample>& samples,
                    const std::string& path) {
  nlohmann::json j;
  j["schema"] = "seqdes.gain.v1";
  j["model"] = link_name(interp.model);
  j["d_star"] = interp.d_star;
  j["eta"] = interp.eta;
  j["theta"] = interp.theta;
  j["knots"] = interp.knots;
  j["spline_coef"] = interp.spline_coef;
  j["log_d_min"] = interp.log_d_min;
  j["log_d_max"] = interp.log_d_max;
  j["table_x"] = interp.table_x;
  j["table_y"] = interp.table_y;
  auto& rows = j["samples"] = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json r;
    r["d0"] = s.d0;
    r["draws"] = s.draws;
    r["mean_gain"] = s.mean_gain;
    r["std_error"] = s.std_error;
    r["degenerate"] = s.degenerate;
    r["percentiles"] = s.percentiles;
    rows.push_back(std::move(r));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

GainInterpolant load_gain_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("schema", "") != "seqdes.gain.v1")
    throw std::runtime_error("unrecognized gain file schema in " + path);
  GainInterpolant interp;
  interp.model = link_from_string(j.at("model").get<std::string>());
  interp.d_star = j.at("d_star").get<double>();
  interp.eta = j.at("eta").get<double>();
  interp.theta = j.at("theta").get<double>();
  interp.knots = j.at("knots").get<std::vector<double>>();
  interp.spline_coef = j.at("spline_coef").get<std::vector<double>>();
  interp.log_d_min = j.at("log_d_min").get<double>();
  interp.log_d_max = j.at("log_d_max").get<double>();
  interp.table_x = j.at("table_x").get<std::vector<double>>();
  interp.table_y = j.at("table_y").get<std::vector<double>>();
  if (interp.table_x.size() != interp.table_y.size() || interp.table_x.size() < 2)
    throw std::runtime_error("corrupt gain table in " + path);
  return interp;
}

}  // namespace seqdes

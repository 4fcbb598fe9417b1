#include "seqdes/core/glm.hpp"

#include <cmath>
#include <stdexcept>

namespace seqdes {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;  // log(sqrt(2*pi))
// beyond 3.7 the inner exp(exp(z)) overflows; g there is < 1e-15 anyway
constexpr double kCloglogZMax = 3.7;
constexpr double kCloglogZMin = -700.0;

double norm_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double log_norm_cdf(double z) {
  if (z > -37.0) {
    const double c = norm_cdf(z);
    if (c > 0.0) return std::log(c);
  }
  // asymptotic expansion of the lower tail
  const double z2 = z * z;
  return -0.5 * z2 - kLogSqrt2Pi - std::log(-z) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

// Acklam's rational approximation to the standard normal quantile;
// |relative error| < 1.2e-9, plenty for starting values
double norm_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

Link link_from_string(const std::string& name) {
  if (name == "logit") return Link::logit;
  if (name == "probit") return Link::probit;
  if (name == "cloglog") return Link::cloglog;
  throw std::invalid_argument("unknown link model: " + name);
}

const char* link_name(Link link) {
  switch (link) {
    case Link::logit: return "logit";
    case Link::probit: return "probit";
    case Link::cloglog: return "cloglog";
  }
  return "?";
}

double response_prob(Link link, double z) {
  switch (link) {
    case Link::logit:
      return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                      : std::exp(z) / (1.0 + std::exp(z));
    case Link::probit:
      return norm_cdf(z);
    case Link::cloglog: {
      const double t = std::exp(std::min(z, kCloglogZMax));
      return -std::expm1(-t);
    }
  }
  return 0.0;
}

double log_response_prob(Link link, double z) {
  switch (link) {
    case Link::logit:
      return -std::log1p(std::exp(-z));
    case Link::probit:
      return log_norm_cdf(z);
    case Link::cloglog: {
      const double t = std::exp(z);
      if (t < 1e-8) return std::log(t) + std::log1p(-0.5 * t);
      return std::log(-std::expm1(-t));
    }
  }
  return 0.0;
}

double log_response_ccdf(Link link, double z) {
  switch (link) {
    case Link::logit:
      return -std::log1p(std::exp(z));
    case Link::probit:
      return log_norm_cdf(-z);
    case Link::cloglog:
      // exact: log(1 - F) = -e^z; overflows to -inf only past z ~ 709
      return -std::exp(z);
  }
  return 0.0;
}

double response_density(Link link, double z) {
  switch (link) {
    case Link::logit: {
      const double e = std::exp(-std::fabs(z));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Link::probit:
      return norm_pdf(z);
    case Link::cloglog:
      // exp(z - e^z) underflows gracefully in the right tail; no clamp
      return std::exp(z - std::exp(z));
  }
  return 0.0;
}

double response_quantile(Link link, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("response_quantile: p must be in (0,1)");
  switch (link) {
    case Link::logit:
      return std::log(p / (1.0 - p));
    case Link::probit:
      return norm_quantile(p);
    case Link::cloglog:
      return std::log(-std::log1p(-p));
  }
  return 0.0;
}

double info_weight(Link link, double z) {
  switch (link) {
    case Link::logit: {
      const double e = std::exp(-std::fabs(z));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Link::probit: {
      const double lphi = -0.5 * z * z - kLogSqrt2Pi;
      return std::exp(2.0 * lphi - log_norm_cdf(z) - log_norm_cdf(-z));
    }
    case Link::cloglog: {
      // e^{2z} / (e^{e^z} - 1) via logs to dodge the double overflow
      const double zc = std::min(std::max(z, kCloglogZMin), kCloglogZMax);
      const double t = std::exp(zc);
      return std::exp(2.0 * zc - std::log(std::expm1(t)));
    }
  }
  return 0.0;
}

FisherInfo fisher_info(Link link, const ModelParams& params,
                       std::span<const DesignPoint> design) {
  FisherInfo info;
  for (const auto& pt : design) {
    const double z = params.a * pt.x + params.b;
    const double w = static_cast<double>(pt.n) * info_weight(link, z);
    info.j11 += w * pt.x * pt.x;
    info.j12 += w * pt.x;
    info.j22 += w;
  }
  return info;
}

double d_criterion(const FisherInfo& info) {
  const double det = info.j11 * info.j22 - info.j12 * info.j12;
  if (det < 0.0) {
    const double scale = info.j11 * info.j22 + info.j12 * info.j12;
    if (det < -1e-12 * std::max(scale, 1.0))
      throw std::invalid_argument("d_criterion: information matrix is not PSD");
    return 0.0;
  }
  return std::sqrt(det);
}

}  // namespace seqdes

#ifndef SEQDES_CORE_GLM_HPP
#define SEQDES_CORE_GLM_HPP

#include <span>
#include <string>
#include <vector>

namespace seqdes {

enum class Link { logit, probit, cloglog };

Link link_from_string(const std::string& name);
const char* link_name(Link link);

// slope/intercept of the linear predictor z = a*x + b
struct ModelParams {
  double a = 1.0;
  double b = 0.0;
};

struct DesignPoint {
  double x = 0.0;
  long n = 0;
};

// symmetric 2x2 expected information; j11 pairs with the slope a
struct FisherInfo {
  double j11 = 0.0;
  double j12 = 0.0;
  double j22 = 0.0;

  FisherInfo& operator+=(const FisherInfo& o) {
    j11 += o.j11;
    j12 += o.j12;
    j22 += o.j22;
    return *this;
  }
  friend FisherInfo operator+(FisherInfo a, const FisherInfo& b) { return a += b; }
  friend FisherInfo operator*(double s, FisherInfo m) {
    m.j11 *= s;
    m.j12 *= s;
    m.j22 *= s;
    return m;
  }
};

// response curve F(z)
double response_prob(Link link, double z);
// log F(z) and log(1 - F(z)), stable in both tails
double log_response_prob(Link link, double z);
double log_response_ccdf(Link link, double z);
// density F'(z)
double response_density(Link link, double z);
// quantile F^{-1}(p), p in (0,1); used for starting values
double response_quantile(Link link, double p);

// information weight g(z)
double info_weight(Link link, double z);

FisherInfo fisher_info(Link link, const ModelParams& params,
                       std::span<const DesignPoint> design);

// sqrt(max(0, det J)); determinants below -1e-12 relative indicate an
// upstream invariant violation and throw
double d_criterion(const FisherInfo& info);

}  // namespace seqdes

#endif

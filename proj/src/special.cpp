#include "gmq/special.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

#include "gmq/error.hpp"

namespace gmq {

double std_normal_pdf(double x) noexcept {
  if (!std::isfinite(x)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * kInvSqrt2); }

double std_normal_sf(double x) noexcept { return 0.5 * std::erfc(x * kInvSqrt2); }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::InvalidArgument, "normal quantile needs p in [0, 1]");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double chi2_cdf(double x, int dof) {
  if (dof < 1) throw Error(ErrorKind::InvalidArgument, "chi2_cdf needs dof >= 1");
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, int dof) {
  if (dof < 1) throw Error(ErrorKind::InvalidArgument, "chi2_quantile needs dof >= 1");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * boost::math::gamma_p_inv(0.5 * dof, p);
}

double chi_shell_first_moment(double lo, double hi, int dof) {
  if (dof < 1) throw Error(ErrorKind::InvalidArgument, "chi moment needs dof >= 1");
  // int r f_chi(r) dr = sqrt2 * Gamma((k+1)/2) / Gamma(k/2) * P((k+1)/2, r^2/2)
  const double a = 0.5 * (dof + 1);
  const double scale =
      std::sqrt(2.0) * std::exp(std::lgamma(a) - std::lgamma(0.5 * dof));
  auto cumulative = [&](double r2) {
    if (!(r2 > 0.0)) return 0.0;
    if (std::isinf(r2)) return 1.0;
    return boost::math::gamma_p(a, 0.5 * r2);
  };
  if (std::isinf(hi)) {
    const double upper = lo > 0.0 ? boost::math::gamma_q(a, 0.5 * lo) : 1.0;
    return scale * upper;
  }
  return scale * (cumulative(hi) - cumulative(lo));
}

}  // namespace gmq

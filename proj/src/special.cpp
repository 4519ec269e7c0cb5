#include "skewsing/special.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>

#include "skewsing/error.hpp"

namespace skewsing::special {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

bool is_small_integer(double nu) {
  return nu >= 1.0 && nu <= 200.0 && std::floor(nu) == nu;
}

// Returns F(t) - 1/2 for t >= 0 using the finite-sum closed forms.
double t_upper_half(double t, int nu) {
  if (nu % 2 == 0) {
    const double x = t / std::sqrt(nu + t * t);
    const double w = 1.0 - x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j < nu / 2; ++j) {
      term *= w * (2.0 * j - 1.0) / (2.0 * j);
      sum += term;
    }
    return 0.5 * x * sum;
  }
  const double theta = std::atan(t / std::sqrt(static_cast<double>(nu)));
  if (nu == 1) return theta / kPi;
  const double c = std::cos(theta);
  const double c2 = c * c;
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j <= (nu - 3) / 2; ++j) {
    term *= c2 * (2.0 * j) / (2.0 * j + 1.0);
    sum += term;
  }
  return (theta + std::sin(theta) * c * sum) / kPi;
}

double t_cdf_boost(double x, double nu) {
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::cdf(dist, x);
}

}  // namespace

double normal_pdf(double x) noexcept {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / kSqrt2);
}

double normal_log_cdf(double x) noexcept {
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / kSqrt2));
  if (x > -37.0) return std::log(0.5 * std::erfc(-x / kSqrt2));
  // Mills-ratio asymptotics; erfc underflows below this point.
  const double r = 1.0 / (x * x);
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) +
         std::log1p(-r + 3.0 * r * r - 15.0 * r * r * r);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::DomainError, "normal_quantile: p must lie in (0,1)");
  }
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double logistic_cdf(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logistic_log_cdf(double x) noexcept {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double student_t_pdf(double x, double nu) noexcept {
  return std::exp(student_t_log_pdf(x, nu));
}

double student_t_log_pdf(double x, double nu) noexcept {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * kPi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double student_t_cdf(double x, double nu) {
  if (!(nu > 0.0)) {
    throw Error(ErrorCode::DomainError, "student_t_cdf: nu must be positive");
  }
  if (std::isnan(x)) return x;
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  if (!is_small_integer(nu)) return t_cdf_boost(x, nu);
  const double half = t_upper_half(std::fabs(x), static_cast<int>(nu));
  const double lower = 0.5 - half;
  if (lower < 1e-6) {
    // Cancellation regime; the incomplete beta route keeps relative accuracy.
    const double tail = t_cdf_boost(-std::fabs(x), nu);
    return x < 0 ? tail : 1.0 - tail;
  }
  return x < 0 ? lower : 0.5 + half;
}

double student_t_log_cdf(double x, double nu) {
  if (x < 0.0) return std::log(student_t_cdf(x, nu));
  return std::log1p(-student_t_cdf(-x, nu));
}

double chi2_1_upper_tail(double x) noexcept {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

double chi2_1_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorCode::DomainError, "chi2_1_quantile: p must lie in [0,1)");
  }
  const double z = normal_quantile(0.5 * (1.0 + p));
  return z * z;
}

}  // namespace skewsing::special

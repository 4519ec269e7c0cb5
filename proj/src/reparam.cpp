#include <algorithm>
#include <cmath>

#include "skewsing/error.hpp"
#include "skewsing/numerics.hpp"
#include "skewsing/reparam.hpp"
#include "skewsing/special.hpp"

namespace skewsing {

namespace {

constexpr double kPi = special::kPi;
constexpr double kB = 1.0 - 2.0 / kPi;  // 1 - 2/pi

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void require_a(double a) {
  if (a == 0.0 || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be nonzero");
}

double gamma1_scale() { return 0.5 * (4.0 - kPi) * std::pow(2.0 / kPi, 1.5); }

double scale_back(double sigma_k, double delta, double a) {
  const double factor = 1.0 - 2.0 * delta * delta / (a * a);
  if (factor == 0.0) throw Error(ErrorCode::DomainError, "1 - 2 delta^2/a^2 vanishes");
  const double sigma = sigma_k / factor;
  if (!(sigma > 0.0)) throw Error(ErrorCode::DomainError, "implied sigma is not positive");
  return sigma;
}

}  // namespace

double cp_gamma1_bound() { return gamma1_scale() * std::pow(kB, -1.5); }

Theta1 to_reparam1(const ThetaOriginal& t, double a) {
  t.validate();
  require_a(a);
  return {t.mu + 2.0 * t.delta * t.sigma / a, t.sigma, sgn(t.delta) * t.delta * t.delta};
}

ThetaOriginal from_reparam1(const Theta1& t, double a) {
  require_a(a);
  const double delta = sgn(t.delta1) * std::sqrt(std::fabs(t.delta1));
  ThetaOriginal out{t.mu1 - 2.0 * delta * t.sigma1 / a, t.sigma1, delta};
  out.validate();
  return out;
}

Theta2 to_reparam2(const ThetaOriginal& t, double a) {
  t.validate();
  require_a(a);
  const double d = t.delta;
  return {t.mu + 2.0 * d * t.sigma / a, t.sigma * (1.0 - 2.0 * d * d / (a * a)), d * d * d};
}

ThetaOriginal from_reparam2(const Theta2& t, double a) {
  require_a(a);
  const double delta = std::cbrt(t.delta2);
  const double sigma = scale_back(t.sigma2, delta, a);
  ThetaOriginal out{t.mu2 - 2.0 * delta * sigma / a, sigma, delta};
  out.validate();
  return out;
}

Theta3 to_reparam3(const ThetaOriginal& t, double a, double alpha1) {
  t.validate();
  require_a(a);
  const double d = t.delta;
  const double d2 = d * d;
  return {t.mu + 2.0 / a * t.sigma * d + (-8.0 / (a * a * a) + alpha1 / 3.0) * t.sigma * d2 * d,
          t.sigma * (1.0 - 2.0 * d2 / (a * a)), sgn(d) * d2 * d2};
}

ThetaOriginal from_reparam3(const Theta3& t, double a, double alpha1) {
  require_a(a);
  const double delta = sgn(t.delta3) * std::sqrt(std::sqrt(std::fabs(t.delta3)));
  const double sigma = scale_back(t.sigma3, delta, a);
  const double mu = t.mu3 - 2.0 / a * sigma * delta -
                    (-8.0 / (a * a * a) + alpha1 / 3.0) * sigma * delta * delta * delta;
  ThetaOriginal out{mu, sigma, delta};
  out.validate();
  return out;
}

ThetaCP cp_forward(const ThetaOriginal& t) {
  t.validate();
  const double d = t.delta;
  const double d2 = d * d;
  const double q = 1.0 + kB * d2;
  ThetaCP c;
  c.theta1 = t.mu + t.sigma * std::sqrt(2.0 / kPi) * d / std::sqrt(1.0 + d2);
  c.theta2 = t.sigma * std::sqrt(q) / std::sqrt(1.0 + d2);
  c.gamma1 = gamma1_scale() * d2 * d * std::pow(q, -1.5);
  return c;
}

bool is_skew_normal(const SkewSymmetricFamily& fam) {
  for (double z = -6.0; z <= 6.0; z += 0.25) {
    if (std::fabs(fam.kernel().density(z) - special::normal_pdf(z)) > 1e-12) return false;
    for (double d : {-2.0, -0.5, 0.7, 3.0}) {
      if (std::fabs(fam.skewing().pi(z, d) - special::normal_cdf(d * z)) > 1e-12) return false;
    }
  }
  return true;
}

ThetaCP cp_forward(const SkewSymmetricFamily& fam, const ThetaOriginal& t) {
  if (!is_skew_normal(fam)) {
    throw Error(ErrorCode::NotSkewNormal, "the centred parametrization is defined for the skew-normal only");
  }
  return cp_forward(t);
}

ThetaOriginal cp_inverse(const ThetaCP& c) {
  if (!std::isfinite(c.theta1) || !std::isfinite(c.gamma1) || !(c.theta2 > 0.0) ||
      !std::isfinite(c.theta2)) {
    throw Error(ErrorCode::InvalidArgument, "cp_inverse: theta2 must be positive, all finite");
  }
  if (!(std::fabs(c.gamma1) < cp_gamma1_bound())) {
    throw Error(ErrorCode::SkewnessOutOfRange, "|gamma1| must stay below the skew-normal bound 0.99527");
  }
  // gamma1 = K u^3 with u = delta / sqrt(1 + b delta^2).
  const double u = std::cbrt(c.gamma1 / gamma1_scale());
  const double u2 = u * u;
  const double delta = u / std::sqrt(1.0 - kB * u2);
  const double d2 = delta * delta;
  const double sigma = c.theta2 * std::sqrt(1.0 + d2) / std::sqrt(1.0 + kB * d2);
  const double mu = c.theta1 - sigma * std::sqrt(2.0 / kPi) * delta / std::sqrt(1.0 + d2);
  return {mu, sigma, delta};
}

double appendix_score_ours(double mu2, double sigma2, double delta2, double x) {
  if (delta2 == 0.0 || !(sigma2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "appendix score needs delta2 != 0 and sigma2 > 0");
  }
  const double pi = kPi;
  const double s2pi = std::sqrt(2.0 * pi);
  const double d = delta2;
  const double d13 = std::cbrt(d);
  const double d23 = d13 * d13;
  const double y = x - mu2;
  const double s = sigma2;

  const double arg = (s2pi * d23 * s - d * y + pi * d13 * y) / (pi * s);
  const double Phi = special::normal_cdf(arg);

  const double e = std::exp(-d23 * std::pow(s2pi * d13 * s - d23 * y + pi * y, 2) /
                            (2.0 * pi * pi * s * s));
  const double h1 = e / s * (pi - d23) *
                        (4.0 * pi * d13 * s + std::sqrt(2.0) * std::pow(pi, 1.5) * y -
                         3.0 * s2pi * d23 * y) -
                    4.0 * pi * pi * d13 * Phi +
                    2.0 / (s * s) * (pi - d23) * Phi *
                        (-std::sqrt(2.0) * std::pow(pi, 1.5) * s * y - 2.0 * d * y * y +
                         3.0 * s2pi * d23 * s * y + 2.0 * pi * d13 * (y * y - s * s));
  const double h2 = 6.0 * pi * pi * (pi - d23) * d23 * Phi;
  if (h2 == 0.0) throw Error(ErrorCode::DomainError, "appendix score: h2 vanishes");
  return h1 / h2;
}

double appendix_score_cp(double theta1, double theta2, double gamma1, double x) {
  if (gamma1 == 0.0 || !(theta2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "CP score needs gamma1 != 0 and theta2 > 0");
  }
  if (!(std::fabs(gamma1) < cp_gamma1_bound())) {
    throw Error(ErrorCode::SkewnessOutOfRange, "|gamma1| must stay below the skew-normal bound");
  }
  const double pi = kPi;
  const double g = gamma1;
  const double g13 = std::cbrt(g);
  const double g23 = g13 * g13;
  const double g43 = g23 * g23;
  const double r = 2.0 / (4.0 - pi);
  const double r13 = std::cbrt(r);
  const double r23 = r13 * r13;
  const double y = x - theta1;
  const double t2 = theta2;
  const double P = y + r13 * g13 * t2;
  const double c = std::pow(4.0 - pi, -2.0 / 3.0);  // (4-pi)^(-2/3)

  const double h1 = -1.0 / (3.0 * g13 * (g23 + std::pow(0.5 * (4.0 - pi), 2.0 / 3.0))) +
                    r23 / 3.0 * P * P / (g13 * t2 * t2 * std::pow(1.0 + g23 * r23, 2)) -
                    r13 / 3.0 * P / (g23 * t2 * (1.0 + g23 * r23));

  const double expo = pi * c * g23 * P * P /
                      (std::pow(2.0, 4.0 / 3.0) * (1.0 + r23 * g23) *
                       (-1.0 + std::pow(2.0, -1.0 / 3.0) * (pi - 2.0) * c * g23) * t2 * t2);
  const double h2 = std::pow(2.0, 1.0 / 6.0) * std::exp(expo) *
                    (y * (2.0 * std::pow(4.0 - pi, 2.0 / 3.0) * (pi - 2.0) * g43 +
                          std::pow(2.0, 2.0 / 3.0) * (pi - 4.0) * (pi - 4.0)) +
                     t2 * (std::pow(2.0, 2.0 / 3.0) * (4.0 - pi) * (4.0 - pi) * g +
                           4.0 * std::pow(4.0 - pi, 5.0 / 3.0) * g13));

  const double u = 1.0 + std::pow(2.0, 2.0 / 3.0) * c * g23;
  const double v = 2.0 - std::pow(2.0, 2.0 / 3.0) * (pi - 2.0) * c * g23;
  const double Phi = special::normal_cdf(std::cbrt(2.0) * std::sqrt(pi) * std::pow(4.0 - pi, -1.0 / 3.0) *
                                         g13 * P / (t2 * std::sqrt(u) * std::sqrt(v)));
  const double h3 = 3.0 * std::pow(4.0 - pi, 7.0 / 3.0) * t2 * g23 *
                    std::pow(1.0 + g23 * r23, 1.5) * std::pow(v, 1.5) * Phi;
  if (h3 == 0.0) throw Error(ErrorCode::DomainError, "CP score: h3 vanishes");
  return h1 + h2 / h3;
}

namespace {

double skew_normal_log_density(const ThetaOriginal& t, double x) {
  const double z = (x - t.mu) / t.sigma;
  return std::log(2.0 / t.sigma) - 0.5 * z * z - special::kLogSqrt2Pi + special::normal_log_cdf(t.delta * z);
}

AppendixPoint compare(std::string score, double p, double x, double transcribed, const RealFunction& g,
                      double step) {
  AppendixPoint pt{std::move(score), p, x, transcribed, derivative(g, p, step), 0.0};
  pt.rel_deviation = std::fabs(pt.transcribed - pt.numeric) / std::max(std::fabs(pt.numeric), 1e-6);
  return pt;
}

}  // namespace

AppendixReport appendix_check(std::span<const std::pair<double, double>> ours_points,
                              std::span<const std::pair<double, double>> cp_points, double tolerance) {
  const double a = std::sqrt(2.0 * kPi);
  AppendixReport rep;
  rep.tolerance = tolerance;
  for (const auto& [d2, x] : ours_points) {
    const double t = appendix_score_ours(0.0, 1.0, d2, x);
    auto g = [x = x, a](double d) { return skew_normal_log_density(from_reparam2({0.0, 1.0, d}, a), x); };
    rep.points.push_back(compare("ours", d2, x, t, g, std::min(1e-3, 0.01 * std::fabs(d2))));
  }
  const double bound = cp_gamma1_bound();
  for (const auto& [g1, x] : cp_points) {
    const double t = appendix_score_cp(0.0, 1.0, g1, x);
    auto g = [x = x](double gam) { return skew_normal_log_density(cp_inverse({0.0, 1.0, gam}), x); };
    const double room = std::min(std::fabs(g1), bound - std::fabs(g1));
    rep.points.push_back(compare("cp", g1, x, t, g, std::min(1e-3, 0.01 * room)));
  }
  for (const auto& p : rep.points) rep.max_rel_deviation = std::max(rep.max_rel_deviation, p.rel_deviation);
  rep.passed = rep.max_rel_deviation < tolerance;
  return rep;
}

}  // namespace skewsing

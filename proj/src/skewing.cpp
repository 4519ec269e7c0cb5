#include <cmath>
#include <limits>
#include <string>

#include "skewsing/error.hpp"
#include "skewsing/expr.hpp"
#include "skewsing/families.hpp"
#include "skewsing/special.hpp"

namespace skewsing {

namespace sp = special;

Link normal_link() {
  return Link{"normal", [](double y) { return sp::normal_cdf(y); },
              [](double y) { return sp::normal_log_cdf(y); }, sp::kInvSqrt2Pi, -sp::kInvSqrt2Pi};
}

Link logistic_link() {
  return Link{"logistic", [](double y) { return sp::logistic_cdf(y); },
              [](double y) { return sp::logistic_log_cdf(y); }, 0.25, -0.125};
}

Link student_t_link(double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::InvalidArgument, "student_t link: nu must be positive");
  const double g0 = sp::student_t_pdf(0.0, nu);
  return Link{"student_t(" + std::to_string(nu) + ")",
              [nu](double y) { return sp::student_t_cdf(y, nu); },
              [nu](double y) { return sp::student_t_log_cdf(y, nu); }, g0, -g0 * (nu + 1.0) / nu};
}

Link cauchy_link() {
  auto cdf = [](double y) {
    // atan(y)/pi + 1/2 loses everything for large negative y; use the
    // reflected form 1/pi atan(-1/y) there.
    if (y < -1.0) return std::atan(-1.0 / y) / sp::kPi;
    return 0.5 + std::atan(y) / sp::kPi;
  };
  return Link{"cauchy", cdf, [cdf](double y) { return std::log(cdf(y)); }, 1.0 / sp::kPi,
              -2.0 / sp::kPi};
}

Link laplace_link() {
  auto log_cdf = [](double y) {
    return y < 0 ? y - std::log(2.0) : std::log1p(-0.5 * std::exp(-y));
  };
  return Link{"laplace", [log_cdf](double y) { return std::exp(log_cdf(y)); }, log_cdf, 0.5,
              std::nullopt};
}

Link uniform_link() {
  auto cdf = [](double y) { return std::clamp(0.5 * (y + 1.0), 0.0, 1.0); };
  return Link{"uniform", cdf,
              [cdf](double y) {
                const double c = cdf(y);
                return c > 0 ? std::log(c) : -std::numeric_limits<double>::infinity();
              },
              0.5, 0.0};
}

Link link_by_name(std::string_view name, double nu) {
  if (name == "normal") return normal_link();
  if (name == "logistic") return logistic_link();
  if (name == "student_t" || name == "t") return student_t_link(nu);
  if (name == "cauchy") return cauchy_link();
  if (name == "laplace") return laplace_link();
  if (name == "uniform") return uniform_link();
  throw Error(ErrorCode::InvalidArgument, "unknown link '" + std::string(name) + "'");
}

SkewingFunction composite_skewing(std::string name, Link link, std::vector<double> c,
                                  RealFunction w, RealFunction w_slope) {
  if (c.empty()) throw Error(ErrorCode::InvalidArgument, "composite skewing: no coefficients");
  auto h = [c](double y) {
    // Odd polynomial in Horner form over y^2.
    const double y2 = y * y;
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * y2 + *it;
    return acc * y;
  };
  SkewingFunction s;
  s.name = std::move(name);
  s.pi = [cdf = link.cdf, h, w](double z, double d) { return cdf(h(d * w(z))); };
  s.log_pi = [lc = link.log_cdf, h, w](double z, double d) { return lc(h(d * w(z))); };
  const double k1 = link.density_at_zero * c[0];
  s.psi = [k1, w](double z) { return k1 * w(z); };
  s.psi_dot = [k1, w_slope](double z) { return k1 * w_slope(z); };
  if (link.density_curvature) {
    const double c3 = c.size() > 1 ? c[1] : 0.0;
    const double k3 = 6.0 * link.density_at_zero * c3 + *link.density_curvature * c[0] * c[0] * c[0];
    s.upsilon = [k3, w](double z) {
      const double v = w(z);
      return k3 * v * v * v;
    };
  }
  return s;
}

namespace {

RealFunction identity_fn() {
  return [](double z) { return z; };
}
RealFunction unit_fn() {
  return [](double) { return 1.0; };
}

}  // namespace

SkewingFunction linear_skewing(Link link) {
  std::string name = link.name + "(delta*z)";
  return composite_skewing(std::move(name), std::move(link), {1.0}, identity_fn(), unit_fn());
}

SkewingFunction sine_skewing() {
  return composite_skewing(
      "normal(delta*sin(z))", normal_link(), {1.0}, [](double z) { return std::sin(z); },
      [](double z) { return std::cos(z); });
}

SkewingFunction score_skewing(const SymmetricKernel& kernel) {
  return composite_skewing("normal(delta*phi_f(z))", normal_link(), {1.0}, kernel.location_score,
                           kernel.location_score_slope);
}

SkewingFunction lifted_skewing() {
  const double kappa = (4.0 - sp::kPi) / (6.0 * sp::kPi);
  return composite_skewing("normal(delta*z - (4-pi)/(6pi) delta^3 z^3)", normal_link(),
                           {1.0, -kappa}, identity_fn(), unit_fn());
}

SkewingFunction flexible_skewing(std::vector<double> odd_coefficients) {
  return composite_skewing("normal(H(delta*z))", normal_link(), std::move(odd_coefficients),
                           identity_fn(), unit_fn());
}

SkewingFunction skew_t_skewing(double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::InvalidArgument, "skew-t skewing: nu must be positive");
  auto w = [nu](double z) { return z * std::sqrt((nu + 1.0) / (z * z + nu)); };
  auto w_slope = [nu](double z) {
    const double d = z * z + nu;
    return std::sqrt(nu + 1.0) * nu / (d * std::sqrt(d));
  };
  return composite_skewing("student_t(nu+1)(delta*w_nu(z))", student_t_link(nu + 1.0), {1.0}, w,
                           w_slope);
}

SkewingFunction skew_exponential_power_skewing(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "SEP skewing: alpha must be positive");
  const double scale = std::sqrt(2.0 / alpha);
  auto w = [alpha, scale](double z) {
    const double v = scale * std::pow(std::fabs(z), 0.5 * alpha);
    return z < 0 ? -v : v;
  };
  auto w_slope = [alpha, scale](double z) {
    return scale * 0.5 * alpha * std::pow(std::fabs(z), 0.5 * alpha - 1.0);
  };
  return composite_skewing("normal(delta*sign(z)|z|^(alpha/2)(2/alpha)^(1/2))", normal_link(), {1.0},
                           w, w_slope);
}

SkewingFunction expression_skewing(std::string_view pi_src, std::string_view psi_src,
                                   std::string_view upsilon_src) {
  const expr::Expr pexpr = expr::parse_or_throw(pi_src);
  SkewingFunction s;
  s.name = "expr:" + std::string(pi_src);
  s.derivative_source = DerivativeSource::FiniteDifference;
  s.pi = [pexpr](double z, double d) { return pexpr(z, d); };
  s.log_pi = [pexpr](double z, double d) {
    const double v = pexpr(z, d);
    return v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  };
  if (!psi_src.empty()) {
    const expr::Expr e = expr::parse_or_throw(psi_src);
    s.psi = [e](double z) { return e(z); };
    s.derivative_source = DerivativeSource::Analytic;
  } else {
    s.psi = [pi = s.pi](double z) { return diff_delta(pi, z, 1); };
  }
  s.psi_dot = [psi = s.psi](double z) { return derivative(psi, z, 1e-3); };
  if (!upsilon_src.empty()) {
    const expr::Expr e = expr::parse_or_throw(upsilon_src);
    s.upsilon = [e](double z) { return e(z); };
  } else {
    s.upsilon = [pi = s.pi](double z) { return diff_delta(pi, z, 3); };
  }
  return s;
}

}  // namespace skewsing

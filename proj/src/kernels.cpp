#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "skewsing/error.hpp"
#include "skewsing/expr.hpp"
#include "skewsing/families.hpp"
#include "skewsing/special.hpp"

namespace skewsing {

namespace sp = special;

SymmetricKernel normal_kernel() {
  SymmetricKernel k;
  k.name = "normal";
  k.density = [](double z) { return sp::normal_pdf(z); };
  k.log_density = [](double z) { return -0.5 * z * z - sp::kLogSqrt2Pi; };
  k.location_score = [](double z) { return z; };
  k.location_score_slope = [](double) { return 1.0; };
  k.sampler = [](Rng& rng) { return rng.normal(); };
  k.standardization_note = "standard normal, unit variance";
  return k;
}

SymmetricKernel logistic_kernel() {
  SymmetricKernel k;
  k.name = "logistic";
  // f(z) = e^-z / (1 + e^-z)^2, written in |z| to avoid overflow.
  k.log_density = [](double z) {
    const double a = std::fabs(z);
    return -a - 2.0 * std::log1p(std::exp(-a));
  };
  k.density = [ld = k.log_density](double z) { return std::exp(ld(z)); };
  k.location_score = [](double z) { return std::tanh(0.5 * z); };
  k.location_score_slope = [](double z) {
    const double t = std::tanh(0.5 * z);
    return 0.5 * (1.0 - t * t);
  };
  k.sampler = [](Rng& rng) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    return std::log(u) - std::log1p(-u);
  };
  k.standardization_note = "logistic with unit rate (variance pi^2/3)";
  return k;
}

SymmetricKernel student_t_kernel(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw Error(ErrorCode::InvalidArgument, "student_t kernel: nu must be positive");
  }
  SymmetricKernel k;
  k.name = "student_t(" + std::to_string(nu) + ")";
  k.density = [nu](double z) { return sp::student_t_pdf(z, nu); };
  const double log_c = sp::student_t_log_pdf(0.0, nu);
  k.log_density = [nu, log_c](double z) { return log_c - 0.5 * (nu + 1.0) * std::log1p(z * z / nu); };
  k.location_score = [nu](double z) { return (nu + 1.0) * z / (nu + z * z); };
  k.location_score_slope = [nu](double z) {
    const double d = nu + z * z;
    return (nu + 1.0) * (nu - z * z) / (d * d);
  };
  k.sampler = [nu](Rng& rng) { return rng.student_t(nu); };
  k.standardization_note = "Student t with unit scale";
  return k;
}

SymmetricKernel exponential_power_kernel(double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidArgument, "exponential power kernel: alpha must exceed 1");
  }
  const double log_c = std::log(2.0) + (1.0 / alpha - 1.0) * std::log(alpha) + std::lgamma(1.0 / alpha);
  SymmetricKernel k;
  k.name = "exponential_power(" + std::to_string(alpha) + ")";
  k.log_density = [alpha, log_c](double z) { return -std::pow(std::fabs(z), alpha) / alpha - log_c; };
  k.density = [ld = k.log_density](double z) { return std::exp(ld(z)); };
  k.location_score = [alpha](double z) {
    const double v = std::pow(std::fabs(z), alpha - 1.0);
    return z < 0 ? -v : v;
  };
  k.location_score_slope = [alpha](double z) {
    return (alpha - 1.0) * std::pow(std::fabs(z), alpha - 2.0);
  };
  // |Z|^alpha / alpha ~ Gamma(1/alpha, 1).
  k.sampler = [alpha](Rng& rng) {
    const double g = rng.gamma(1.0 / alpha);
    const double r = std::pow(alpha * g, 1.0 / alpha);
    return rng.uniform() < 0.5 ? -r : r;
  };
  k.standardization_note = "exp(-|z|^alpha/alpha)/c, c = 2 alpha^(1/alpha-1) Gamma(1/alpha)";
  return k;
}

namespace {

// Inverse-cdf table for kernels without a dedicated sampler. Cell masses use
// Simpson's rule; draws are linearly interpolated inside the cell.
class TabulatedSampler {
 public:
  TabulatedSampler(const RealFunction& f, double half_width, int cells)
      : lo_(-half_width), h_(2.0 * half_width / cells), cdf_(cells + 1, 0.0) {
    double prev = f(lo_);
    for (int i = 0; i < cells; ++i) {
      const double a = lo_ + i * h_;
      const double fm = f(a + 0.5 * h_);
      const double fb = f(a + h_);
      cdf_[i + 1] = cdf_[i] + h_ / 6.0 * (prev + 4.0 * fm + fb);
      prev = fb;
    }
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
  }

  double draw(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t i = std::clamp<std::size_t>(it - cdf_.begin(), 1, cdf_.size() - 1) - 1;
    const double span = cdf_[i + 1] - cdf_[i];
    const double t = span > 0 ? (u - cdf_[i]) / span : 0.5;
    return lo_ + (static_cast<double>(i) + t) * h_;
  }

 private:
  double lo_;
  double h_;
  std::vector<double> cdf_;
};

}  // namespace

SymmetricKernel expression_kernel(std::string_view density_src, std::string_view score_src) {
  const expr::Expr fexpr = expr::parse_or_throw(density_src);
  if (fexpr.uses(expr::Variable::Delta)) {
    throw Error(ErrorCode::InvalidArgument, "kernel expression must not depend on delta");
  }
  SymmetricKernel k;
  k.name = "expr:" + std::string(density_src);
  k.analytic = false;
  k.density = [fexpr](double z) { return fexpr(z); };
  k.log_density = [fexpr](double z) {
    const double v = fexpr(z);
    return v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  };
  if (!score_src.empty()) {
    const expr::Expr sexpr = expr::parse_or_throw(score_src);
    k.location_score = [sexpr](double z) { return sexpr(z); };
  } else {
    k.location_score = [ld = k.log_density](double z) { return -derivative(ld, z, 1e-4); };
  }
  k.location_score_slope = [s = k.location_score](double z) { return derivative(s, z, 1e-4); };
  auto table = std::make_shared<TabulatedSampler>(k.density, 40.0, 20000);
  k.sampler = [table](Rng& rng) { return table->draw(rng); };
  k.standardization_note = "user expression; normalization checked at validation";
  return k;
}

}  // namespace skewsing

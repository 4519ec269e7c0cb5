#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skewsing/error.hpp"
#include "skewsing/families.hpp"

namespace skewsing {

void ThetaOriginal::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(delta) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "theta: non-finite component");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta: sigma must be positive");
}

namespace {

std::string summarize(const ValidationReport& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.failures.size(); ++i) {
    if (i) os << "; ";
    os << r.failures[i];
  }
  return os.str();
}

void record(ValidationReport& r, const std::string& axiom, double violation) {
  double& slot = r.max_violation[axiom];
  if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
  slot = std::max(slot, violation);
}

void finish(ValidationReport& r) {
  for (const auto& [axiom, v] : r.max_violation) {
    if (!(v < r.tolerance)) {
      r.passed = false;
      std::ostringstream os;
      os << axiom << " violated by " << v;
      r.failures.push_back(os.str());
    }
  }
}

}  // namespace

std::vector<double> default_validation_grid() {
  std::vector<double> g(201);
  for (int i = 0; i <= 200; ++i) g[i] = -8.0 + 0.08 * i;
  g[100] = 0.0;
  return g;
}

ValidationReport validate_skewing(const SkewingFunction& s, const std::vector<double>& grid,
                                  double tolerance) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "validate_skewing: empty grid");
  ValidationReport r;
  r.tolerance = tolerance;
  static constexpr double kDeltas[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (const char* axiom : {"antisymmetry", "centre", "range", "psi_odd", "even_derivative"}) {
    r.max_violation[axiom] = 0.0;
  }
  for (double z : grid) {
    try {
      for (double d : kDeltas) {
        const double p = s.pi(z, d);
        const double q = s.pi(-z, d);
        record(r, "antisymmetry", std::fabs(p + q - 1.0));
        record(r, "range", std::max({0.0, -p, p - 1.0}));
      }
      record(r, "centre", std::fabs(s.pi(z, 0.0) - 0.5));
      record(r, "psi_odd", std::fabs(s.psi(z) + s.psi(-z)));
      record(r, "even_derivative", std::fabs(diff_delta(s.pi, z, 2)));
    } catch (const Error& e) {
      r.passed = false;
      r.failures.push_back(std::string("evaluation failed: ") + e.what());
      return r;
    }
  }
  finish(r);
  return r;
}

ValidationReport validate_kernel(const SymmetricKernel& k, const std::vector<double>& grid,
                                 double tolerance) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "validate_kernel: empty grid");
  ValidationReport r;
  r.tolerance = tolerance;
  for (const char* axiom : {"positivity", "symmetry", "score_odd", "normalization"}) {
    r.max_violation[axiom] = 0.0;
  }
  try {
    for (double z : grid) {
      const double f = k.density(z);
      const double g = k.density(-z);
      record(r, "positivity", f > 0 ? 0.0 : 1.0);
      record(r, "symmetry", std::fabs(f - g) / std::max(1.0, f));
      const double s = k.location_score(z);
      record(r, "score_odd", std::fabs(s + k.location_score(-z)) / std::max(1.0, std::fabs(s)));
    }
    const QuadratureResult q = integrate_detailed(k.density);
    record(r, "normalization", std::fabs(q.value - 1.0));
  } catch (const Error& e) {
    r.passed = false;
    r.failures.push_back(std::string("evaluation failed: ") + e.what());
    return r;
  }
  finish(r);
  return r;
}

SkewSymmetricFamily::SkewSymmetricFamily(std::string name, SymmetricKernel kernel,
                                         SkewingFunction skewing)
    : name_(std::move(name)), kernel_(std::move(kernel)), skewing_(std::move(skewing)) {
  const auto grid = default_validation_grid();
  const ValidationReport kr = validate_kernel(kernel_, grid);
  if (!kr.passed) {
    throw Error(ErrorCode::ValidationFailed, "kernel '" + kernel_.name + "': " + summarize(kr));
  }
  const ValidationReport sr = validate_skewing(skewing_, grid);
  if (!sr.passed) {
    throw Error(ErrorCode::ValidationFailed, "skewing '" + skewing_.name + "': " + summarize(sr));
  }
}

double SkewSymmetricFamily::density(const ThetaOriginal& theta, double x) const {
  theta.validate();
  const double z = (x - theta.mu) / theta.sigma;
  return 2.0 / theta.sigma * kernel_.density(z) * skewing_.pi(z, theta.delta);
}

double SkewSymmetricFamily::log_density(const ThetaOriginal& theta, double x) const {
  theta.validate();
  const double z = (x - theta.mu) / theta.sigma;
  return std::log(2.0 / theta.sigma) + kernel_.log_density(z) + skewing_.log_pi(z, theta.delta);
}

std::vector<double> SkewSymmetricFamily::sample(const ThetaOriginal& theta, std::size_t n,
                                                const SeedSpec& seed) const {
  theta.validate();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample: n must be at least 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) {
    const double z = kernel_.sampler(rng);
    const double u = rng.uniform();
    const double signed_z = u <= skewing_.pi(z, theta.delta) ? z : -z;
    x = theta.mu + theta.sigma * signed_z;
  }
  return out;
}

}  // namespace skewsing

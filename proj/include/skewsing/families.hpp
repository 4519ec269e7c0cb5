#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skewsing/numerics.hpp"

namespace skewsing {

/// Symmetric part f of a skew-symmetric density together with its location
/// score phi_f = -f'/f.
struct SymmetricKernel {
  std::string name;
  RealFunction density;
  RealFunction log_density;
  RealFunction location_score;
  RealFunction location_score_slope;  // d phi_f / dz
  std::function<double(Rng&)> sampler;
  std::string standardization_note;
  bool analytic = true;  // false for expression kernels
};

enum class DerivativeSource { Analytic, FiniteDifference };

/// Pi(z, delta) with its delta-derivatives at delta = 0:
/// psi = d/d delta, psi_dot = d psi / dz, upsilon = d^3/d delta^3.
/// `upsilon` is empty when Pi is not three times differentiable in delta.
struct SkewingFunction {
  std::string name;
  SkewingCallable pi;
  SkewingCallable log_pi;
  RealFunction psi;
  RealFunction psi_dot;
  RealFunction upsilon;
  DerivativeSource derivative_source = DerivativeSource::Analytic;
};

struct ThetaOriginal {
  double mu = 0.0;
  double sigma = 1.0;
  double delta = 0.0;

  void validate() const;
};

/// A validated (kernel, skewing) pair; immutable after construction.
class SkewSymmetricFamily {
 public:
  SkewSymmetricFamily(std::string name, SymmetricKernel kernel, SkewingFunction skewing);

  const std::string& name() const { return name_; }
  const SymmetricKernel& kernel() const { return kernel_; }
  const SkewingFunction& skewing() const { return skewing_; }

  /// 2 sigma^-1 f(z) Pi(z, delta) with z = (x - mu) / sigma.
  double density(const ThetaOriginal& theta, double x) const;
  /// Log-space evaluation; -inf where Pi vanishes.
  double log_density(const ThetaOriginal& theta, double x) const;
  /// Sign-flip sampler: Z ~ f, keep mu + sigma Z with probability Pi(Z, delta),
  /// otherwise mu - sigma Z.
  std::vector<double> sample(const ThetaOriginal& theta, std::size_t n, const SeedSpec& seed) const;

  // User-supplied constants from a family-spec file; used instead of the
  // estimated ones wherever a or alpha1 feed a reparametrization.
  std::optional<double> a_override;
  std::optional<double> alpha1_override;

 private:
  std::string name_;
  SymmetricKernel kernel_;
  SkewingFunction skewing_;
};

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

SymmetricKernel normal_kernel();
SymmetricKernel logistic_kernel();
SymmetricKernel student_t_kernel(double nu);
SymmetricKernel exponential_power_kernel(double alpha);
/// f from an expression in z; the score falls back to a finite difference of
/// log f when `score_src` is empty. Sampling inverts a tabulated cdf.
SymmetricKernel expression_kernel(std::string_view density_src, std::string_view score_src = {});

// ---------------------------------------------------------------------------
// Skewing functions
// ---------------------------------------------------------------------------

/// Symmetric cdf G used inside G(H(delta w(z))).
struct Link {
  std::string name;
  std::function<double(double)> cdf;
  std::function<double(double)> log_cdf;
  double density_at_zero = 0.0;                // g(0)
  std::optional<double> density_curvature;     // g''(0) when G is C^3 at 0
};

Link normal_link();
Link logistic_link();
Link student_t_link(double nu);
Link cauchy_link();
Link laplace_link();
Link uniform_link();
Link link_by_name(std::string_view name, double nu = 3.0);

/// Pi(z, delta) = G(H(delta w(z))) with H(y) = sum_k c_k y^(2k+1). The
/// coefficient list starts at the linear term; {1} means H(y) = y.
SkewingFunction composite_skewing(std::string name, Link link, std::vector<double> odd_coefficients,
                                  RealFunction w, RealFunction w_slope);

SkewingFunction linear_skewing(Link link);                     // G(delta z)
SkewingFunction sine_skewing();                                // Phi(delta sin z)
SkewingFunction score_skewing(const SymmetricKernel& kernel);   // Phi(delta phi_f(z))
SkewingFunction lifted_skewing();                              // Phi(delta z - k delta^3 z^3)
SkewingFunction flexible_skewing(std::vector<double> odd_coefficients);  // Phi(H(delta z))
SkewingFunction skew_t_skewing(double nu);
SkewingFunction skew_exponential_power_skewing(double alpha);

/// Pi from an expression in (z, delta). psi/upsilon come from their own
/// expressions when given, otherwise from diff_delta.
SkewingFunction expression_skewing(std::string_view pi_src, std::string_view psi_src = {},
                                   std::string_view upsilon_src = {});

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
  std::map<std::string, double> max_violation;  // axiom -> max violation
  double tolerance = 1e-6;
  bool passed = true;
  std::vector<std::string> failures;
};

/// Default validation grid: 201 equispaced points on [-8, 8].
std::vector<double> default_validation_grid();

/// Checks Pi(-z,d)+Pi(z,d)=1, Pi(z,0)=1/2, 0<=Pi<=1, psi odd and
/// d^2 Pi/d delta^2 = 0 at delta = 0 over grid x {-1,-0.5,0,0.5,1}.
ValidationReport validate_skewing(const SkewingFunction& s, const std::vector<double>& grid,
                                  double tolerance = 1e-6);

/// Checks f > 0, f even, phi_f odd on the grid and that f integrates to one.
ValidationReport validate_kernel(const SymmetricKernel& k, const std::vector<double>& grid,
                                 double tolerance = 1e-6);

// ---------------------------------------------------------------------------
// Registry and family-spec files
// ---------------------------------------------------------------------------

struct FamilyParams {
  std::optional<double> nu;
  std::optional<double> alpha;
  std::vector<double> coefficients;
};

/// Names: skew-normal, skew-t, skew-exponential-power, normal-sine,
/// logistic-tanh, skew-normal-t, skew-normal-cauchy, skew-normal-logistic,
/// skew-normal-laplace, skew-normal-uniform, lifted-skew-normal,
/// flexible-skew-normal.
SkewSymmetricFamily builtin_family(std::string_view name, const FamilyParams& params = {});
std::vector<std::string> builtin_family_names();

/// The regression fixtures with their expected singularity order.
struct FixtureEntry {
  std::string label;
  std::string family;
  FamilyParams params;
  int expected_order;
};
const std::vector<FixtureEntry>& registry_fixtures();
SkewSymmetricFamily make_fixture(const FixtureEntry& entry);

/// Parses a family-spec document (JSON text). Validates both components and
/// throws Error(ValidationFailed) or Error(ParseError) on bad input.
SkewSymmetricFamily family_from_json(std::string_view json_text);

}  // namespace skewsing

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skewsing/families.hpp"
#include "skewsing/numerics.hpp"

namespace skewsing {

enum class SignBranch { Plus, Minus };

/// Location, scale and skewness scores at theta_0 = (mu, sigma, 0) in one of
/// the four parametrizations.
struct ScoreVector3 {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  int parametrization = 0;
  SignBranch sign_branch = SignBranch::Plus;
};

struct LocationScaleInfo {
  double I_f = 0.0;  // int phi_f^2 f
  double J_f = 0.0;  // int (z phi_f - 1)^2 f
};

struct AEstimate {
  double a = 0.0;
  double residual = 0.0;  // max |phi_f - a psi| / (1 + |phi_f|) on the residual grid
};

/// Constants of a generalized skew-normal family: psi(z) = z/a and
/// Upsilon(z) = alpha1 z + upsilon_cubic_coeff z^3.
struct GsnConstants {
  double a = 0.0;
  double alpha1 = 0.0;
  double upsilon_cubic_coeff = 0.0;
};

struct FisherMatrix3 {
  Sym3 matrix;
  RankReport rank;
  int parametrization = 0;
};

struct StageResidual {
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct SingularityReport {
  int order = 0;
  std::optional<double> a;
  std::optional<double> c;  // 1/a
  std::optional<double> alpha1;
  std::optional<double> upsilon_cubic_coeff;
  // "proportionality", "kernel_normal", "psi_linear", "upsilon_fit",
  // "upsilon_cubic", "upsilon_consistency"
  std::map<std::string, StageResidual> residuals;
  std::map<int, FisherMatrix3> fisher;  // keyed by parametrization
  bool consistent = true;
  std::vector<std::string> notes;
};

struct ClassifyOptions {
  double residual_tol = 1e-6;
  double rank_tol = kDefaultRankTol;
  double upsilon_consistency_tol = 1e-4;
  QuadratureSpec quadrature{};
};

/// 121 equispaced points on [-6, 6].
std::vector<double> residual_grid();

LocationScaleInfo location_scale_info(const SymmetricKernel& kernel, const QuadratureSpec& q = {});

/// Throws DegenerateSkewing when int psi^2 f vanishes.
AEstimate estimate_a(const SkewSymmetricFamily& fam, const QuadratureSpec& q = {});

Sym3 info_original(const SkewSymmetricFamily& fam, double mu, double sigma, const QuadratureSpec& q = {});
Sym3 info_reparam1(const SkewSymmetricFamily& fam, double mu, double sigma, double a,
                   const QuadratureSpec& q = {});
/// Throws NotGaussianKernel unless the kernel score is z.
Sym3 info_reparam2(const SkewSymmetricFamily& fam, double mu, double sigma, double a,
                   const QuadratureSpec& q = {}, double kernel_tol = 1e-6);
/// Closed form, no quadrature.
Sym3 info_reparam3(double a, double alpha1, double sigma);

/// Third delta-derivative of Pi at 0: the analytic form when the skewing
/// function has one, otherwise diff_delta with a step scaled by 1/max(1,|z|).
double upsilon_value(const SkewingFunction& s, double z);
double upsilon_fd(const SkewingFunction& s, double z);

/// Score vector at x with explicit constants; no order check.
ScoreVector3 score_with_constants(const SkewSymmetricFamily& fam, double mu, double sigma, double x,
                                  int parametrization, SignBranch branch, const GsnConstants& k);

/// Throws OrderMismatch when the parametrization exceeds the report's order.
ScoreVector3 score_at(const SkewSymmetricFamily& fam, const SingularityReport& report, double mu,
                      double sigma, double x, int parametrization,
                      SignBranch branch = SignBranch::Plus);

/// Constants used for reparametrization k given a report; family-spec
/// overrides win over estimates.
GsnConstants constants_for(const SkewSymmetricFamily& fam, const SingularityReport& report);

SingularityReport classify(const SkewSymmetricFamily& fam, const ClassifyOptions& options = {});

/// Gamma^(k) at (mu, sigma) with rank diagnostics; OrderMismatch when k > order.
FisherMatrix3 fisher_matrix(const SkewSymmetricFamily& fam, const SingularityReport& report, int k,
                            double mu, double sigma, const ClassifyOptions& options = {});

}  // namespace skewsing

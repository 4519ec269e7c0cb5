#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skewsing/families.hpp"
#include "skewsing/fisher.hpp"

namespace skewsing {

struct Nuisance {
  double mu = 0.0;
  double sigma = 1.0;
};

enum class LmVariant { Simple, Double };

struct LMResult {
  double statistic = 0.0;
  double p_value = 1.0;  // chi-square(1) upper tail at statistic
  Nuisance nuisance;
  bool nuisance_estimated = false;
  std::size_t n = 0;
  LmVariant variant = LmVariant::Simple;
};

/// MLE of (mu, sigma) in the symmetric submodel delta = 0. Closed form for
/// the normal kernel; simplex search then Newton polish on the score
/// equations otherwise.
Nuisance symmetric_mle(const SymmetricKernel& kernel, std::span<const double> data);

/// Simple-singularity statistic built on reparametrization-1 scores.
/// OrderMismatch unless report.order == 1; DegenerateDenominator when
/// gamma33 - gamma23^2/gamma22 vanishes.
LMResult lm_test_simple(std::span<const double> data, const SkewSymmetricFamily& fam,
                        const SingularityReport& report,
                        std::optional<Nuisance> nuisance = std::nullopt);

/// Double-singularity statistic built on reparametrization-2 scores.
/// OrderMismatch unless report.order == 2.
LMResult lm_test_double(std::span<const double> data, const SkewSymmetricFamily& fam,
                        const SingularityReport& report,
                        std::optional<Nuisance> nuisance = std::nullopt);

double log_likelihood(const SkewSymmetricFamily& fam, const ThetaOriginal& theta,
                      std::span<const double> data);

struct FitOptions {
  double delta_bound = 5.0;  // |delta| <= D
  double sigma_lower = 1e-3;
  int restarts = 3;
  double x_tol = 1e-7;
  double f_tol = 1e-8;
  int max_evaluations = 4000;
  SeedSpec seed{};
};

struct MLEFit {
  ThetaOriginal theta_hat;
  double loglik = 0.0;
  bool converged = false;
  int restarts_used = 0;
  int evaluations = 0;
};

/// Maximizes the log-likelihood in the coordinates of the given
/// reparametrization and maps the optimum back. Non-convergence is reported
/// through `converged`.
MLEFit fit_mle(std::span<const double> data, const SkewSymmetricFamily& fam, int parametrization,
               const GsnConstants& constants, const FitOptions& options = {});

struct RateReplicate {
  std::size_t n = 0;
  int replication = 0;
  double delta_hat = 0.0;
  double loglik = 0.0;
  bool converged = false;
  bool failed = false;
};

struct RateOptions {
  std::vector<std::size_t> n_grid{250, 500, 1000, 2000, 4000, 8000, 16000};
  int replications = 500;
  SeedSpec seed{};
  int threads = 0;  // 0: hardware concurrency
  int parametrization = -1;  // -1: the classified order
  // Quantile of |delta_hat| fed to the slope fit. Unset: 0.5 for orders 0
  // and 2, 0.75 for orders 1 and 3, where |delta_hat| has an atom of mass
  // near 1/2 at zero.
  std::optional<double> summary_quantile;
  FitOptions fit{.restarts = 0, .x_tol = 1e-5, .f_tol = 1e-6};
};

struct RateResult {
  std::vector<std::size_t> n_grid;
  std::vector<double> median_abs_delta;
  double summary_quantile = 0.5;
  std::vector<double> summary_abs_delta;  // the slope is fitted to these
  std::vector<double> zero_fraction;      // share of fits with delta_hat == 0
  std::vector<int> failures;  // per grid point
  std::vector<int> nonconverged;
  double slope = 0.0;
  double slope_stderr = 0.0;
  int replications = 0;
  int parametrization = 0;
  SeedSpec seed{};
  std::string status = "ok";  // "ok" or a reason the slope is undefined
  std::vector<RateReplicate> raw;  // index order: grid point, then replication
};

/// Type-7 sample quantile of v (v need not be sorted).
double sample_quantile(std::vector<double> v, double q);

/// Seed for replication r at grid point j.
SeedSpec replication_seed(const SeedSpec& master, std::size_t grid_index, int replication);

RateResult rate_experiment(const SkewSymmetricFamily& fam, const SingularityReport& report,
                           const RateOptions& options = {});

}  // namespace skewsing

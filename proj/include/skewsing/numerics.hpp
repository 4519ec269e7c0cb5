#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace skewsing {

// ---------------------------------------------------------------------------
// Quadrature over the real line
// ---------------------------------------------------------------------------

/// Controls for integrate(). The core interval [-tail_cutoff, tail_cutoff] is
/// split into panels of width at most `panel_width` (a breakpoint always sits
/// at 0) and refined adaptively with a 7/15-point Gauss-Kronrod pair. When
/// `include_tails` is set, the two tails beyond the cutoff are mapped onto
/// (0,1] with z = T/u and join the same global refinement queue.
struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_subdivisions = 4000;
  double tail_cutoff = 50.0;
  double panel_width = 5.0;
  bool include_tails = true;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = false;
};

using RealFunction = std::function<double(double)>;
using SkewingCallable = std::function<double(double, double)>;

/// Never throws ToleranceNotMet; inspect `converged` instead. Throws NonFinite
/// if the integrand returns NaN or an infinity.
QuadratureResult integrate_detailed(const RealFunction& g, const QuadratureSpec& spec = {});

/// Throwing wrapper: NonFinite, or ToleranceNotMet when the error target
/// max(abs_tol, rel_tol*|I|) could not be reached.
double integrate(const RealFunction& g, const QuadratureSpec& spec = {});

/// Plain adaptive Gauss-Kronrod on a finite interval.
QuadratureResult integrate_interval(const RealFunction& g, double a, double b,
                                    const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Derivatives in the skewness argument at delta = 0
// ---------------------------------------------------------------------------

/// Default steps per derivative order (1, 2, 3).
double default_delta_step(int order);

/// Central finite-difference estimate of d^order/d delta^order Pi(z, delta) at
/// delta = 0, with one Richardson step. order 3 uses the odd five-point
/// stencil. step <= 0 selects default_delta_step(order).
double diff_delta(const SkewingCallable& pi, double z, int order, double step = 0.0);

/// Central difference with one Richardson step for an ordinary function.
double derivative(const RealFunction& g, double x, double step = 1e-4);

// ---------------------------------------------------------------------------
// Symmetric 3x3 matrices
// ---------------------------------------------------------------------------

struct Sym3 {
  double m11 = 0, m22 = 0, m33 = 0;
  double m12 = 0, m13 = 0, m23 = 0;

  static Sym3 identity() { return Sym3{1, 1, 1, 0, 0, 0}; }
  static Sym3 from_full(const std::array<std::array<double, 3>, 3>& a);

  // 0-based access, symmetric.
  double operator()(int i, int j) const;
  std::array<std::array<double, 3>, 3> full() const;
  double trace() const { return m11 + m22 + m33; }
  double determinant() const;
  bool all_finite() const;
};

struct RankReport {
  std::array<double, 3> eigenvalues{};  // ascending
  int numeric_rank = 0;
  double rank_tol = 1e-7;
};

inline constexpr double kDefaultRankTol = 1e-7;

/// Eigenvalues from the trigonometric solution of the characteristic cubic,
/// polished by Newton steps on the same polynomial.
std::array<double, 3> eigenvalues3(const Sym3& m);
RankReport rank3(const Sym3& m, double rank_tol = kDefaultRankTol);

// ---------------------------------------------------------------------------
// Seeded random streams
// ---------------------------------------------------------------------------

struct SeedSpec {
  std::uint64_t master_seed = 20130901;
  std::uint64_t stream_index = 0;
};

/// Derives the engine seed for a stream; distinct stream indices give
/// unrelated seeds via a splitmix64 finalizer.
std::uint64_t stream_seed(const SeedSpec& seed) noexcept;

/// Value-owned random stream. Never share one across threads.
class Rng {
 public:
  explicit Rng(const SeedSpec& seed) : engine_(stream_seed(seed)) {}

  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double normal() { return normal_(engine_); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  double student_t(double nu) { return std::student_t_distribution<double>(nu)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// ---------------------------------------------------------------------------
// Derivative-free local minimization
// ---------------------------------------------------------------------------

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unbounded(std::size_t dim);
  void project(std::span<double> x) const;
};

struct MinimizeOptions {
  int max_evaluations = 20000;
  double x_tol = 1e-9;  // absolute simplex extent
  double f_tol = 1e-10;  // absolute spread of vertex values
  std::vector<double> initial_step;  // empty: 0.1*max(1,|x0_i|)
  int restarts = 0;
  SeedSpec seed{};
};

struct MinimizeResult {
  std::vector<double> argmin;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int restarts_used = 0;
  bool converged = false;  // false means MaxIterations was hit
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead with box projection. After the first run, each restart rebuilds
/// a simplex around the incumbent with a seeded random orientation; the best
/// point over all runs is returned. NaN objective values count as +inf.
MinimizeResult minimize(const Objective& objective, std::vector<double> init, const Box& bounds,
                        const MinimizeOptions& options = {});

}  // namespace skewsing

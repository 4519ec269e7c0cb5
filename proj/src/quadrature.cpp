#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "skewsing/error.hpp"
#include "skewsing/numerics.hpp"

namespace skewsing {

namespace {

// Kronrod abscissae (descending, last is the centre) and weights; every
// second abscissa is a 7-point Gauss node.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

enum class Piece { Core, RightTail, LeftTail };

struct Interval {
  double a = 0;
  double b = 0;
  double value = 0;
  double error = 0;
  Piece piece = Piece::Core;
  bool operator<(const Interval& other) const { return error < other.error; }
};

class Evaluator {
 public:
  Evaluator(const RealFunction& g, double cutoff) : g_(g), cutoff_(cutoff) {}

  double operator()(double t, Piece piece) const {
    double value = 0.0;
    switch (piece) {
      case Piece::Core:
        value = g_(t);
        break;
      case Piece::RightTail: {
        const double z = cutoff_ / t;
        value = g_(z) * cutoff_ / (t * t);
        break;
      }
      case Piece::LeftTail: {
        const double z = -cutoff_ / t;
        value = g_(z) * cutoff_ / (t * t);
        break;
      }
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::NonFinite,
                  "integrand is not finite at z = " + std::to_string(map(t, piece)));
    }
    return value;
  }

  double map(double t, Piece piece) const {
    switch (piece) {
      case Piece::Core: return t;
      case Piece::RightTail: return cutoff_ / t;
      case Piece::LeftTail: return -cutoff_ / t;
    }
    return t;
  }

 private:
  const RealFunction& g_;
  double cutoff_;
};

Interval gauss_kronrod(const Evaluator& eval, double a, double b, Piece piece) {
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kTiny = std::numeric_limits<double>::min();
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = eval(centre, piece);
  double res_g = fc * kWg[3];
  double res_k = fc * kWgk[7];
  double res_abs = std::fabs(res_k);
  double fv1[7];
  double fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = eval(centre - dx, piece);
    const double f2 = eval(centre + dx, piece);
    fv1[j] = f1;
    fv2[j] = f2;
    res_k += kWgk[j] * (f1 + f2);
    res_abs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) res_g += kWg[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * res_k;
  double res_asc = kWgk[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    res_asc += kWgk[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));
  }
  const double ahalf = std::fabs(half);
  res_asc *= ahalf;
  res_abs *= ahalf;
  double err = std::fabs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  if (res_abs > kTiny / (50.0 * kEps)) err = std::max(50.0 * kEps * res_abs, err);
  return Interval{a, b, res_k * half, err, piece};
}

QuadratureResult refine(const Evaluator& eval, std::vector<Interval> initial,
                        const QuadratureSpec& spec) {
  std::priority_queue<Interval> queue(initial.begin(), initial.end());
  double value = 0.0;
  double error = 0.0;
  for (const auto& iv : initial) {
    value += iv.value;
    error += iv.error;
  }
  int count = static_cast<int>(initial.size());
  bool converged = false;
  bool stuck = false;
  while (true) {
    const double target = std::max(spec.abs_tol, spec.rel_tol * std::fabs(value));
    if (error <= target) {
      converged = true;
      break;
    }
    if (count >= spec.max_subdivisions || stuck) break;
    const Interval worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b)) ||
        std::fabs(worst.b - worst.a) < 1e-13 * std::max(1.0, std::fabs(mid))) {
      stuck = true;
      continue;
    }
    queue.pop();
    const Interval left = gauss_kronrod(eval, worst.a, mid, worst.piece);
    const Interval right = gauss_kronrod(eval, mid, worst.b, worst.piece);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }
  // Re-sum to shed the drift of the incremental updates; sort so the
  // summation order does not depend on heap layout.
  std::vector<Interval> all;
  all.reserve(queue.size());
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const Interval& x, const Interval& y) {
    if (x.piece != y.piece) return x.piece < y.piece;
    return x.a < y.a;
  });
  QuadratureResult result;
  for (const auto& iv : all) {
    result.value += iv.value;
    result.abs_error += iv.error;
  }
  result.intervals = count;
  result.converged =
      converged || result.abs_error <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(result.value));
  return result;
}

std::vector<Interval> panels(const Evaluator& eval, double a, double b, double width) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double lo = a + (b - a) * i / n;
    const double hi = (i + 1 == n) ? b : a + (b - a) * (i + 1) / n;
    out.push_back(gauss_kronrod(eval, lo, hi, Piece::Core));
  }
  return out;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0) || !(rel_tol > 0) || !(tail_cutoff > 0) || max_subdivisions < 1 ||
      !(panel_width > 0)) {
    throw Error(ErrorCode::InvalidArgument,
                "QuadratureSpec requires abs_tol, rel_tol, tail_cutoff, panel_width > 0 and "
                "max_subdivisions >= 1");
  }
}

QuadratureResult integrate_detailed(const RealFunction& g, const QuadratureSpec& spec) {
  spec.validate();
  const double cutoff = spec.tail_cutoff;
  const Evaluator eval(g, cutoff);
  // Equal numbers of panels on each side keep 0 as a breakpoint.
  auto initial = panels(eval, 0.0, cutoff, spec.panel_width);
  auto negative = panels(eval, -cutoff, 0.0, spec.panel_width);
  initial.insert(initial.begin(), negative.begin(), negative.end());
  if (spec.include_tails) {
    initial.push_back(gauss_kronrod(eval, 0.0, 1.0, Piece::RightTail));
    initial.push_back(gauss_kronrod(eval, 0.0, 1.0, Piece::LeftTail));
  }
  return refine(eval, std::move(initial), spec);
}

double integrate(const RealFunction& g, const QuadratureSpec& spec) {
  const QuadratureResult r = integrate_detailed(g, spec);
  if (!r.converged) {
    throw Error(ErrorCode::ToleranceNotMet,
                "quadrature error estimate " + std::to_string(r.abs_error) +
                    " exceeds the requested tolerance");
  }
  return r.value;
}

QuadratureResult integrate_interval(const RealFunction& g, double a, double b,
                                    const QuadratureSpec& spec) {
  spec.validate();
  if (!(std::isfinite(a) && std::isfinite(b))) {
    throw Error(ErrorCode::InvalidArgument, "integrate_interval needs finite limits");
  }
  if (a == b) return QuadratureResult{0.0, 0.0, 0, true};
  const Evaluator eval(g, 1.0);
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  QuadratureResult r = refine(eval, panels(eval, lo, hi, spec.panel_width), spec);
  if (a > b) r.value = -r.value;
  return r;
}

}  // namespace skewsing

#include <cmath>
#include <string>

#include "skewsing/error.hpp"
#include "skewsing/numerics.hpp"

namespace skewsing {

namespace {

double checked(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite value in finite difference");
  return v;
}

double stencil(const SkewingCallable& pi, double z, int order, double h) {
  auto p = [&](double d) { return checked(pi(z, d)); };
  switch (order) {
    case 1:
      return (p(h) - p(-h)) / (2.0 * h);
    case 2:
      return (p(h) - 2.0 * p(0.0) + p(-h)) / (h * h);
    default:
      return (p(2.0 * h) - 2.0 * p(h) + 2.0 * p(-h) - p(-2.0 * h)) / (2.0 * h * h * h);
  }
}

}  // namespace

double default_delta_step(int order) {
  switch (order) {
    case 1: return 1e-5;
    case 2: return 1e-3;
    case 3: return 1e-2;
    default:
      throw Error(ErrorCode::InvalidArgument, "derivative order must be 1, 2 or 3");
  }
}

double diff_delta(const SkewingCallable& pi, double z, int order, double step) {
  if (order < 1 || order > 3) {
    throw Error(ErrorCode::InvalidArgument,
                "diff_delta: order must be 1, 2 or 3, got " + std::to_string(order));
  }
  const double h = step > 0.0 ? step : default_delta_step(order);
  // All three stencils have O(h^2) leading error, so one Richardson step with
  // ratio 2 removes it.
  const double coarse = stencil(pi, z, order, h);
  const double fine = stencil(pi, z, order, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

double derivative(const RealFunction& g, double x, double step) {
  auto d = [&](double h) { return (checked(g(x + h)) - checked(g(x - h))) / (2.0 * h); };
  return (4.0 * d(0.5 * step) - d(step)) / 3.0;
}

}  // namespace skewsing

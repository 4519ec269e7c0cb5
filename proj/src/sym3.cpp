#include <algorithm>
#include <cmath>

#include "skewsing/error.hpp"
#include "skewsing/numerics.hpp"

namespace skewsing {

Sym3 Sym3::from_full(const std::array<std::array<double, 3>, 3>& a) {
  return Sym3{a[0][0], a[1][1], a[2][2], 0.5 * (a[0][1] + a[1][0]), 0.5 * (a[0][2] + a[2][0]),
              0.5 * (a[1][2] + a[2][1])};
}

double Sym3::operator()(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i == 0 && j == 0) return m11;
  if (i == 1 && j == 1) return m22;
  if (i == 2 && j == 2) return m33;
  if (i == 0 && j == 1) return m12;
  if (i == 0 && j == 2) return m13;
  if (i == 1 && j == 2) return m23;
  throw Error(ErrorCode::InvalidArgument, "Sym3 index out of range");
}

std::array<std::array<double, 3>, 3> Sym3::full() const {
  return {{{m11, m12, m13}, {m12, m22, m23}, {m13, m23, m33}}};
}

double Sym3::determinant() const {
  return m11 * (m22 * m33 - m23 * m23) - m12 * (m12 * m33 - m23 * m13) +
         m13 * (m12 * m23 - m22 * m13);
}

bool Sym3::all_finite() const {
  return std::isfinite(m11) && std::isfinite(m22) && std::isfinite(m33) && std::isfinite(m12) &&
         std::isfinite(m13) && std::isfinite(m23);
}

std::array<double, 3> eigenvalues3(const Sym3& m) {
  if (!m.all_finite()) throw Error(ErrorCode::NonFinite, "eigenvalues3: non-finite entry");
  std::array<double, 3> ev{};
  const double off = m.m12 * m.m12 + m.m13 * m.m13 + m.m23 * m.m23;
  if (off == 0.0) {
    ev = {m.m11, m.m22, m.m33};
  } else {
    constexpr double kTwoThirdsPi = 2.09439510239319549231;
    const double q = m.trace() / 3.0;
    const double d1 = m.m11 - q;
    const double d2 = m.m22 - q;
    const double d3 = m.m33 - q;
    const double p2 = d1 * d1 + d2 * d2 + d3 * d3 + 2.0 * off;
    const double p = std::sqrt(p2 / 6.0);
    const Sym3 b{d1 / p, d2 / p, d3 / p, m.m12 / p, m.m13 / p, m.m23 / p};
    const double r = std::clamp(0.5 * b.determinant(), -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double hi = q + 2.0 * p * std::cos(phi);
    const double lo = q + 2.0 * p * std::cos(phi + kTwoThirdsPi);
    ev = {lo, 3.0 * q - hi - lo, hi};

    // det(A - lambda I) = -l^3 + tr l^2 - c2 l + det
    const double tr = m.trace();
    const double c2 = (m.m11 * m.m22 - m.m12 * m.m12) + (m.m11 * m.m33 - m.m13 * m.m13) +
                      (m.m22 * m.m33 - m.m23 * m.m23);
    const double det = m.determinant();
    auto poly = [&](double l) { return ((-l + tr) * l - c2) * l + det; };
    auto slope = [&](double l) { return (-3.0 * l + 2.0 * tr) * l - c2; };
    const double scale = std::max({std::fabs(ev[0]), std::fabs(ev[2]), 1e-300});
    for (double& l : ev) {
      for (int it = 0; it < 4; ++it) {
        const double s = slope(l);
        if (std::fabs(s) < 1e-8 * scale * scale) break;  // clustered roots
        const double step = poly(l) / s;
        const double next = l - step;
        if (!(std::fabs(poly(next)) < std::fabs(poly(l)))) break;
        l = next;
      }
    }
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

RankReport rank3(const Sym3& m, double rank_tol) {
  RankReport report;
  report.rank_tol = rank_tol;
  report.eigenvalues = eigenvalues3(m);
  double largest = 0.0;
  for (double l : report.eigenvalues) largest = std::max(largest, std::fabs(l));
  report.numeric_rank = 0;
  if (largest == 0.0) return report;
  for (double l : report.eigenvalues) {
    if (std::fabs(l) > rank_tol * largest) ++report.numeric_rank;
  }
  return report;
}

}  // namespace skewsing

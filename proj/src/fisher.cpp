#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewsing/error.hpp"
#include "skewsing/fisher.hpp"

namespace skewsing {

namespace {

double sq(double v) { return v * v; }

void check_scale(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be positive and finite");
  }
}

// Integral of g against the kernel over the standardized variable.
double kernel_moment(const SymmetricKernel& k, const RealFunction& g, const QuadratureSpec& q) {
  const RealFunction& f = k.density;
  return integrate(
      [&](double z) {
        const double fz = f(z);
        return fz == 0.0 ? 0.0 : g(z) * fz;
      },
      q);
}

double kernel_normal_residual(const SymmetricKernel& k) {
  double r = 0.0;
  for (double z : residual_grid()) {
    r = std::max(r, std::fabs(k.location_score(z) - z) / (1.0 + std::fabs(z)));
  }
  return r;
}

}  // namespace

std::vector<double> residual_grid() {
  std::vector<double> g(121);
  for (int i = 0; i <= 120; ++i) g[i] = -6.0 + 0.1 * i;
  g[60] = 0.0;
  return g;
}

LocationScaleInfo location_scale_info(const SymmetricKernel& kernel, const QuadratureSpec& q) {
  const auto& phi = kernel.location_score;
  LocationScaleInfo info;
  info.I_f = kernel_moment(kernel, [&](double z) { return sq(phi(z)); }, q);
  info.J_f = kernel_moment(kernel, [&](double z) { return sq(z * phi(z) - 1.0); }, q);
  return info;
}

AEstimate estimate_a(const SkewSymmetricFamily& fam, const QuadratureSpec& q) {
  const auto& phi = fam.kernel().location_score;
  const auto& psi = fam.skewing().psi;
  const double psi2 = kernel_moment(fam.kernel(), [&](double z) { return sq(psi(z)); }, q);
  if (!(psi2 > 1e-12)) {
    throw Error(ErrorCode::DegenerateSkewing, "int psi^2 f vanishes; skewing has no first-order effect");
  }
  const double cross = kernel_moment(fam.kernel(), [&](double z) { return phi(z) * psi(z); }, q);
  AEstimate est;
  est.a = cross / psi2;
  for (double z : residual_grid()) {
    const double p = phi(z);
    est.residual = std::max(est.residual, std::fabs(p - est.a * psi(z)) / (1.0 + std::fabs(p)));
  }
  return est;
}

Sym3 info_original(const SkewSymmetricFamily& fam, double mu, double sigma, const QuadratureSpec& q) {
  (void)mu;  // theta_0 information does not depend on location
  check_scale(sigma);
  const auto& k = fam.kernel();
  const auto& phi = k.location_score;
  const auto& psi = fam.skewing().psi;
  const LocationScaleInfo ls = location_scale_info(k, q);
  Sym3 m;
  m.m11 = ls.I_f / sq(sigma);
  m.m22 = ls.J_f / sq(sigma);
  m.m33 = 4.0 * kernel_moment(k, [&](double z) { return sq(psi(z)); }, q);
  m.m13 = 2.0 / sigma * kernel_moment(k, [&](double z) { return phi(z) * psi(z); }, q);
  return m;
}

Sym3 info_reparam1(const SkewSymmetricFamily& fam, double mu, double sigma, double a,
                   const QuadratureSpec& q) {
  (void)mu;
  check_scale(sigma);
  if (a == 0.0 || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be nonzero");
  const auto& k = fam.kernel();
  const auto& psi = fam.skewing().psi;
  const auto& psid = fam.skewing().psi_dot;
  auto second = [&](double z) { return psid(z) / a - sq(psi(z)); };
  Sym3 m;
  m.m11 = sq(a) / sq(sigma) * kernel_moment(k, [&](double z) { return sq(psi(z)); }, q);
  m.m22 = kernel_moment(k, [&](double z) { return sq(a * psi(z) * z - 1.0); }, q) / sq(sigma);
  m.m33 = 4.0 * kernel_moment(k, [&](double z) { return sq(second(z)); }, q);
  m.m23 = 2.0 / sigma *
          kernel_moment(k, [&](double z) { return (a * psi(z) * z - 1.0) * second(z); }, q);
  return m;
}

double upsilon_fd(const SkewingFunction& s, double z) {
  return diff_delta(s.pi, z, 3, default_delta_step(3) / std::max(1.0, std::fabs(z)));
}

double upsilon_value(const SkewingFunction& s, double z) {
  return s.upsilon ? s.upsilon(z) : upsilon_fd(s, z);
}

Sym3 info_reparam2(const SkewSymmetricFamily& fam, double mu, double sigma, double a,
                   const QuadratureSpec& q, double kernel_tol) {
  (void)mu;
  check_scale(sigma);
  if (a == 0.0 || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be nonzero");
  if (!(kernel_normal_residual(fam.kernel()) < kernel_tol)) {
    throw Error(ErrorCode::NotGaussianKernel, "reparametrization 2 requires the normal kernel");
  }
  const auto& s = fam.skewing();
  const double a3 = a * a * a;
  auto l3 = [&](double z) {
    return 8.0 / (3.0 * a3) * z * z * z - 8.0 / a3 * z + upsilon_value(s, z) / 3.0;
  };
  const SymmetricKernel& k = fam.kernel();
  Sym3 m;
  m.m11 = 1.0 / sq(sigma);
  m.m22 = 2.0 / sq(sigma);
  m.m13 = kernel_moment(k, [&](double z) { return z * upsilon_value(s, z); }, q) / (3.0 * sigma);
  m.m33 = kernel_moment(k, [&](double z) { return sq(l3(z)); }, q);
  return m;
}

Sym3 info_reparam3(double a, double alpha1, double sigma) {
  check_scale(sigma);
  if (a == 0.0 || !std::isfinite(a) || !std::isfinite(alpha1)) {
    throw Error(ErrorCode::InvalidArgument, "info_reparam3: a must be nonzero, alpha1 finite");
  }
  const double a2 = a * a;
  const double a4 = a2 * a2;
  const double a5 = a4 * a;
  const double a8 = a4 * a4;
  Sym3 m;
  m.m11 = 1.0 / sq(sigma);
  m.m22 = 2.0 / sq(sigma);
  m.m23 = (28.0 / a4 - 4.0 * alpha1 / (3.0 * a)) / sigma;
  m.m33 = 1304.0 / (3.0 * a8) - 112.0 * alpha1 / (3.0 * a5) + 8.0 * alpha1 * alpha1 / (9.0 * a2);
  return m;
}

ScoreVector3 score_with_constants(const SkewSymmetricFamily& fam, double mu, double sigma, double x,
                                  int parametrization, SignBranch branch, const GsnConstants& c) {
  check_scale(sigma);
  const double z = (x - mu) / sigma;
  const double sign = branch == SignBranch::Plus ? 1.0 : -1.0;
  const auto& s = fam.skewing();
  const double a = c.a;
  ScoreVector3 out;
  out.parametrization = parametrization;
  out.sign_branch = branch;
  switch (parametrization) {
    case 0: {
      const double phi = fam.kernel().location_score(z);
      out.l1 = phi / sigma;
      out.l2 = (z * phi - 1.0) / sigma;
      out.l3 = 2.0 * s.psi(z);
      break;
    }
    case 1: {
      const double p = s.psi(z);
      out.l1 = a * p / sigma;
      out.l2 = (z * a * p - 1.0) / sigma;
      out.l3 = sign * 2.0 * (s.psi_dot(z) / a - p * p);
      break;
    }
    case 2: {
      const double a3 = a * a * a;
      out.l1 = z / sigma;
      out.l2 = (z * z - 1.0) / sigma;
      out.l3 = 8.0 / (3.0 * a3) * z * z * z - 8.0 / a3 * z + upsilon_value(s, z) / 3.0;
      break;
    }
    case 3: {
      const double a4 = a * a * a * a;
      const double z2 = z * z;
      out.l1 = z / sigma;
      out.l2 = (z2 - 1.0) / sigma;
      out.l3 = sign * (-10.0 / a4 + 2.0 * c.alpha1 / (3.0 * a) +
                       (6.0 / a4 - 2.0 * c.alpha1 / (3.0 * a)) * z2 + 4.0 / (3.0 * a4) * z2 * z2);
      break;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "parametrization must be 0, 1, 2 or 3");
  }
  if (!std::isfinite(out.l1) || !std::isfinite(out.l2) || !std::isfinite(out.l3)) {
    throw Error(ErrorCode::NonFinite, "score is not finite");
  }
  return out;
}

GsnConstants constants_for(const SkewSymmetricFamily& fam, const SingularityReport& report) {
  GsnConstants c;
  c.a = fam.a_override.value_or(report.a.value_or(0.0));
  c.alpha1 = fam.alpha1_override.value_or(report.alpha1.value_or(0.0));
  c.upsilon_cubic_coeff = report.upsilon_cubic_coeff.value_or(0.0);
  return c;
}

ScoreVector3 score_at(const SkewSymmetricFamily& fam, const SingularityReport& report, double mu,
                      double sigma, double x, int parametrization, SignBranch branch) {
  if (parametrization < 0 || parametrization > 3) {
    throw Error(ErrorCode::InvalidArgument, "parametrization must be 0, 1, 2 or 3");
  }
  if (parametrization > report.order) {
    std::ostringstream os;
    os << "parametrization " << parametrization << " needs singularity order >= " << parametrization
       << ", family has order " << report.order;
    throw Error(ErrorCode::OrderMismatch, os.str());
  }
  return score_with_constants(fam, mu, sigma, x, parametrization, branch, constants_for(fam, report));
}

namespace {

FisherMatrix3 with_rank(const Sym3& m, int k, double rank_tol) {
  if (!m.all_finite()) throw Error(ErrorCode::NonFinite, "information matrix has non-finite entries");
  return FisherMatrix3{m, rank3(m, rank_tol), k};
}

void cross_check(SingularityReport& r, int k, bool stage_passed) {
  const int rank = r.fisher.at(k).rank.numeric_rank;
  const int expected = stage_passed ? 2 : 3;
  if (rank != expected) {
    r.consistent = false;
    std::ostringstream os;
    os << "Gamma(" << k << ") has numeric rank " << rank << " but the analytic stage predicts "
       << expected;
    r.notes.push_back(os.str());
  }
}

}  // namespace

SingularityReport classify(const SkewSymmetricFamily& fam, const ClassifyOptions& opt) {
  SingularityReport r;
  const double tol = opt.residual_tol;
  const auto grid = residual_grid();
  const auto& s = fam.skewing();

  // Stage 1: phi_f = a psi.
  const AEstimate est = estimate_a(fam, opt.quadrature);
  const bool stage1 = est.residual < tol;
  r.residuals["proportionality"] = {est.residual, tol, stage1};
  r.fisher[0] = with_rank(info_original(fam, 0.0, 1.0, opt.quadrature), 0, opt.rank_tol);
  cross_check(r, 0, stage1);
  if (!stage1) return r;

  const double a = est.a;
  r.order = 1;
  r.a = a;
  r.c = 1.0 / a;

  // Stage 2: normal kernel and psi(z) = z/a.
  const double kernel_res = kernel_normal_residual(fam.kernel());
  double lin_res = 0.0;
  for (double z : grid) {
    lin_res = std::max(lin_res, std::fabs(s.psi(z) - z / a) / (1.0 + std::fabs(z / a)));
  }
  const bool stage2 = kernel_res < tol && lin_res < tol;
  r.residuals["kernel_normal"] = {kernel_res, tol, kernel_res < tol};
  r.residuals["psi_linear"] = {lin_res, tol, lin_res < tol};
  r.fisher[1] = with_rank(info_reparam1(fam, 0.0, 1.0, a, opt.quadrature), 1, opt.rank_tol);
  cross_check(r, 1, stage2);
  if (!stage2) return r;
  r.order = 2;

  // Stage 3: Upsilon(z) = alpha1 z - (8/a^3) z^3.
  std::vector<double> ups(grid.size());
  if (s.upsilon) {
    double dev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ups[i] = s.upsilon(grid[i]);
      dev = std::max(dev, std::fabs(ups[i] - upsilon_fd(s, grid[i])) / (1.0 + std::fabs(ups[i])));
    }
    const bool agree = dev < opt.upsilon_consistency_tol;
    r.residuals["upsilon_consistency"] = {dev, opt.upsilon_consistency_tol, agree};
    if (!agree) {
      r.consistent = false;
      r.notes.push_back("analytic and finite-difference Upsilon disagree");
    }
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) ups[i] = upsilon_fd(s, grid[i]);
  }

  // Least squares on the basis {z, z^3}.
  double s11 = 0, s13 = 0, s33 = 0, b1 = 0, b3 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid[i];
    const double z3 = z * z * z;
    s11 += z * z;
    s13 += z * z3;
    s33 += z3 * z3;
    b1 += z * ups[i];
    b3 += z3 * ups[i];
  }
  const double det = s11 * s33 - s13 * s13;
  const double alpha1 = (b1 * s33 - b3 * s13) / det;
  const double alpha2 = (s11 * b3 - s13 * b1) / det;
  double fit_res = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid[i];
    const double fit = alpha1 * z + alpha2 * z * z * z;
    fit_res = std::max(fit_res, std::fabs(ups[i] - fit) / (1.0 + std::fabs(ups[i])));
  }
  const double cubic_res = std::fabs(alpha2 + 8.0 / (a * a * a));
  const bool stage3 = fit_res < tol && cubic_res < tol;
  r.residuals["upsilon_fit"] = {fit_res, tol, fit_res < tol};
  r.residuals["upsilon_cubic"] = {cubic_res, tol, cubic_res < tol};
  r.upsilon_cubic_coeff = alpha2;
  r.fisher[2] = with_rank(info_reparam2(fam, 0.0, 1.0, a, opt.quadrature), 2, opt.rank_tol);
  cross_check(r, 2, stage3);
  if (!stage3) return r;

  r.order = 3;
  r.alpha1 = alpha1;
  r.fisher[3] = with_rank(info_reparam3(a, alpha1, 1.0), 3, opt.rank_tol);
  // Cannot be singular: anything else is a numerical inconsistency.
  cross_check(r, 3, false);
  return r;
}

FisherMatrix3 fisher_matrix(const SkewSymmetricFamily& fam, const SingularityReport& report, int k,
                            double mu, double sigma, const ClassifyOptions& opt) {
  if (k < 0 || k > 3) throw Error(ErrorCode::InvalidArgument, "parametrization must be 0, 1, 2 or 3");
  if (k > report.order) {
    std::ostringstream os;
    os << "Gamma(" << k << ") needs singularity order >= " << k << ", family has order "
       << report.order;
    throw Error(ErrorCode::OrderMismatch, os.str());
  }
  const GsnConstants c = constants_for(fam, report);
  Sym3 m;
  switch (k) {
    case 0: m = info_original(fam, mu, sigma, opt.quadrature); break;
    case 1: m = info_reparam1(fam, mu, sigma, c.a, opt.quadrature); break;
    case 2: m = info_reparam2(fam, mu, sigma, c.a, opt.quadrature, opt.residual_tol); break;
    default: m = info_reparam3(c.a, c.alpha1, sigma); break;
  }
  return with_rank(m, k, opt.rank_tol);
}

}  // namespace skewsing

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "skewsing/error.hpp"
#include "skewsing/families.hpp"
#include "skewsing/fisher.hpp"

using namespace skewsing;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2Pi = std::sqrt(2 * kPi);

// Composite Simpson on [-L, L]; an oracle independent of the library's
// adaptive quadrature.
template <class F>
double simpson(F f, double L = 40.0, int cells = 40000) {
  const double h = 2 * L / cells;
  double s = f(-L) + f(L);
  for (int i = 1; i < cells; ++i) s += (i % 2 ? 4 : 2) * f(-L + i * h);
  return s * h / 3;
}

SingularityReport classified(const char* name) { return classify(builtin_family(name)); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST(LocationScale, Normal) {
  const auto i = location_scale_info(normal_kernel());
  EXPECT_NEAR(i.I_f, 1.0, 1e-10);
  EXPECT_NEAR(i.J_f, 2.0, 1e-10);
}

TEST(LocationScale, Logistic) {
  const SymmetricKernel k = logistic_kernel();
  const double oracle = simpson([&](double z) { return std::pow(std::tanh(0.5 * z), 2) * k.density(z); });
  EXPECT_NEAR(oracle, 1.0 / 3.0, 1e-10);
  const auto i = location_scale_info(k);
  EXPECT_NEAR(i.I_f, oracle, 1e-9);
  EXPECT_GT(i.J_f, 0.0);
}

TEST(LocationScale, JPositiveForAllKernels) {
  for (const auto& n : builtin_family_names()) EXPECT_GT(location_scale_info(builtin_family(n).kernel()).J_f, 0) << n;
}

TEST(InfoOriginal, SkewNormal) {
  const Sym3 g = info_original(builtin_family("skew-normal"), 0, 1);
  // Gaussian moments with psi(z) = z / sqrt(2 pi).
  EXPECT_NEAR(g.m11, 1.0, 1e-9);
  EXPECT_NEAR(g.m22, 2.0, 1e-9);
  EXPECT_NEAR(g.m33, 2.0 / kPi, 1e-9);
  EXPECT_NEAR(g.m13, std::sqrt(2.0 / kPi), 1e-9);
  EXPECT_EQ(g.m12, 0.0);
  EXPECT_EQ(g.m23, 0.0);
  EXPECT_EQ(rank3(g).numeric_rank, 2);
}

TEST(InfoOriginal, SkewNormalLogistic) {
  const Sym3 g = info_original(builtin_family("skew-normal-logistic"), 0, 1);
  EXPECT_NEAR(g.m11, 1.0, 1e-9);
  EXPECT_NEAR(g.m33, 0.25, 1e-9);
  EXPECT_NEAR(g.m13, 0.5, 1e-9);
  EXPECT_EQ(rank3(g).numeric_rank, 2);
}

TEST(InfoOriginal, SkewTIsRegular) {
  EXPECT_EQ(rank3(info_original(builtin_family("skew-t"), 0, 1)).numeric_rank, 3);
}

TEST(InfoOriginal, ScaleEquivariance) {
  const auto fam = builtin_family("skew-t");
  const Sym3 a = info_original(fam, 0, 1), b = info_original(fam, 3, 2);
  EXPECT_NEAR(b.m11, a.m11 / 4, 1e-10);
  EXPECT_NEAR(b.m22, a.m22 / 4, 1e-10);
  EXPECT_NEAR(b.m13, a.m13 / 2, 1e-10);
  EXPECT_NEAR(b.m33, a.m33, 1e-10);
}

TEST(EstimateA, Values) {
  const auto sn = estimate_a(builtin_family("skew-normal"));
  EXPECT_NEAR(sn.a, kSqrt2Pi, 1e-9);
  EXPECT_LT(sn.residual, 1e-8);
  EXPECT_NEAR(estimate_a(builtin_family("skew-normal-logistic")).a, 4.0, 1e-9);
  EXPECT_GT(estimate_a(builtin_family("normal-sine")).residual, 1e-2);
}

TEST(EstimateA, DegenerateSkewing) {
  const auto s = expression_skewing("0.5 + 0*delta*z", "0*z", "0*z");
  SkewSymmetricFamily f("flat", normal_kernel(), s);
  EXPECT_EQ(code_of([&] { estimate_a(f); }), ErrorCode::DegenerateSkewing);
}

TEST(InfoReparam1, SkewNormalDoubleSingularity) {
  const Sym3 g = info_reparam1(builtin_family("skew-normal"), 0, 1, kSqrt2Pi);
  EXPECT_NEAR(g.m11, 1.0, 1e-9);
  EXPECT_NEAR(g.m22, 2.0, 1e-9);
  EXPECT_NEAR(g.m33, 2.0 / (kPi * kPi), 1e-9);
  EXPECT_NEAR(g.m23, -2.0 / kPi, 1e-9);
  EXPECT_EQ(g.m12, 0.0);
  EXPECT_EQ(g.m13, 0.0);
  EXPECT_LT(std::fabs(g.m22 * g.m33 - g.m23 * g.m23), 1e-9);
  EXPECT_EQ(rank3(g).numeric_rank, 2);
}

TEST(InfoReparam1, LogisticTanhIsRegular) {
  const auto fam = builtin_family("logistic-tanh");
  const Sym3 g = info_reparam1(fam, 0, 1, kSqrt2Pi);
  EXPECT_EQ(rank3(g).numeric_rank, 3);
  EXPECT_NEAR(g.m11, info_original(fam, 0, 1).m11, 1e-8);
}

TEST(InfoReparam2, SkewNormal) {
  const Sym3 g = info_reparam2(builtin_family("skew-normal"), 0, 1, kSqrt2Pi);
  const double c3 = (8 - 2 * kPi) / (3 * std::pow(2 * kPi, 1.5));
  const double c1 = -8 / std::pow(2 * kPi, 1.5);
  // E(c3 Z^3 + c1 Z)^2 with E Z^6 = 15, E Z^4 = 3.
  const double g33 = 15 * c3 * c3 + 2 * 3 * c3 * c1 + c1 * c1;
  EXPECT_NEAR(g.m13, -1.0 / kSqrt2Pi, 1e-9);
  EXPECT_NEAR(g.m33, g33, 1e-9);
  EXPECT_NEAR(g.m33, 0.16708, 1e-5);
  EXPECT_NEAR(g.m11 * g.m33 - g.m13 * g.m13, 0.00793, 1e-5);
  EXPECT_EQ(rank3(g).numeric_rank, 3);
}

TEST(InfoReparam2, SkewNormalLogisticTripleSingularity) {
  EXPECT_EQ(rank3(info_reparam2(builtin_family("skew-normal-logistic"), 0, 1, 4.0)).numeric_rank, 2);
}

TEST(InfoReparam2, NeedsGaussianKernel) {
  EXPECT_EQ(code_of([] { info_reparam2(builtin_family("logistic-tanh"), 0, 1, kSqrt2Pi); }),
            ErrorCode::NotGaussianKernel);
}

TEST(InfoReparam3, ClosedForm) {
  const Sym3 g = info_reparam3(4.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(g.m23, 28.0 / 256.0);
  EXPECT_NEAR(g.m33, 1304.0 / 196608.0, 1e-15);
  EXPECT_NEAR(g.m22 * g.m33 - g.m23 * g.m23, 0.0013021, 1e-7);
  EXPECT_EQ(rank3(g).numeric_rank, 3);
  EXPECT_EQ(rank3(info_reparam3(kSqrt2Pi, 0.0, 1.0)).numeric_rank, 3);
}

TEST(Scores, SkewNormalThirdOrderAtOne) {
  const auto fam = builtin_family("skew-normal");
  const auto s = score_at(fam, classify(fam), 0, 1, 1.0, 2);
  const double closed_form = (4 - kPi) / (3 * kPi * kSqrt2Pi) - 4 / (kPi * kSqrt2Pi);
  EXPECT_NEAR(s.l3, closed_form, 1e-9);
  EXPECT_NEAR(s.l3, -0.47161, 1e-5);
}

TEST(Scores, SkewNormalLogisticFourthOrderAtZero) {
  const auto fam = builtin_family("skew-normal-logistic");
  EXPECT_NEAR(score_at(fam, classify(fam), 0, 1, 0.0, 3).l3, -10.0 / 256.0, 1e-12);
}

TEST(Scores, OriginalSkewnessScoreIsOdd) {
  for (const auto& f : registry_fixtures()) {
    const auto fam = make_fixture(f);
    const auto rep = classify(fam);
    for (double x : {0.3, 1.1, 2.9}) {
      const double mu = 0.4;
      EXPECT_NEAR(score_at(fam, rep, mu, 1.3, mu + x, 0).l3, -score_at(fam, rep, mu, 1.3, mu - x, 0).l3, 1e-12)
          << f.label;
    }
  }
}

TEST(Scores, SignBranchFlipsSkewness) {
  const auto fam = builtin_family("logistic-tanh");
  const auto rep = classify(fam);
  const auto p = score_at(fam, rep, 0, 1, 0.7, 1, SignBranch::Plus);
  const auto m = score_at(fam, rep, 0, 1, 0.7, 1, SignBranch::Minus);
  EXPECT_EQ(p.l3, -m.l3);
  EXPECT_EQ(p.l1, m.l1);
}

TEST(Scores, OrderMismatch) {
  const auto fam = builtin_family("skew-normal");
  const auto rep = classify(fam);
  EXPECT_EQ(code_of([&] { score_at(fam, rep, 0, 1, 0.5, 3); }), ErrorCode::OrderMismatch);
  EXPECT_EQ(code_of([&] { fisher_matrix(fam, rep, 3, 0, 1); }), ErrorCode::OrderMismatch);
}

// Scores centred, and each information matrix equal to the quadrature of the
// outer product of its own score vector.
TEST(Scores, CentredAndOuterProductMatchesInformation) {
  for (const auto& f : registry_fixtures()) {
    const auto fam = make_fixture(f);
    const auto rep = classify(fam);
    const double mu = 0.0, sigma = 1.0;
    for (int k = 0; k <= rep.order; ++k) {
      auto sc = [&](double z) { return score_at(fam, rep, mu, sigma, mu + sigma * z, k); };
      auto dens = [&](double z) { return fam.kernel().density(z); };
      const double m1 = integrate([&](double z) { return sc(z).l1 * dens(z); });
      const double m2 = integrate([&](double z) { return sc(z).l2 * dens(z); });
      const double m3 = integrate([&](double z) { return sc(z).l3 * dens(z); });
      EXPECT_NEAR(m1, 0, 1e-7) << f.label << " k=" << k;
      EXPECT_NEAR(m2, 0, 1e-7) << f.label << " k=" << k;
      EXPECT_NEAR(m3, 0, 1e-7) << f.label << " k=" << k;
      const Sym3 g = fisher_matrix(fam, rep, k, mu, sigma).matrix;
      auto outer = [&](auto pick) { return integrate([&](double z) { return pick(sc(z)) * dens(z); }); };
      EXPECT_NEAR(g.m11, outer([](auto s) { return s.l1 * s.l1; }), 1e-6) << f.label << " k=" << k;
      EXPECT_NEAR(g.m22, outer([](auto s) { return s.l2 * s.l2; }), 1e-6) << f.label << " k=" << k;
      EXPECT_NEAR(g.m33, outer([](auto s) { return s.l3 * s.l3; }), 1e-6) << f.label << " k=" << k;
      EXPECT_NEAR(g.m12, outer([](auto s) { return s.l1 * s.l2; }), 1e-6) << f.label << " k=" << k;
      EXPECT_NEAR(g.m13, outer([](auto s) { return s.l1 * s.l3; }), 1e-6) << f.label << " k=" << k;
      EXPECT_NEAR(g.m23, outer([](auto s) { return s.l2 * s.l3; }), 1e-6) << f.label << " k=" << k;
    }
  }
}

TEST(Classify, Fixtures) {
  for (const auto& f : registry_fixtures()) {
    const auto rep = classify(make_fixture(f));
    EXPECT_EQ(rep.order, f.expected_order) << f.label;
    EXPECT_TRUE(rep.consistent) << f.label;
    EXPECT_EQ(rep.a.has_value(), rep.order >= 1) << f.label;
    EXPECT_EQ(rep.alpha1.has_value(), rep.order == 3) << f.label;
  }
}

TEST(Classify, Constants) {
  const auto lt = classified("logistic-tanh");
  EXPECT_NEAR(*lt.a, kSqrt2Pi, 1e-8);
  const auto sn = classified("skew-normal");
  EXPECT_NEAR(*sn.a, kSqrt2Pi, 1e-8);
  const auto snl = classified("skew-normal-logistic");
  EXPECT_NEAR(*snl.a, 4.0, 1e-8);
  EXPECT_NEAR(*snl.alpha1, 0.0, 1e-6);
  const auto lift = classified("lifted-skew-normal");
  EXPECT_NEAR(*lift.a, kSqrt2Pi, 1e-8);
  EXPECT_NEAR(*lift.alpha1, 0.0, 1e-6);
}

TEST(Classify, RanksAgreeWithOrder) {
  for (const auto& f : registry_fixtures()) {
    const auto fam = make_fixture(f);
    const auto rep = classify(fam);
    const int s = rep.order;
    if (s > 0) EXPECT_EQ(fisher_matrix(fam, rep, s - 1, 0, 1).rank.numeric_rank, 2) << f.label;
    EXPECT_EQ(fisher_matrix(fam, rep, s, 0, 1).rank.numeric_rank, 3) << f.label;
  }
}

TEST(Classify, UpsilonAnalyticMatchesNumeric) {
  for (const auto& n : builtin_family_names()) {
    const auto fam = builtin_family(n);
    const auto& s = fam.skewing();
    if (!s.upsilon || s.derivative_source != DerivativeSource::Analytic) continue;
    for (double z = -4; z <= 4; z += 0.5) EXPECT_NEAR(s.upsilon(z), upsilon_fd(s, z), 1e-4) << n << " " << z;
  }
}

TEST(Classify, WrongAnalyticUpsilonIsReported) {
  const auto s = expression_skewing("Phi(delta*z)", "z/sqrt(2*pi)", "z");
  const auto rep = classify(SkewSymmetricFamily("bad-upsilon", normal_kernel(), s));
  EXPECT_FALSE(rep.consistent);
  EXPECT_FALSE(rep.notes.empty());
  EXPECT_FALSE(rep.residuals.at("upsilon_consistency").passed);
}

TEST(Classify, ConstantOverridesWin) {
  auto fam = builtin_family("skew-normal-logistic");
  fam.a_override = 4.5;
  const auto c = constants_for(fam, classify(fam));
  EXPECT_EQ(c.a, 4.5);
}

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "skewsing/error.hpp"
#include "skewsing/fisher.hpp"
#include "skewsing/reparam.hpp"

using namespace skewsing;

namespace {

constexpr double kPi = std::numbers::pi;
const double kA = std::sqrt(2 * kPi);

double sn_logpdf(const ThetaOriginal& t, double x) {
  const double z = (x - t.mu) / t.sigma;
  return std::log(2 / t.sigma) - 0.5 * z * z - 0.5 * std::log(2 * kPi) +
         std::log(0.5 * std::erfc(-t.delta * z / std::sqrt(2.0)));
}

// Five-point central difference.
template <class F>
double d1(F f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

}  // namespace

TEST(Reparam1, Examples) {
  const Theta1 z = to_reparam1({0.3, 2, 0}, kA);
  EXPECT_EQ(z.mu1, 0.3);
  EXPECT_EQ(z.sigma1, 2);
  EXPECT_EQ(z.delta1, 0);
  const Theta1 t = to_reparam1({0, 1, 1}, kA);
  EXPECT_NEAR(t.mu1, 2 / kA, 1e-15);
  EXPECT_EQ(t.sigma1, 1);
  EXPECT_EQ(t.delta1, 1);
  EXPECT_EQ(to_reparam1({0, 1, -0.5}, kA).delta1, -0.25);
}

TEST(Reparam2, Examples) {
  const Theta2 t = to_reparam2({0, 1, 1}, kA);
  EXPECT_NEAR(t.sigma2, 1 - 1 / kPi, 1e-15);
  EXPECT_EQ(t.delta2, 1);
  EXPECT_EQ(to_reparam2({0, 1, 1}, 1.0).sigma2, -1.0);
  const Theta2 z = to_reparam2({1, 2, 0}, kA);
  EXPECT_EQ(z.mu2, 1);
  EXPECT_EQ(z.sigma2, 2);
  EXPECT_EQ(z.delta2, 0);
}

TEST(Reparam3, Examples) {
  const Theta3 t = to_reparam3({0, 1, 1}, 4.0, 0.0);
  EXPECT_DOUBLE_EQ(t.mu3, 0.375);
  EXPECT_DOUBLE_EQ(t.sigma3, 0.875);
  EXPECT_EQ(t.delta3, 1);
  EXPECT_LT(to_reparam3({0, 1, -0.3}, 4.0, 0.0).delta3, 0);
  const Theta3 z = to_reparam3({1, 2, 0}, 4.0, 0.7);
  EXPECT_EQ(z.mu3, 1);
  EXPECT_EQ(z.sigma3, 2);
  EXPECT_EQ(z.delta3, 0);
}

TEST(Reparam, RoundTrips) {
  std::mt19937_64 eng(8);
  std::uniform_real_distribution<double> mu(-5, 5), sig(0.1, 5), del(-1.5, 1.5), al(-3, 3);
  for (int i = 0; i < 500; ++i) {
    const ThetaOriginal t{mu(eng), sig(eng), del(eng)};
    const double a = 4.0, alpha1 = al(eng);
    const ThetaOriginal r1 = from_reparam1(to_reparam1(t, a), a);
    const ThetaOriginal r2 = from_reparam2(to_reparam2(t, a), a);
    const ThetaOriginal r3 = from_reparam3(to_reparam3(t, a, alpha1), a, alpha1);
    for (const auto& r : {r1, r2, r3}) {
      EXPECT_NEAR(r.mu, t.mu, 1e-12 * (1 + std::fabs(t.mu)));
      EXPECT_NEAR(r.sigma, t.sigma, 1e-12 * t.sigma);
      EXPECT_NEAR(r.delta, t.delta, 1e-12);
    }
    // Densities agree through the roundtrip.
    const auto fam = builtin_family("skew-normal");
    EXPECT_NEAR(fam.density(r3, 0.4), fam.density(t, 0.4), 1e-12);
  }
}

TEST(Reparam, InverseDomainErrors) {
  EXPECT_THROW(from_reparam2({0, -1, 1}, kA), Error);
  EXPECT_THROW(to_reparam1({0, 1, 1}, 0.0), Error);
}

TEST(CentredParams, Forward) {
  const ThetaCP z = cp_forward({1.5, 2, 0});
  EXPECT_EQ(z.theta1, 1.5);
  EXPECT_EQ(z.theta2, 2);
  EXPECT_EQ(z.gamma1, 0);
  const ThetaCP c = cp_forward({0, 1, 1});
  EXPECT_NEAR(c.theta1, 1 / std::sqrt(kPi), 1e-15);
  EXPECT_NEAR(c.theta2, std::sqrt(1 - 1 / kPi), 1e-15);
  EXPECT_NEAR(c.gamma1, 0.13694, 1e-5);
  const double bound = 0.5 * (4 - kPi) * std::pow(2 / kPi, 1.5) * std::pow(1 - 2 / kPi, -1.5);
  EXPECT_NEAR(cp_gamma1_bound(), bound, 1e-15);
  EXPECT_NEAR(bound, 0.99527, 1e-5);
  EXPECT_NEAR(cp_forward({0, 1, 1e6}).gamma1, bound, 1e-9);
}

// Monte Carlo standard errors from 100 batch estimates.
TEST(CentredParams, MatchesSampleMoments) {
  const auto fam = builtin_family("skew-normal");
  const ThetaOriginal t{0.5, 1.5, 2.0};
  const auto x = fam.sample(t, 10000000, {31, 0});
  const std::size_t batches = 100, per = x.size() / batches;
  auto moments = [&](std::size_t from, std::size_t count) {
    double m = 0, m2 = 0, m3 = 0;
    for (std::size_t i = from; i < from + count; ++i) m += x[i];
    m /= count;
    for (std::size_t i = from; i < from + count; ++i) {
      const double d = x[i] - m;
      m2 += d * d;
      m3 += d * d * d;
    }
    m2 /= count;
    m3 /= count;
    return std::array<double, 3>{m, std::sqrt(m2), m3 / std::pow(m2, 1.5)};
  };
  const auto all = moments(0, x.size());
  std::array<double, 3> ss{};
  for (std::size_t b = 0; b < batches; ++b) {
    const auto e = moments(b * per, per);
    for (int j = 0; j < 3; ++j) ss[j] += (e[j] - all[j]) * (e[j] - all[j]);
  }
  const ThetaCP c = cp_forward(fam, t);
  const double target[3] = {c.theta1, c.theta2, c.gamma1};
  for (int j = 0; j < 3; ++j) {
    const double se = std::sqrt(ss[j] / (batches - 1)) / std::sqrt(static_cast<double>(batches));
    EXPECT_NEAR(all[j], target[j], 3 * se) << j;
  }
}

TEST(CentredParams, OnlySkewNormal) {
  try {
    cp_forward(builtin_family("skew-t"), {0, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSkewNormal);
  }
}

TEST(CentredParams, Inverse) {
  const ThetaOriginal z = cp_inverse({2, 3, 0});
  EXPECT_EQ(z.mu, 2);
  EXPECT_EQ(z.sigma, 3);
  EXPECT_EQ(z.delta, 0);
  const ThetaOriginal r = cp_inverse(cp_forward({0, 1, 1}));
  EXPECT_NEAR(r.mu, 0, 1e-10);
  EXPECT_NEAR(r.sigma, 1, 1e-10);
  EXPECT_NEAR(r.delta, 1, 1e-10);
  try {
    cp_inverse({0, 1, 0.999});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SkewnessOutOfRange);
  }
}

TEST(CentredParams, ForwardOfInverseIsIdentity) {
  std::mt19937_64 eng(12);
  std::uniform_real_distribution<double> g(-0.99, 0.99), m(-3, 3), s(0.2, 4);
  for (int i = 0; i < 200; ++i) {
    const ThetaCP c{m(eng), s(eng), g(eng)};
    const ThetaCP back = cp_forward(cp_inverse(c));
    EXPECT_NEAR(back.theta1, c.theta1, 1e-10);
    EXPECT_NEAR(back.theta2, c.theta2, 1e-10);
    EXPECT_NEAR(back.gamma1, c.gamma1, 1e-10);
  }
}

TEST(Appendix, OursMatchesNumericDerivative) {
  auto g = [](double d2) { return sn_logpdf(from_reparam2({0, 1, d2}, kA), 0.5); };
  EXPECT_NEAR(appendix_score_ours(0, 1, 0.125, 0.5), d1(g, 0.125, 1e-4), 1e-5);
}

TEST(Appendix, OursMirrorSymmetry) {
  EXPECT_NEAR(appendix_score_ours(0, 1, -0.125, -0.5), -appendix_score_ours(0, 1, 0.125, 0.5), 1e-12);
}

// The closed form approaches its limit linearly in delta = delta2^(1/3).
TEST(Appendix, OursLimitsAtZero) {
  const auto fam = builtin_family("skew-normal");
  const auto rep = classify(fam);
  for (double x : {-1.2, 0.4, 2.0}) {
    const double limit = score_at(fam, rep, 0, 1, x, 2).l3;
    EXPECT_NEAR(appendix_score_ours(0, 1, 1e-12, x), limit, 1e-3) << x;
    EXPECT_NEAR(appendix_score_ours(0, 1, -1e-12, x), limit, 1e-3) << x;
  }
}

TEST(Appendix, CpMatchesNumericDerivative) {
  auto g = [](double g1) { return sn_logpdf(cp_inverse({0, 1, g1}), 0.5); };
  EXPECT_NEAR(appendix_score_cp(0, 1, 0.1, 0.5), d1(g, 0.1, 1e-4), 1e-4);
}

TEST(Appendix, CpAntisymmetry) {
  for (double x : {0.2, 1.0, 2.5}) {
    EXPECT_NEAR(appendix_score_cp(0, 1, -0.3, -x), -appendix_score_cp(0, 1, 0.3, x), 1e-10);
  }
}

TEST(Appendix, CpFiniteLimitsAtZero) {
  for (double x : {-1.0, 0.5}) {
    const double a = appendix_score_cp(0, 1, 1e-6, x), b = appendix_score_cp(0, 1, 1e-9, x);
    const double c = appendix_score_cp(0, 1, -1e-6, x), d = appendix_score_cp(0, 1, -1e-9, x);
    EXPECT_TRUE(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d));
    EXPECT_NEAR(a, b, 1e-2 * (1 + std::fabs(a)));
    EXPECT_NEAR(c, d, 1e-2 * (1 + std::fabs(c)));
  }
}

TEST(Appendix, CheckRandomPoints) {
  std::mt19937_64 eng(40);
  std::uniform_real_distribution<double> mag(0.05, 1.0), xs(-3, 3);
  std::vector<std::pair<double, double>> ours, cp;
  for (int i = 0; i < 40; ++i) {
    ours.emplace_back((i % 2 ? -5 : 5) * mag(eng), xs(eng));
    cp.emplace_back((i % 2 ? -0.95 : 0.95) * cp_gamma1_bound() * mag(eng), xs(eng));
  }
  const AppendixReport r = appendix_check(ours, cp, 1e-5);
  EXPECT_TRUE(r.passed) << r.max_rel_deviation;
  EXPECT_EQ(r.points.size(), 80u);
}

TEST(Appendix, DomainChecks) {
  EXPECT_THROW(appendix_score_ours(0, 1, 0, 1), Error);
  EXPECT_THROW(appendix_score_ours(0, -1, 1, 1), Error);
  EXPECT_THROW(appendix_score_cp(0, 1, 0, 1), Error);
  EXPECT_THROW(appendix_score_cp(0, 1, 0.999, 1), Error);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "skewsing/error.hpp"
#include "skewsing/families.hpp"
#include "skewsing/numerics.hpp"

using namespace skewsing;

namespace {

constexpr double kPi = std::numbers::pi;
double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * kPi); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

SkewingFunction bare_skewing(std::string name, SkewingCallable pi) {
  SkewingFunction s;
  s.name = std::move(name);
  s.pi = pi;
  s.log_pi = [pi](double z, double d) { return std::log(pi(z, d)); };
  s.psi = [pi](double z) { return diff_delta(pi, z, 1); };
  s.psi_dot = [pi](double z) { return derivative([&](double t) { return diff_delta(pi, t, 1); }, z, 1e-3); };
  s.derivative_source = DerivativeSource::FiniteDifference;
  return s;
}

}  // namespace

TEST(ValidateSkewing, NormalCdfPasses) {
  const auto rep = validate_skewing(linear_skewing(normal_link()), default_validation_grid());
  EXPECT_TRUE(rep.passed);
  EXPECT_TRUE(rep.failures.empty());
}

TEST(ValidateSkewing, ShiftedArgumentFailsAntisymmetry) {
  const auto s = bare_skewing("Phi(dz+d^2)", [](double z, double d) { return Phi(d * z + d * d); });
  const auto rep = validate_skewing(s, default_validation_grid());
  EXPECT_FALSE(rep.passed);
  EXPECT_GT(rep.max_violation.at("antisymmetry"), 0.1);
  EXPECT_TRUE(std::any_of(rep.failures.begin(), rep.failures.end(),
                          [](const std::string& f) { return f.starts_with("antisymmetry"); }));
}

TEST(ValidateSkewing, SinePasses) {
  EXPECT_TRUE(validate_skewing(sine_skewing(), default_validation_grid()).passed);
}

TEST(ValidateSkewing, EveryBuiltinPasses) {
  for (const auto& name : builtin_family_names()) {
    const auto fam = builtin_family(name);
    EXPECT_TRUE(validate_skewing(fam.skewing(), default_validation_grid()).passed) << name;
    EXPECT_TRUE(validate_kernel(fam.kernel(), default_validation_grid()).passed) << name;
  }
}

TEST(ValidateKernel, RejectsAsymmetricDensity) {
  SymmetricKernel k = normal_kernel();
  k.density = [](double z) { return phi(z - 0.1); };
  k.log_density = [](double z) { return std::log(phi(z - 0.1)); };
  EXPECT_FALSE(validate_kernel(k, default_validation_grid()).passed);
}

TEST(Family, ConstructorRejectsInvalidSkewing) {
  const auto s = bare_skewing("bad", [](double z, double d) { return Phi(d * z + d * d); });
  try {
    SkewSymmetricFamily f("bad", normal_kernel(), s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ValidationFailed);
  }
}

TEST(Density, SkewNormalExamples) {
  const auto sn = builtin_family("skew-normal");
  for (double d : {-3.0, 0.0, 0.4, 7.0}) EXPECT_NEAR(sn.density({0, 1, d}, 0.0), phi(0), 1e-15);
  EXPECT_NEAR(sn.density({0, 1, 1}, 1.0), 2 * phi(1) * Phi(1), 1e-15);
  EXPECT_NEAR(sn.density({0, 1, 1}, 1.0), 0.4071, 1e-4);
  EXPECT_NEAR(sn.log_density({0, 1, 1}, 1.0), std::log(2 * phi(1) * Phi(1)), 1e-14);
  EXPECT_NEAR(sn.log_density({0, 1, 0.5}, 0.0), std::log(phi(0)), 1e-14);
}

TEST(Density, DeltaZeroGivesKernel) {
  for (const auto& name : builtin_family_names()) {
    const auto fam = builtin_family(name);
    for (double x : {-2.0, 0.3, 1.7}) {
      const double z = (x - 0.5) / 1.7;
      EXPECT_NEAR(fam.density({0.5, 1.7, 0.0}, x), fam.kernel().density(z) / 1.7, 1e-14) << name;
      EXPECT_NEAR(fam.log_density({0.5, 1.7, 0.0}, x), std::log(fam.kernel().density(z) / 1.7), 1e-12)
          << name;
    }
  }
}

TEST(Density, LogDensityStaysFiniteInTails) {
  const auto sn = builtin_family("skew-normal");
  EXPECT_TRUE(std::isfinite(sn.log_density({0, 1, 5}, -20.0)));
  EXPECT_EQ(sn.density({0, 1, 5}, -20.0), std::exp(sn.log_density({0, 1, 5}, -20.0)));
}

TEST(Density, IntegratesToOne) {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> mu(-2, 2), sig(0.3, 3), del(-3, 3);
  for (const auto& name : builtin_family_names()) {
    const auto fam = builtin_family(name);
    for (int t = 0; t < 5; ++t) {
      const ThetaOriginal th{mu(eng), sig(eng), del(eng)};
      const double mass = integrate([&](double z) { return th.sigma * fam.density(th, th.mu + th.sigma * z); });
      EXPECT_NEAR(mass, 1.0, 1e-7) << name;
    }
  }
}

TEST(Density, ThetaValidation) {
  EXPECT_THROW((ThetaOriginal{0, 0, 1}.validate()), Error);
  EXPECT_THROW((ThetaOriginal{0, -1, 1}.validate()), Error);
  EXPECT_THROW((ThetaOriginal{std::nan(""), 1, 1}.validate()), Error);
}

TEST(Psi, FiniteDifferenceMatchesAnalytic) {
  for (const auto& name : builtin_family_names()) {
    const auto fam = builtin_family(name);
    const auto& s = fam.skewing();
    if (s.derivative_source != DerivativeSource::Analytic) continue;
    // The Laplace density has a corner at 0, so difference quotients in delta
    // are only first-order accurate there.
    const double tol = name.find("laplace") != std::string::npos ? 1e-4 : 1e-6;
    for (double z = -5; z <= 5; z += 0.25) EXPECT_NEAR(diff_delta(s.pi, z, 1), s.psi(z), tol) << name << z;
  }
}

TEST(Psi, ExpressionSkewingMatchesBuiltin) {
  const auto e = expression_skewing("Phi(delta*z)", "", "");
  const auto b = linear_skewing(normal_link());
  for (double z = -5; z <= 5; z += 0.5) {
    EXPECT_NEAR(e.psi(z), b.psi(z), 1e-6);
    EXPECT_NEAR(e.pi(z, 0.7), b.pi(z, 0.7), 1e-15);
  }
}

TEST(Sample, DeltaZeroSignsAreFair) {
  const auto fam = builtin_family("skew-normal");
  const auto x = fam.sample({0, 1, 0}, 200000, {17, 0});
  const double pos = std::count_if(x.begin(), x.end(), [](double v) { return v > 0; }) / 200000.0;
  EXPECT_NEAR(pos, 0.5, 4 * std::sqrt(0.25 / 200000));
}

TEST(Sample, SkewNormalMean) {
  const auto fam = builtin_family("skew-normal");
  const auto x = fam.sample({0, 1, 1}, 1000000, {18, 0});
  double m = 0;
  for (double v : x) m += v;
  m /= x.size();
  EXPECT_NEAR(m, std::sqrt(2 / kPi) / std::sqrt(2.0), 0.003);
}

TEST(Sample, Deterministic) {
  const auto fam = builtin_family("skew-t");
  EXPECT_EQ(fam.sample({1, 2, 0.5}, 1000, {5, 9}), fam.sample({1, 2, 0.5}, 1000, {5, 9}));
  EXPECT_NE(fam.sample({1, 2, 0.5}, 1000, {5, 9}), fam.sample({1, 2, 0.5}, 1000, {5, 10}));
}

// Pearson chi-square of a binned sample against bin masses from quadrature.
TEST(Sample, HistogramMatchesDensity) {
  const ThetaOriginal th{0, 1, 0.7};
  const std::size_t n = 1000000;
  for (const auto& name : builtin_family_names()) {
    const auto fam = builtin_family(name);
    const auto x = fam.sample(th, n, {2024, 1});
    const double lo = -6, hi = 6;
    const int bins = 200;
    const double w = (hi - lo) / bins;
    std::vector<double> expected(bins + 2), observed(bins + 2);
    double inner = 0;
    for (int b = 0; b < bins; ++b) {
      expected[b] = integrate_interval([&](double t) { return fam.density(th, t); }, lo + b * w, lo + (b + 1) * w).value;
      inner += expected[b];
    }
    expected[bins] = integrate_interval([&](double t) { return fam.density(th, t); }, -1e3, lo).value;
    expected[bins + 1] = std::max(0.0, 1.0 - inner - expected[bins]);
    for (double v : x) {
      int b = v < lo ? bins : v >= hi ? bins + 1 : static_cast<int>((v - lo) / w);
      observed[std::min(b, bins + 1)] += 1;
    }
    // Merge sparse bins into their neighbour.
    double chi2 = 0, e_acc = 0, o_acc = 0;
    int cells = 0;
    for (int b = 0; b < bins + 2; ++b) {
      e_acc += expected[b] * n;
      o_acc += observed[b];
      if (e_acc >= 20) {
        chi2 += (o_acc - e_acc) * (o_acc - e_acc) / e_acc;
        ++cells;
        e_acc = o_acc = 0;
      }
    }
    if (e_acc > 0) {
      chi2 += (o_acc - e_acc) * (o_acc - e_acc) / std::max(e_acc, 1.0);
      ++cells;
    }
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), chi2));
    EXPECT_GT(p, 0.001) << name << " chi2=" << chi2 << " cells=" << cells;
  }
}

TEST(Registry, FixturesAndNames) {
  EXPECT_EQ(registry_fixtures().size(), 9u);
  for (const auto& f : registry_fixtures()) EXPECT_NO_THROW(make_fixture(f)) << f.label;
  EXPECT_THROW(builtin_family("no-such-family"), Error);
}

TEST(Registry, ParametersAreChecked) {
  FamilyParams p;
  p.alpha = 0.5;
  EXPECT_THROW(builtin_family("skew-exponential-power", p), Error);
  p = {};
  p.nu = -1;
  EXPECT_THROW(builtin_family("skew-t", p), Error);
}

TEST(FamilyJson, Shorthand) {
  const auto f = family_from_json(R"({"family": "skew-t", "params": {"nu": 7}})");
  const auto g = builtin_family("skew-t", FamilyParams{7.0, std::nullopt, {}});
  EXPECT_EQ(f.density({0, 1, 0.4}, 0.9), g.density({0, 1, 0.4}, 0.9));
}

TEST(FamilyJson, FullFormWithBuiltins) {
  const auto f = family_from_json(
      R"({"name": "sn-logistic", "kernel": {"builtin": "normal"},
          "skewing": {"builtin": "linear", "params": {"link": "logistic"}}})");
  EXPECT_EQ(f.name(), "sn-logistic");
  EXPECT_NEAR(f.density({0, 1, 1}, 1.0), 2 * phi(1) / (1 + std::exp(-1.0)), 1e-15);
}

TEST(FamilyJson, ExpressionsAndConstants) {
  const auto f = family_from_json(
      R"j({"kernel": {"expr": "phi(z)", "score_expr": "z"},
          "skewing": {"expr": "Phi(delta*z - (4-pi)/(6*pi)*delta^3*z^3)"},
          "psi_expr": "z/sqrt(2*pi)", "constants": {"a": 2.5, "alpha1": 0.25}})j");
  EXPECT_EQ(*f.a_override, 2.5);
  EXPECT_EQ(*f.alpha1_override, 0.25);
  EXPECT_NEAR(f.skewing().psi(1.3), 1.3 / std::sqrt(2 * kPi), 1e-15);
  const double z = 0.8, d = 0.6;
  const double arg = d * z - (4 - kPi) / (6 * kPi) * std::pow(d * z, 3);
  EXPECT_NEAR(f.density({0, 1, d}, z), 2 * phi(z) * Phi(arg), 1e-9);
}

TEST(FamilyJson, Errors) {
  auto code = [](const char* text) {
    try {
      family_from_json(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;  // sentinel: no error
  };
  EXPECT_EQ(code("{not json"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"kernel": {"builtin": "normal"}, "skewing": {"expr": "Phi(delta*"}})"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"kernel": {"builtin": "normal"}})"), ErrorCode::InvalidArgument);
  EXPECT_EQ(code(R"({"kernel": {"builtin": "gumbel"}, "skewing": {"builtin": "linear"}})"),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code(R"({"family": "skew-normal", "constants": {"a": 0}})"), ErrorCode::InvalidArgument);
  EXPECT_EQ(code(R"j({"kernel": {"builtin": "normal"}, "skewing": {"expr": "Phi(delta*z + delta^2)"}})j"),
            ErrorCode::ValidationFailed);
  EXPECT_EQ(code("[1,2]"), ErrorCode::InvalidArgument);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "skewsing/error.hpp"
#include "skewsing/expr.hpp"

using namespace skewsing;
using namespace skewsing::expr;

namespace {

Expr must_parse(std::string_view s) {
  auto r = parse(s);
  if (auto* e = std::get_if<ParseError>(&r)) ADD_FAILURE() << s << ": " << e->describe();
  return std::get<Expr>(r);
}

ParseError must_fail(std::string_view s) {
  auto r = parse(s);
  EXPECT_TRUE(std::holds_alternative<ParseError>(r)) << s;
  return std::holds_alternative<ParseError>(r) ? std::get<ParseError>(r) : ParseError{};
}

}  // namespace

TEST(Parse, SkewNormalSkewing) {
  const Expr e = must_parse("Phi(delta*z)");
  const auto* call = std::get_if<Call>(&e.root().kind);
  ASSERT_NE(call, nullptr);
  EXPECT_EQ(call->func, Func::NormalCdf);
  const auto* mul = std::get_if<Binary>(&call->arg->kind);
  ASSERT_NE(mul, nullptr);
  EXPECT_EQ(mul->op, BinaryOp::Mul);
  EXPECT_EQ(std::get<Variable>(mul->lhs->kind), Variable::Delta);
  EXPECT_EQ(std::get<Variable>(mul->rhs->kind), Variable::Z);
}

TEST(Parse, LiftedDensity) {
  const Expr e = must_parse("2*phi(z)*Phi(delta*z - (4-pi)/(6*pi)*delta^3*z^3)");
  const double z = 0.7, d = 1.3;
  const double arg = d * z - (4 - std::numbers::pi) / (6 * std::numbers::pi) * d * d * d * z * z * z;
  const double oracle = 2 * std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi) * 0.5 *
                        std::erfc(-arg / std::sqrt(2.0));
  EXPECT_NEAR(e(z, d), oracle, 1e-15);
}

TEST(Parse, TruncatedInputPointsAtEnd) {
  const ParseError err = must_fail("Phi(delta*");
  EXPECT_EQ(err.position, 10u);
  EXPECT_NE(err.message.find("expected expression"), std::string::npos);
  EXPECT_FALSE(err.expected.empty());
}

TEST(Parse, ErrorPositions) {
  EXPECT_EQ(must_fail("z + $").position, 4u);
  EXPECT_EQ(must_fail("foo(z)").position, 0u);
  EXPECT_EQ(must_fail("(z + 1").position, 6u);
  EXPECT_EQ(must_fail("z z").position, 2u);
  EXPECT_EQ(must_fail("").position, 0u);
  EXPECT_EQ(must_fail("exp z").position, 4u);
}

TEST(Parse, ThrowingWrapper) {
  try {
    parse_or_throw("1 +");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Parse, Precedence) {
  EXPECT_DOUBLE_EQ(must_parse("2^3^2")(0), 512.0);
  EXPECT_DOUBLE_EQ(must_parse("-2^2")(0), -4.0);
  EXPECT_DOUBLE_EQ(must_parse("2^-1")(0), 0.5);
  EXPECT_DOUBLE_EQ(must_parse("8/4/2")(0), 1.0);
  EXPECT_DOUBLE_EQ(must_parse("1-2-3")(0), -4.0);
  EXPECT_DOUBLE_EQ(must_parse(" 1 +\t2 * 3\n")(0), 7.0);
}

TEST(Parse, PrecedenceProperty) {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const std::string a = std::to_string(u(eng)), b = std::to_string(u(eng)), c = std::to_string(u(eng));
    const std::string lhs = "(" + a + ")+(" + b + ")*(" + c + ")";
    const std::string rhs = "(" + a + ")+((" + b + ")*(" + c + "))";
    EXPECT_EQ(must_parse(lhs)(0), must_parse(rhs)(0));
  }
}

TEST(Parse, RoundTrip) {
  for (const char* s : {"Phi(delta*z)", "2*phi(z)*Phi(delta*z - (4-pi)/(6*pi)*delta^3*z^3)",
                        "-z^2/2 - log(sqrt(2*pi))", "logistic(delta*tanh(z/2))", "abs(sign(z))*e^-z",
                        "--z", "1.5e-3*z", "sin(cos(z))-exp(-abs(z))"}) {
    const Expr e = must_parse(s);
    const Expr back = must_parse(e.to_string());
    EXPECT_TRUE(e == back) << s << " -> " << e.to_string();
  }
}

TEST(Eval, Examples) {
  EXPECT_EQ(must_parse("Phi(delta*z)")(1.0, 0.0), 0.5);
  EXPECT_NEAR(must_parse("phi(z)")(0.0), 0.3989422804, 1e-10);
  EXPECT_EQ(must_parse("logistic(z)")(0.0), 0.5);
  EXPECT_NEAR(must_parse("Phi(z)")(-9.0), 0.5 * std::erfc(9.0 / std::sqrt(2.0)), 1e-30);
  EXPECT_NEAR(must_parse("pi")(0), std::numbers::pi, 0);
  EXPECT_NEAR(must_parse("e")(0), std::numbers::e, 0);
}

TEST(Eval, DomainErrors) {
  const std::pair<const char*, double> cases[] = {{"log(z)", -1.0}, {"log(z)", 0.0}, {"sqrt(z)", -1.0},
                                                  {"1/z", 0.0}};
  for (const auto& [src, z] : cases) {
    try {
      must_parse(src)(z);
      FAIL() << src;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DomainError) << src;
    }
  }
  try {
    must_parse("exp(z)")(1000.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  }
}

TEST(Eval, Deterministic) {
  const Expr e = must_parse("2*phi(z)*Phi(delta*z - (4-pi)/(6*pi)*delta^3*z^3)");
  const Expr f = must_parse("2*phi(z)*Phi(delta*z - (4-pi)/(6*pi)*delta^3*z^3)");
  for (double z = -3; z <= 3; z += 0.37) EXPECT_EQ(e(z, 0.8), f(z, 0.8));
}

TEST(Eval, UsesVariables) {
  EXPECT_TRUE(must_parse("Phi(delta*z)").uses(Variable::Delta));
  EXPECT_FALSE(must_parse("phi(z)").uses(Variable::Delta));
}

// Random byte strings and token soups: every input must give an AST or a
// ParseError whose position lies inside the input.
TEST(Fuzz, ParserIsTotal) {
  std::mt19937_64 eng(20130901);
  const std::vector<std::string> toks = {"z", "delta", "pi", "e", "(", ")", "+", "-", "*", "/", "^",
                                         "1", "2.5", "1e3", "exp", "log", "Phi", "phi", "sin", " ", ".",
                                         "tanh", "logistic", "sign", "abs", "sqrt", "cos", "1e", "@", ","};
  int parsed = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const int len = static_cast<int>(eng() % 16);
    if (i % 2 == 0) {
      for (int k = 0; k < len; ++k) s += static_cast<char>(eng() % 256);
    } else {
      for (int k = 0; k < len; ++k) s += toks[eng() % toks.size()];
    }
    auto r = parse(s);
    if (auto* err = std::get_if<ParseError>(&r)) {
      EXPECT_LE(err->position, s.size()) << s;
    } else {
      ++parsed;
      const Expr& e = std::get<Expr>(r);
      EXPECT_TRUE(e == must_parse(e.to_string())) << s;
      try {
        (void)e(0.3, -0.7);
      } catch (const Error&) {
      }
    }
  }
  EXPECT_GT(parsed, 100);
}

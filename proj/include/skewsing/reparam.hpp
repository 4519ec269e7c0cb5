#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewsing/families.hpp"

namespace skewsing {

struct Theta1 {
  double mu1 = 0.0;
  double sigma1 = 1.0;
  double delta1 = 0.0;  // sign(delta) delta^2
};

struct Theta2 {
  double mu2 = 0.0;
  double sigma2 = 1.0;  // sigma (1 - 2 delta^2 / a^2); may be <= 0
  double delta2 = 0.0;  // delta^3
};

struct Theta3 {
  double mu3 = 0.0;
  double sigma3 = 1.0;
  double delta3 = 0.0;  // sign(delta) delta^4
};

/// Centred parameters of the skew-normal: mean, standard deviation and third
/// standardized cumulant.
struct ThetaCP {
  double theta1 = 0.0;
  double theta2 = 1.0;
  double gamma1 = 0.0;
};

/// sup |gamma1| over the skew-normal family (limit delta -> +-inf).
double cp_gamma1_bound();

Theta1 to_reparam1(const ThetaOriginal& t, double a);
ThetaOriginal from_reparam1(const Theta1& t, double a);
Theta2 to_reparam2(const ThetaOriginal& t, double a);
/// DomainError when the implied sigma is not positive.
ThetaOriginal from_reparam2(const Theta2& t, double a);
Theta3 to_reparam3(const ThetaOriginal& t, double a, double alpha1);
ThetaOriginal from_reparam3(const Theta3& t, double a, double alpha1);

ThetaCP cp_forward(const ThetaOriginal& t);
/// Checks that the family is the skew-normal, NotSkewNormal otherwise.
ThetaCP cp_forward(const SkewSymmetricFamily& fam, const ThetaOriginal& t);
/// Closed-form inverse; SkewnessOutOfRange when |gamma1| >= cp_gamma1_bound().
ThetaOriginal cp_inverse(const ThetaCP& c);

bool is_skew_normal(const SkewSymmetricFamily& fam);

/// Skew-normal score for delta2 in reparametrization 2 at any delta2 != 0,
/// as the ratio h1/h2 of the closed-form expressions.
double appendix_score_ours(double mu2, double sigma2, double delta2, double x);

/// Skew-normal score for gamma1 in the centred parametrization at
/// 0 < |gamma1| < bound, as h1 + h2/h3.
double appendix_score_cp(double theta1, double theta2, double gamma1, double x);

struct AppendixPoint {
  std::string score;  // "ours" or "cp"
  double parameter = 0.0;  // delta2 or gamma1
  double x = 0.0;
  double transcribed = 0.0;
  double numeric = 0.0;
  double rel_deviation = 0.0;
};

struct AppendixReport {
  std::vector<AppendixPoint> points;
  double max_rel_deviation = 0.0;
  double tolerance = 1e-4;
  bool passed = false;
};

/// Compares both transcribed scores, at location 0 and scale 1, with a
/// Richardson central difference of the skew-normal log-density taken
/// through from_reparam2 and cp_inverse respectively. Pairs are
/// (delta2, x) and (gamma1, x).
AppendixReport appendix_check(std::span<const std::pair<double, double>> ours_points,
                              std::span<const std::pair<double, double>> cp_points,
                              double tolerance = 1e-4);

}  // namespace skewsing

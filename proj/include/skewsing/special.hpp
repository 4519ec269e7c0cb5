#pragma once

// Scalar special functions shared by kernels, skewing functions and tests.

namespace skewsing::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double x) noexcept;
// erfc based, accurate in both tails.
double normal_cdf(double x) noexcept;
// log Phi(x); stays finite far into the lower tail.
double normal_log_cdf(double x) noexcept;
double normal_quantile(double p);

double logistic_cdf(double x) noexcept;
double logistic_log_cdf(double x) noexcept;

double student_t_pdf(double x, double nu) noexcept;
double student_t_log_pdf(double x, double nu) noexcept;
// Finite-sum closed forms for integer nu, incomplete beta otherwise.
double student_t_cdf(double x, double nu);
double student_t_log_cdf(double x, double nu);

// Upper tail and quantile of the chi-square law with one degree of freedom.
double chi2_1_upper_tail(double x) noexcept;
double chi2_1_quantile(double p);

}  // namespace skewsing::special

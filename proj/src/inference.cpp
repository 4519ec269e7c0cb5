#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "skewsing/error.hpp"
#include "skewsing/inference.hpp"
#include "skewsing/reparam.hpp"
#include "skewsing/special.hpp"

namespace skewsing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double rms_about(std::span<const double> x, double m) {
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

void check_data(std::span<const double> data, std::size_t min_n) {
  if (data.size() < min_n) {
    std::ostringstream os;
    os << "need at least " << min_n << " observations, got " << data.size();
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "data contain non-finite values");
  }
}

bool kernel_is_normal(const SymmetricKernel& k) {
  for (double z : residual_grid()) {
    if (std::fabs(k.location_score(z) - z) > 1e-12 * (1.0 + std::fabs(z))) return false;
  }
  return true;
}

// Newton iterations on sum phi(z_i) = 0, sum (z_i phi(z_i) - 1) = 0.
Nuisance newton_polish(const SymmetricKernel& k, std::span<const double> data, Nuisance start) {
  Nuisance cur = start;
  auto residual = [&](const Nuisance& p, double& f1, double& f2) {
    f1 = f2 = 0.0;
    for (double x : data) {
      const double z = (x - p.mu) / p.sigma;
      const double ph = k.location_score(z);
      f1 += ph;
      f2 += z * ph - 1.0;
    }
    return std::hypot(f1, f2);
  };
  double f1 = 0, f2 = 0;
  double norm = residual(cur, f1, f2);
  for (int it = 0; it < 30 && norm > 0.0; ++it) {
    double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
    for (double x : data) {
      const double z = (x - cur.mu) / cur.sigma;
      const double ph = k.location_score(z);
      const double dp = k.location_score_slope(z);
      j11 -= dp;
      j12 -= dp * z;
      j21 -= ph + z * dp;
      j22 -= z * ph + z * z * dp;
    }
    j11 /= cur.sigma;
    j12 /= cur.sigma;
    j21 /= cur.sigma;
    j22 /= cur.sigma;
    const double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || det == 0.0) break;
    Nuisance next{cur.mu - (j22 * f1 - j12 * f2) / det, cur.sigma - (j11 * f2 - j21 * f1) / det};
    if (!(next.sigma > 0.0) || !std::isfinite(next.mu)) break;
    double g1 = 0, g2 = 0;
    const double nn = residual(next, g1, g2);
    if (!(nn < norm)) break;
    cur = next;
    f1 = g1;
    f2 = g2;
    norm = nn;
  }
  return cur;
}

}  // namespace

Nuisance symmetric_mle(const SymmetricKernel& kernel, std::span<const double> data) {
  check_data(data, 2);
  const double m = mean_of(data);
  const double sd = rms_about(data, m);
  if (!(sd > 0.0)) throw Error(ErrorCode::InvalidArgument, "data have zero spread");
  if (kernel_is_normal(kernel)) return {m, sd};

  const double n = static_cast<double>(data.size());
  Objective nll = [&](std::span<const double> p) {
    const double sigma = std::exp(p[1]);
    double s = 0.0;
    for (double x : data) s += kernel.log_density((x - p[0]) / sigma);
    return -(s - n * p[1]);
  };
  MinimizeOptions opt;
  opt.x_tol = 1e-10;
  opt.f_tol = 1e-11;
  opt.initial_step = {0.2 * sd, 0.2};
  opt.restarts = 1;
  const MinimizeResult r = minimize(nll, {m, std::log(sd)}, Box::unbounded(2), opt);
  Nuisance est{r.argmin[0], std::exp(r.argmin[1])};
  bool smooth = true;
  for (double x : data) {
    if (!std::isfinite(kernel.location_score_slope((x - est.mu) / est.sigma))) {
      smooth = false;
      break;
    }
  }
  return smooth ? newton_polish(kernel, data, est) : est;
}

namespace {

LMResult finish_lm(double sum, double denom, double scale, std::size_t n, Nuisance nu, bool estimated,
                   LmVariant variant) {
  // Relative to gamma33, which sets the magnitude of both terms.
  if (!(denom > 1e-8 * scale) || !std::isfinite(denom)) {
    throw Error(ErrorCode::DegenerateDenominator, "LM statistic denominator vanishes");
  }
  LMResult r;
  r.statistic = sum * sum / static_cast<double>(n) / denom;
  if (!std::isfinite(r.statistic)) throw Error(ErrorCode::NonFinite, "LM statistic is not finite");
  r.p_value = special::chi2_1_upper_tail(r.statistic);
  r.nuisance = nu;
  r.nuisance_estimated = estimated;
  r.n = n;
  r.variant = variant;
  return r;
}

Nuisance resolve_nuisance(std::span<const double> data, const SkewSymmetricFamily& fam,
                          const std::optional<Nuisance>& given) {
  if (given) {
    check_data(data, 2);
    if (!(given->sigma > 0.0) || !std::isfinite(given->mu)) {
      throw Error(ErrorCode::InvalidArgument, "nuisance sigma must be positive");
    }
    return *given;
  }
  check_data(data, 10);
  return symmetric_mle(fam.kernel(), data);
}

void require_order(const SingularityReport& report, int order, const char* test) {
  if (report.order != order) {
    std::ostringstream os;
    os << test << " needs singularity order " << order << ", family has order " << report.order;
    throw Error(ErrorCode::OrderMismatch, os.str());
  }
}

}  // namespace

LMResult lm_test_simple(std::span<const double> data, const SkewSymmetricFamily& fam,
                        const SingularityReport& report, std::optional<Nuisance> nuisance) {
  require_order(report, 1, "simple LM test");
  const Nuisance nu = resolve_nuisance(data, fam, nuisance);
  const GsnConstants c = constants_for(fam, report);
  const Sym3 g = info_reparam1(fam, nu.mu, nu.sigma, c.a);
  const double coef = g.m23 / g.m22;
  double sum = 0.0;
  for (double x : data) {
    const ScoreVector3 s = score_with_constants(fam, nu.mu, nu.sigma, x, 1, SignBranch::Plus, c);
    sum += s.l3 - coef * s.l2;
  }
  return finish_lm(sum, g.m33 - g.m23 * g.m23 / g.m22, g.m33, data.size(), nu, !nuisance, LmVariant::Simple);
}

LMResult lm_test_double(std::span<const double> data, const SkewSymmetricFamily& fam,
                        const SingularityReport& report, std::optional<Nuisance> nuisance) {
  require_order(report, 2, "double LM test");
  const Nuisance nu = resolve_nuisance(data, fam, nuisance);
  const GsnConstants c = constants_for(fam, report);
  const Sym3 g = info_reparam2(fam, nu.mu, nu.sigma, c.a);
  const double s2 = nu.sigma * nu.sigma;
  double sum = 0.0;
  for (double x : data) {
    const ScoreVector3 s = score_with_constants(fam, nu.mu, nu.sigma, x, 2, SignBranch::Plus, c);
    sum += s.l3 - s2 * g.m13 * s.l1;
  }
  return finish_lm(sum, g.m33 - s2 * g.m13 * g.m13, g.m33, data.size(), nu, !nuisance, LmVariant::Double);
}

double log_likelihood(const SkewSymmetricFamily& fam, const ThetaOriginal& theta,
                      std::span<const double> data) {
  theta.validate();
  const double inv = 1.0 / theta.sigma;
  const double base = std::log(2.0 * inv);
  const auto& lf = fam.kernel().log_density;
  const auto& lp = fam.skewing().log_pi;
  double s = 0.0;
  for (double x : data) {
    const double z = (x - theta.mu) * inv;
    s += base + lf(z) + lp(z, theta.delta);
  }
  return s;
}

namespace {

double skew_power(double delta, int k) {
  switch (k) {
    case 0: return delta;
    case 1: return std::copysign(delta * delta, delta);
    case 2: return delta * delta * delta;
    default: return std::copysign(delta * delta * delta * delta, delta);
  }
}

ThetaOriginal to_original(std::span<const double> p, int k, const GsnConstants& c) {
  switch (k) {
    case 0: return {p[0], p[1], p[2]};
    case 1: return from_reparam1({p[0], p[1], p[2]}, c.a);
    case 2: return from_reparam2({p[0], p[1], p[2]}, c.a);
    default: return from_reparam3({p[0], p[1], p[2]}, c.a, c.alpha1);
  }
}

std::vector<double> to_coordinates(const ThetaOriginal& t, int k, const GsnConstants& c) {
  switch (k) {
    case 0: return {t.mu, t.sigma, t.delta};
    case 1: {
      const Theta1 q = to_reparam1(t, c.a);
      return {q.mu1, q.sigma1, q.delta1};
    }
    case 2: {
      const Theta2 q = to_reparam2(t, c.a);
      return {q.mu2, q.sigma2, q.delta2};
    }
    default: {
      const Theta3 q = to_reparam3(t, c.a, c.alpha1);
      return {q.mu3, q.sigma3, q.delta3};
    }
  }
}

}  // namespace

namespace {

// Location and scale whose mean and standard deviation at this delta equal
// the sample's; nullopt when the kernel lacks a second moment.
std::optional<ThetaOriginal> moment_start(const SkewSymmetricFamily& fam, double delta, double mean,
                                          double sd) {
  const auto& f = fam.kernel().density;
  const auto& pi = fam.skewing().pi;
  QuadratureSpec q;
  q.rel_tol = 1e-6;
  q.max_subdivisions = 200;
  try {
    const double m1 = integrate([&](double z) { return 2.0 * z * f(z) * pi(z, delta); }, q);
    const double m2 = integrate([&](double z) { return 2.0 * z * z * f(z) * pi(z, delta); }, q);
    const double v = m2 - m1 * m1;
    if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
    const double sigma = sd / std::sqrt(v);
    return ThetaOriginal{mean - sigma * m1, sigma, delta};
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

MLEFit fit_mle(std::span<const double> data, const SkewSymmetricFamily& fam, int k,
               const GsnConstants& c, const FitOptions& o) {
  check_data(data, 10);
  if (k < 0 || k > 3) throw Error(ErrorCode::InvalidArgument, "parametrization must be 0, 1, 2 or 3");
  if (k > 0 && (c.a == 0.0 || !std::isfinite(c.a))) {
    throw Error(ErrorCode::InvalidArgument, "reparametrized fit needs the constant a");
  }
  if (!(o.delta_bound > 0.0) || !(o.sigma_lower > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fit bounds must be positive");
  }

  Objective nll = [&](std::span<const double> p) {
    ThetaOriginal t;
    try {
      t = to_original(p, k, c);
    } catch (const Error&) {
      return kInf;
    }
    if (t.sigma < o.sigma_lower || std::fabs(t.delta) > o.delta_bound) return kInf;
    const double ll = log_likelihood(fam, t, data);
    return std::isfinite(ll) ? -ll : kInf;
  };

  // The symmetric fit is always a candidate; it is also the start.
  const Nuisance sym = symmetric_mle(fam.kernel(), data);
  const ThetaOriginal sym_theta{sym.mu, std::max(sym.sigma, o.sigma_lower), 0.0};
  const double sym_nll = -log_likelihood(fam, sym_theta, data);

  const double bound_k = skew_power(o.delta_bound, k);
  Box box = Box::unbounded(3);
  box.lower[2] = -bound_k;
  box.upper[2] = bound_k;
  if (k <= 1) box.lower[1] = o.sigma_lower;

  MinimizeOptions mo;
  mo.x_tol = o.x_tol * std::max(1.0, sym.sigma);
  mo.f_tol = o.f_tol;
  mo.max_evaluations = o.max_evaluations;
  mo.restarts = std::max(0, o.restarts);
  mo.seed = o.seed;
  mo.initial_step = {0.2 * sym.sigma, 0.2 * sym.sigma, skew_power(0.5, k)};

  MLEFit fit;
  fit.theta_hat = sym_theta;
  fit.loglik = -sym_nll;
  fit.converged = true;

  // The likelihood can have a separate mode for each sign of delta, so the
  // search runs from the symmetric fit and from the best point of a coarse
  // scan on either side. Scan points match the sample mean and spread.
  const std::vector<double> sym_coords = to_coordinates(sym_theta, k, c);
  std::vector<std::vector<double>> starts{sym_coords};
  double mean = 0.0, sq = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  for (double x : data) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / static_cast<double>(data.size()));
  for (double sign : {1.0, -1.0}) {
    std::vector<double> best;
    double best_value = kInf;
    for (double d : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0}) {
      if (d >= o.delta_bound) break;
      std::vector<double> p = sym_coords;
      p[2] = skew_power(sign * d, k);
      if (const auto t = moment_start(fam, sign * d, mean, sd)) {
        try {
          p = to_coordinates(*t, k, c);
        } catch (const Error&) {
        }
      }
      const double v = nll(p);
      if (v < best_value) best_value = v, best = p;
    }
    if (!best.empty()) starts.push_back(best);
  }

  MinimizeResult best;
  for (const auto& start : starts) {
    const MinimizeResult r = minimize(nll, start, box, mo);
    fit.evaluations += r.evaluations;
    fit.restarts_used += r.restarts_used;
    if (r.value < best.value || best.argmin.empty()) best = r;
  }
  fit.converged = best.converged;
  // Keep the symmetric point unless the search improves on it by more than
  // its own tolerance; this returns delta = 0 exactly at a boundary maximum.
  if (std::isfinite(best.value) && best.value < sym_nll - o.f_tol) {
    fit.theta_hat = to_original(best.argmin, k, c);
    fit.loglik = -best.value;
  }
  return fit;
}

double sample_quantile(std::vector<double> v, double q) {
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

SeedSpec replication_seed(const SeedSpec& master, std::size_t grid_index, int replication) {
  const std::uint64_t grid_master =
      stream_seed(SeedSpec{master.master_seed, 0x9E3779B97F4A7C15ULL + grid_index});
  return SeedSpec{grid_master ^ master.stream_index, static_cast<std::uint64_t>(replication)};
}

RateResult rate_experiment(const SkewSymmetricFamily& fam, const SingularityReport& report,
                           const RateOptions& o) {
  if (o.n_grid.size() < 4) throw Error(ErrorCode::InvalidArgument, "rate grid needs at least 4 points");
  for (std::size_t i = 0; i < o.n_grid.size(); ++i) {
    if (o.n_grid[i] < 10 || (i > 0 && o.n_grid[i] <= o.n_grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "rate grid must be increasing with n >= 10");
    }
  }
  if (o.replications < 1) throw Error(ErrorCode::InvalidArgument, "replications must be positive");
  const int k = o.parametrization < 0 ? report.order : o.parametrization;
  if (k > report.order) {
    throw Error(ErrorCode::OrderMismatch, "rate experiment parametrization exceeds the family order");
  }
  const GsnConstants c = constants_for(fam, report);

  RateResult res;
  res.n_grid = o.n_grid;
  res.replications = o.replications;
  res.parametrization = k;
  res.seed = o.seed;
  const std::size_t reps = static_cast<std::size_t>(o.replications);
  const std::size_t total = o.n_grid.size() * reps;
  res.raw.resize(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t = next++; t < total; t = next++) {
      const std::size_t j = t / reps;
      const int rep = static_cast<int>(t % reps);
      RateReplicate& out = res.raw[t];
      out.n = o.n_grid[j];
      out.replication = rep;
      try {
        const SeedSpec seed = replication_seed(o.seed, j, rep);
        const std::vector<double> data = fam.sample(ThetaOriginal{0.0, 1.0, 0.0}, out.n, seed);
        FitOptions fo = o.fit;
        fo.seed = SeedSpec{seed.master_seed, seed.stream_index + 0x5BD1E995ULL};
        const MLEFit fit = fit_mle(data, fam, k, c, fo);
        out.delta_hat = fit.theta_hat.delta;
        out.loglik = fit.loglik;
        out.converged = fit.converged;
      } catch (const std::exception&) {
        out.failed = true;
      }
    }
  };
  unsigned threads = o.threads > 0 ? static_cast<unsigned>(o.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  res.summary_quantile = o.summary_quantile.value_or(k % 2 == 1 ? 0.75 : 0.5);
  if (!(res.summary_quantile > 0.0 && res.summary_quantile < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "summary quantile must lie in (0, 1)");
  }

  // Reduction in index order.
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < o.n_grid.size(); ++j) {
    std::vector<double> abs_delta;
    int failed = 0, nonconv = 0, zeros = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const RateReplicate& rr = res.raw[j * reps + r];
      if (rr.failed) {
        ++failed;
        continue;
      }
      if (!rr.converged) ++nonconv;
      if (rr.delta_hat == 0.0) ++zeros;
      abs_delta.push_back(std::fabs(rr.delta_hat));
    }
    res.failures.push_back(failed);
    res.nonconverged.push_back(nonconv);
    const double med = abs_delta.empty() ? 0.0 : sample_quantile(abs_delta, 0.5);
    const double summ = abs_delta.empty() ? 0.0 : sample_quantile(abs_delta, res.summary_quantile);
    res.median_abs_delta.push_back(med);
    res.summary_abs_delta.push_back(summ);
    res.zero_fraction.push_back(abs_delta.empty() ? 0.0 : zeros / static_cast<double>(abs_delta.size()));
    lx.push_back(std::log(static_cast<double>(o.n_grid[j])));
    ly.push_back(summ > 0 ? std::log(summ) : -kInf);
  }

  const bool usable = std::all_of(ly.begin(), ly.end(), [](double v) { return std::isfinite(v); });
  if (!usable) {
    res.status = "summary |delta_hat| is zero at some grid point; slope undefined";
    res.slope = std::numeric_limits<double>::quiet_NaN();
    res.slope_stderr = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  res.slope = sxy / sxx;
  double ssr = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (my + res.slope * (lx[i] - mx));
    ssr += e * e;
  }
  res.slope_stderr = std::sqrt(ssr / (m - 2.0) / sxx);
  return res;
}

}  // namespace skewsing

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "json.hpp"
#include "skewsing/error.hpp"
#include "skewsing/fisher.hpp"
#include "skewsing/inference.hpp"
#include "skewsing/report.hpp"
#include "skewsing/reparam.hpp"
#include "skewsing/skewsing.h"

struct sks_family {
  skewsing::SkewSymmetricFamily fam;
};

namespace {

using nlohmann::json;
using namespace skewsing;

thread_local std::string g_last_error;

sks_status code_to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonFinite: return SKS_NON_FINITE;
    case ErrorCode::ToleranceNotMet: return SKS_TOLERANCE_NOT_MET;
    case ErrorCode::MaxIterations: return SKS_MAX_ITERATIONS;
    case ErrorCode::ParseError: return SKS_PARSE_ERROR;
    case ErrorCode::DomainError: return SKS_DOMAIN_ERROR;
    case ErrorCode::InvalidArgument: return SKS_INVALID_ARGUMENT;
    case ErrorCode::DegenerateSkewing: return SKS_DEGENERATE_SKEWING;
    case ErrorCode::NotGaussianKernel: return SKS_NOT_GAUSSIAN_KERNEL;
    case ErrorCode::OrderMismatch: return SKS_ORDER_MISMATCH;
    case ErrorCode::InconsistentDiagnostics: return SKS_INCONSISTENT_DIAGNOSTICS;
    case ErrorCode::DegenerateDenominator: return SKS_DEGENERATE_DENOMINATOR;
    case ErrorCode::NotSkewNormal: return SKS_NOT_SKEW_NORMAL;
    case ErrorCode::SkewnessOutOfRange: return SKS_SKEWNESS_OUT_OF_RANGE;
    case ErrorCode::ValidationFailed: return SKS_VALIDATION_FAILED;
    case ErrorCode::IoError: return SKS_IO_ERROR;
  }
  return SKS_INTERNAL;
}

template <class F>
sks_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SKS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return code_to_status(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("options: ") + e.what();
    return SKS_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SKS_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SKS_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

json parse_options(const char* text) {
  if (!text || !*text) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("options JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "options must be a JSON object");
  return j;
}

template <class T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
}

ClassifyOptions classify_options(const char* text) {
  const json j = parse_options(text);
  ClassifyOptions o;
  read(j, "residual_tol", o.residual_tol);
  read(j, "rank_tol", o.rank_tol);
  read(j, "upsilon_consistency_tol", o.upsilon_consistency_tol);
  read(j, "abs_tol", o.quadrature.abs_tol);
  read(j, "rel_tol", o.quadrature.rel_tol);
  require_positive(o.residual_tol, "residual_tol");
  require_positive(o.rank_tol, "rank_tol");
  require_positive(o.upsilon_consistency_tol, "upsilon_consistency_tol");
  o.quadrature.validate();
  return o;
}

SeedSpec read_seed(const json& j, SeedSpec s) {
  read(j, "seed", s.master_seed);
  read(j, "stream", s.stream_index);
  return s;
}

FitOptions fit_options(const json& j, FitOptions o) {
  read(j, "delta_bound", o.delta_bound);
  read(j, "sigma_lower", o.sigma_lower);
  read(j, "restarts", o.restarts);
  read(j, "x_tol", o.x_tol);
  read(j, "f_tol", o.f_tol);
  read(j, "max_evaluations", o.max_evaluations);
  o.seed = read_seed(j, o.seed);
  require_positive(o.x_tol, "x_tol");
  require_positive(o.f_tol, "f_tol");
  return o;
}

ThetaOriginal theta_of(const double* t) { return {t[0], t[1], t[2]}; }

const SkewSymmetricFamily& family_of(const sks_family* f) {
  require(f != nullptr, "family handle is null");
  return f->fam;
}

std::span<const double> data_of(const double* data, size_t n) {
  require(data != nullptr || n == 0, "data pointer is null");
  return {data, n};
}

}  // namespace

extern "C" {

const char* sks_status_name(sks_status s) {
  switch (s) {
    case SKS_OK: return "OK";
    case SKS_NON_FINITE: return to_string(ErrorCode::NonFinite);
    case SKS_TOLERANCE_NOT_MET: return to_string(ErrorCode::ToleranceNotMet);
    case SKS_MAX_ITERATIONS: return to_string(ErrorCode::MaxIterations);
    case SKS_PARSE_ERROR: return to_string(ErrorCode::ParseError);
    case SKS_DOMAIN_ERROR: return to_string(ErrorCode::DomainError);
    case SKS_INVALID_ARGUMENT: return to_string(ErrorCode::InvalidArgument);
    case SKS_DEGENERATE_SKEWING: return to_string(ErrorCode::DegenerateSkewing);
    case SKS_NOT_GAUSSIAN_KERNEL: return to_string(ErrorCode::NotGaussianKernel);
    case SKS_ORDER_MISMATCH: return to_string(ErrorCode::OrderMismatch);
    case SKS_INCONSISTENT_DIAGNOSTICS: return to_string(ErrorCode::InconsistentDiagnostics);
    case SKS_DEGENERATE_DENOMINATOR: return to_string(ErrorCode::DegenerateDenominator);
    case SKS_NOT_SKEW_NORMAL: return to_string(ErrorCode::NotSkewNormal);
    case SKS_SKEWNESS_OUT_OF_RANGE: return to_string(ErrorCode::SkewnessOutOfRange);
    case SKS_VALIDATION_FAILED: return to_string(ErrorCode::ValidationFailed);
    case SKS_IO_ERROR: return to_string(ErrorCode::IoError);
    case SKS_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* sks_last_error(void) { return g_last_error.c_str(); }

int sks_status_is_input_error(sks_status s) {
  switch (s) {
    case SKS_PARSE_ERROR:
    case SKS_DOMAIN_ERROR:
    case SKS_INVALID_ARGUMENT:
    case SKS_NOT_GAUSSIAN_KERNEL:
    case SKS_ORDER_MISMATCH:
    case SKS_NOT_SKEW_NORMAL:
    case SKS_SKEWNESS_OUT_OF_RANGE:
    case SKS_VALIDATION_FAILED:
    case SKS_IO_ERROR:
      return 1;
    default:
      return 0;
  }
}

void sks_string_free(char* s) { std::free(s); }

sks_status sks_family_from_json(const char* text, sks_family** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new sks_family{family_from_json(text)};
  });
}

sks_status sks_family_builtin(const char* name, const char* params_json, sks_family** out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    const json j = parse_options(params_json);
    FamilyParams p;
    if (j.contains("nu")) p.nu = j.at("nu").get<double>();
    if (j.contains("alpha")) p.alpha = j.at("alpha").get<double>();
    read(j, "coefficients", p.coefficients);
    *out = new sks_family{builtin_family(name, p)};
  });
}

void sks_family_free(sks_family* fam) { delete fam; }

sks_status sks_family_name(const sks_family* fam, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = dup_string(family_of(fam).name());
  });
}

sks_status sks_builtin_names(char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = dup_string(json(builtin_family_names()).dump());
  });
}

sks_status sks_density(const sks_family* fam, const double theta[3], double x, double* out) {
  return guarded([&] {
    require(theta != nullptr && out != nullptr, "null argument");
    *out = family_of(fam).density(theta_of(theta), x);
  });
}

sks_status sks_log_likelihood(const sks_family* fam, const double theta[3], const double* data, size_t n,
                              double* out) {
  return guarded([&] {
    require(theta != nullptr && out != nullptr, "null argument");
    *out = log_likelihood(family_of(fam), theta_of(theta), data_of(data, n));
  });
}

sks_status sks_simulate(const sks_family* fam, const double theta[3], size_t n, uint64_t seed,
                        uint64_t stream, double* out) {
  return guarded([&] {
    require(theta != nullptr && (out != nullptr || n == 0), "null argument");
    const std::vector<double> x = family_of(fam).sample(theta_of(theta), n, SeedSpec{seed, stream});
    std::copy(x.begin(), x.end(), out);
  });
}

sks_status sks_classify(const sks_family* fam, const char* options_json, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = dup_string(to_json(classify(family_of(fam), classify_options(options_json))));
  });
}

sks_status sks_order(const sks_family* fam, const char* options_json, int* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = classify(family_of(fam), classify_options(options_json)).order;
  });
}

sks_status sks_fisher(const sks_family* fam, int k, double mu, double sigma, const char* options_json,
                      char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(k >= 0 && k <= 3, "parametrization must be 0, 1, 2 or 3");
    require(sigma > 0.0 && std::isfinite(mu), "sigma must be positive and mu finite");
    const ClassifyOptions o = classify_options(options_json);
    const SkewSymmetricFamily& f = family_of(fam);
    *out = dup_string(to_json(fisher_matrix(f, classify(f, o), k, mu, sigma, o)));
  });
}

sks_status sks_score(const sks_family* fam, int k, double mu, double sigma, double x, int minus_branch,
                     double out[3]) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const SkewSymmetricFamily& f = family_of(fam);
    const ScoreVector3 s = score_at(f, classify(f), mu, sigma, x, k,
                                    minus_branch ? SignBranch::Minus : SignBranch::Plus);
    out[0] = s.l1;
    out[1] = s.l2;
    out[2] = s.l3;
  });
}

sks_status sks_lm_test(const sks_family* fam, const double* data, size_t n, int variant,
                       const double* nuisance, double alpha, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(variant == 0 || variant == 1, "variant must be 0 (simple) or 1 (double)");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    const SkewSymmetricFamily& f = family_of(fam);
    std::optional<Nuisance> nu;
    if (nuisance) nu = Nuisance{nuisance[0], nuisance[1]};
    const SingularityReport rep = classify(f);
    const auto d = data_of(data, n);
    const LMResult r = variant == 0 ? lm_test_simple(d, f, rep, nu) : lm_test_double(d, f, rep, nu);
    *out = dup_string(to_json(r, alpha));
  });
}

sks_status sks_fit_mle(const sks_family* fam, const double* data, size_t n, int k, const char* options_json,
                       char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const SkewSymmetricFamily& f = family_of(fam);
    const FitOptions o = fit_options(parse_options(options_json), FitOptions{});
    GsnConstants c;
    if (k > 0) {
      const SingularityReport rep = classify(f);
      if (k > rep.order) throw Error(ErrorCode::OrderMismatch, "parametrization exceeds the family order");
      c = constants_for(f, rep);
    }
    *out = dup_string(to_json(fit_mle(data_of(data, n), f, k, c, o)));
  });
}

sks_status sks_rate_experiment(const sks_family* fam, const char* options_json, char** out_json,
                               char** out_csv) {
  return guarded([&] {
    require(out_json != nullptr, "null argument");
    const json j = parse_options(options_json);
    RateOptions o;
    read(j, "n_grid", o.n_grid);
    read(j, "replications", o.replications);
    read(j, "threads", o.threads);
    read(j, "parametrization", o.parametrization);
    if (j.contains("summary_quantile")) o.summary_quantile = j.at("summary_quantile").get<double>();
    o.seed = read_seed(j, o.seed);
    if (j.contains("fit")) o.fit = fit_options(j.at("fit"), o.fit);
    const SkewSymmetricFamily& f = family_of(fam);
    const RateResult r = rate_experiment(f, classify(f), o);
    std::string js = to_json(r);
    std::string csv = out_csv ? rate_raw_csv(r) : std::string();
    *out_json = dup_string(js);
    if (out_csv) *out_csv = dup_string(csv);
  });
}

sks_status sks_to_reparam(int k, const double theta[3], double a, double alpha1, double out[3]) {
  return guarded([&] {
    require(theta != nullptr && out != nullptr, "null argument");
    const ThetaOriginal t = theta_of(theta);
    switch (k) {
      case 0: t.validate(); out[0] = t.mu; out[1] = t.sigma; out[2] = t.delta; break;
      case 1: { const Theta1 q = to_reparam1(t, a); out[0] = q.mu1; out[1] = q.sigma1; out[2] = q.delta1; break; }
      case 2: { const Theta2 q = to_reparam2(t, a); out[0] = q.mu2; out[1] = q.sigma2; out[2] = q.delta2; break; }
      case 3: {
        const Theta3 q = to_reparam3(t, a, alpha1);
        out[0] = q.mu3; out[1] = q.sigma3; out[2] = q.delta3;
        break;
      }
      default: throw Error(ErrorCode::InvalidArgument, "parametrization must be 0, 1, 2 or 3");
    }
  });
}

sks_status sks_from_reparam(int k, const double c[3], double a, double alpha1, double out[3]) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    ThetaOriginal t;
    switch (k) {
      case 0: t = theta_of(c); t.validate(); break;
      case 1: t = from_reparam1({c[0], c[1], c[2]}, a); break;
      case 2: t = from_reparam2({c[0], c[1], c[2]}, a); break;
      case 3: t = from_reparam3({c[0], c[1], c[2]}, a, alpha1); break;
      default: throw Error(ErrorCode::InvalidArgument, "parametrization must be 0, 1, 2 or 3");
    }
    out[0] = t.mu;
    out[1] = t.sigma;
    out[2] = t.delta;
  });
}

sks_status sks_cp_forward(const sks_family* fam, const double theta[3], double out[3]) {
  return guarded([&] {
    require(theta != nullptr && out != nullptr, "null argument");
    const ThetaCP c = fam ? cp_forward(fam->fam, theta_of(theta)) : cp_forward(theta_of(theta));
    out[0] = c.theta1;
    out[1] = c.theta2;
    out[2] = c.gamma1;
  });
}

sks_status sks_cp_inverse(const double cp[3], double out[3]) {
  return guarded([&] {
    require(cp != nullptr && out != nullptr, "null argument");
    const ThetaOriginal t = cp_inverse({cp[0], cp[1], cp[2]});
    out[0] = t.mu;
    out[1] = t.sigma;
    out[2] = t.delta;
  });
}

double sks_cp_gamma1_bound(void) { return cp_gamma1_bound(); }

sks_status sks_appendix_score_ours(double mu2, double sigma2, double delta2, double x, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = appendix_score_ours(mu2, sigma2, delta2, x);
  });
}

sks_status sks_appendix_score_cp(double theta1, double theta2, double gamma1, double x, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = appendix_score_cp(theta1, theta2, gamma1, x);
  });
}

sks_status sks_appendix_check(const double* ours, size_t m_ours, const double* cp, size_t m_cp,
                              double tolerance, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require((ours != nullptr || m_ours == 0) && (cp != nullptr || m_cp == 0), "null point array");
    require_positive(tolerance, "tolerance");
    std::vector<std::pair<double, double>> a, b;
    for (size_t i = 0; i < m_ours; ++i) a.emplace_back(ours[2 * i], ours[2 * i + 1]);
    for (size_t i = 0; i < m_cp; ++i) b.emplace_back(cp[2 * i], cp[2 * i + 1]);
    *out = dup_string(to_json(appendix_check(a, b, tolerance)));
  });
}

}  // extern "C"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "skewsing/report.hpp"

namespace skewsing {

namespace {

using nlohmann::json;

// Tracks whether any non-finite value was replaced by null.
struct Sink {
  bool clean = true;

  json num(double v) {
    if (std::isfinite(v)) return v;
    clean = false;
    return nullptr;
  }

  std::string finish(json& j) {
    if (!j.contains("status")) j["status"] = clean ? "ok" : "non-finite values reported as null";
    return j.dump(2) + "\n";
  }
};

json matrix_json(Sink& s, const Sym3& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) {
    json row = json::array();
    for (int j = 0; j < 3; ++j) row.push_back(s.num(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json fisher_json(Sink& s, const FisherMatrix3& m) {
  json j;
  j["parametrization"] = m.parametrization;
  j["matrix"] = matrix_json(s, m.matrix);
  j["rank"] = m.rank.numeric_rank;
  j["rank_tol"] = s.num(m.rank.rank_tol);
  j["eigenvalues"] = json::array();
  for (double e : m.rank.eigenvalues) j["eigenvalues"].push_back(s.num(e));
  j["determinant"] = s.num(m.matrix.determinant());
  return j;
}

json opt(Sink& s, const std::optional<double>& v) { return v ? s.num(*v) : json(nullptr); }

json seed_json(const SeedSpec& seed) {
  return json{{"master_seed", seed.master_seed}, {"stream_index", seed.stream_index}};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string to_json(const SingularityReport& r) {
  Sink s;
  json j;
  j["order"] = r.order;
  j["a"] = opt(s, r.a);
  j["c"] = opt(s, r.c);
  j["alpha1"] = opt(s, r.alpha1);
  j["upsilon_cubic_coeff"] = opt(s, r.upsilon_cubic_coeff);
  j["consistent"] = r.consistent;
  j["notes"] = r.notes;
  json res = json::object();
  for (const auto& [name, st] : r.residuals) {
    res[name] = {{"value", s.num(st.value)}, {"tolerance", s.num(st.tolerance)}, {"passed", st.passed}};
  }
  j["residuals"] = res;
  json fm = json::object();
  for (const auto& [k, m] : r.fisher) fm[std::to_string(k)] = fisher_json(s, m);
  j["fisher"] = fm;
  return s.finish(j);
}

std::string to_json(const FisherMatrix3& m) {
  Sink s;
  json j = fisher_json(s, m);
  return s.finish(j);
}

std::string to_json(const LMResult& r, double alpha) {
  Sink s;
  json j;
  j["variant"] = r.variant == LmVariant::Simple ? "simple" : "double";
  j["statistic"] = s.num(r.statistic);
  j["p_value"] = s.num(r.p_value);
  j["n"] = r.n;
  j["nuisance"] = {{"mu", s.num(r.nuisance.mu)}, {"sigma", s.num(r.nuisance.sigma)}};
  j["nuisance_estimated"] = r.nuisance_estimated;
  j["alpha"] = s.num(alpha);
  j["reject"] = r.p_value < alpha;
  return s.finish(j);
}

std::string to_json(const MLEFit& f) {
  Sink s;
  json j;
  j["theta_hat"] = {{"mu", s.num(f.theta_hat.mu)}, {"sigma", s.num(f.theta_hat.sigma)},
                    {"delta", s.num(f.theta_hat.delta)}};
  j["loglik"] = s.num(f.loglik);
  j["converged"] = f.converged;
  j["restarts_used"] = f.restarts_used;
  j["evaluations"] = f.evaluations;
  return s.finish(j);
}

std::string to_json(const RateResult& r) {
  Sink s;
  json j;
  j["n_grid"] = r.n_grid;
  auto vec = [&](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(s.num(x));
    return a;
  };
  j["median_abs_delta"] = vec(r.median_abs_delta);
  j["summary_quantile"] = s.num(r.summary_quantile);
  j["summary_abs_delta"] = vec(r.summary_abs_delta);
  j["zero_fraction"] = vec(r.zero_fraction);
  j["failures"] = r.failures;
  j["nonconverged"] = r.nonconverged;
  j["slope"] = s.num(r.slope);
  j["slope_stderr"] = s.num(r.slope_stderr);
  j["replications"] = r.replications;
  j["parametrization"] = r.parametrization;
  j["seed"] = seed_json(r.seed);
  j["status"] = r.status;
  return s.finish(j);
}

std::string to_json(const ThetaCP& c) {
  Sink s;
  json j{{"theta1", s.num(c.theta1)}, {"theta2", s.num(c.theta2)}, {"gamma1", s.num(c.gamma1)}};
  return s.finish(j);
}

std::string to_json(const ThetaOriginal& t) {
  Sink s;
  json j{{"mu", s.num(t.mu)}, {"sigma", s.num(t.sigma)}, {"delta", s.num(t.delta)}};
  return s.finish(j);
}

std::string to_json(const AppendixReport& r) {
  Sink s;
  json j;
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"score", p.score},
                   {"parameter", s.num(p.parameter)},
                   {"x", s.num(p.x)},
                   {"transcribed", s.num(p.transcribed)},
                   {"numeric", s.num(p.numeric)},
                   {"rel_deviation", s.num(p.rel_deviation)}});
  }
  j["points"] = pts;
  j["max_rel_deviation"] = s.num(r.max_rel_deviation);
  j["tolerance"] = s.num(r.tolerance);
  j["passed"] = r.passed;
  return s.finish(j);
}

std::string rate_raw_csv(const RateResult& r) {
  std::ostringstream os;
  os << "n,replication,delta_hat,loglik,converged,failed\n";
  for (const auto& x : r.raw) {
    os << x.n << ',' << x.replication << ',' << format_double(x.delta_hat) << ','
       << format_double(x.loglik) << ',' << (x.converged ? 1 : 0) << ',' << (x.failed ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace skewsing

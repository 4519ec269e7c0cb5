// Command-line front end. Talks to the library through the C API only.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "skewsing/skewsing.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitInput = 2;

// Raised inside a command; carries the exit code.
struct Failure {
  int exit_code;
  std::string message;
};

void check(sks_status s, const char* what) {
  if (s == SKS_OK) return;
  std::string msg = std::string(what) + ": " + sks_status_name(s) + ": " + sks_last_error();
  throw Failure{sks_status_is_input_error(s) ? kExitInput : kExitNumeric, msg};
}

struct CString {
  char* p = nullptr;
  ~CString() { sks_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct FamilyDeleter {
  void operator()(sks_family* f) const { sks_family_free(f); }
};
using FamilyPtr = std::unique_ptr<sks_family, FamilyDeleter>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitInput, "cannot open " + path};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitInput, "cannot write " + path};
  out << text;
  if (!out) throw Failure{kExitInput, "write failed: " + path};
}

// A path to a family spec file, or a builtin family name.
FamilyPtr load_family(const std::string& spec) {
  sks_family* f = nullptr;
  if (std::filesystem::is_regular_file(spec)) {
    const std::string text = read_file(spec);
    check(sks_family_from_json(text.c_str(), &f), "family spec");
  } else {
    check(sks_family_builtin(spec.c_str(), nullptr, &f), "family");
  }
  return FamilyPtr(f);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<double> read_data_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<double> x;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == "x") continue;
    double v = 0.0;
    const auto r = std::from_chars(line.data(), line.data() + line.size(), v);
    if (r.ec != std::errc() || r.ptr != line.data() + line.size()) {
      throw Failure{kExitInput, path + ":" + std::to_string(lineno) + ": not a number: " + line};
    }
    x.push_back(v);
  }
  return x;
}

void emit(const std::string& json_text, const std::string& out_path) {
  std::cout << json_text;
  if (!out_path.empty()) write_file(out_path, json_text);
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SKEWSING_SEED")) {
    std::uint64_t v = 0;
    const std::string s(env);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return v;
    std::cerr << "ignoring malformed SKEWSING_SEED\n";
  }
  return 20130901;
}

struct Tolerances {
  std::optional<double> residual_tol, rank_tol, upsilon_tol, abs_tol, rel_tol;

  std::string json() const {
    nlohmann::json j = nlohmann::json::object();
    if (residual_tol) j["residual_tol"] = *residual_tol;
    if (rank_tol) j["rank_tol"] = *rank_tol;
    if (upsilon_tol) j["upsilon_consistency_tol"] = *upsilon_tol;
    if (abs_tol) j["abs_tol"] = *abs_tol;
    if (rel_tol) j["rel_tol"] = *rel_tol;
    return j.dump();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-information singularities of skew-symmetric families"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string family;
  std::string json_out;
  std::uint64_t seed = default_seed();
  Tolerances tol;

  auto add_family = [&](CLI::App* c) {
    c->add_option("--family", family, "family spec JSON file or builtin name")->required();
  };
  auto add_tolerances = [&](CLI::App* c) {
    c->add_option("--residual-tol", tol.residual_tol, "classification residual tolerance (1e-6)");
    c->add_option("--rank-tol", tol.rank_tol, "relative eigenvalue rank tolerance (1e-7)");
    c->add_option("--upsilon-tol", tol.upsilon_tol, "analytic vs numeric third derivative (1e-4)");
    c->add_option("--abs-tol", tol.abs_tol, "quadrature absolute tolerance (1e-10)");
    c->add_option("--rel-tol", tol.rel_tol, "quadrature relative tolerance (1e-9)");
  };

  // classify
  auto* classify = app.add_subcommand("classify", "singularity order and constants");
  add_family(classify);
  add_tolerances(classify);
  classify->add_option("--json", json_out, "also write the report here");

  // fisher
  int param = 0;
  double mu = 0.0, sigma = 1.0, delta = 0.0;
  auto* fisher = app.add_subcommand("fisher", "information matrix at delta = 0");
  add_family(fisher);
  add_tolerances(fisher);
  fisher->add_option("--param", param, "parametrization 0..3")->required()->check(CLI::Range(0, 3));
  fisher->add_option("--mu", mu, "location");
  fisher->add_option("--sigma", sigma, "scale");
  fisher->add_option("--json", json_out, "also write the matrix here");

  // simulate
  std::size_t n = 0;
  std::string out_path;
  auto* simulate = app.add_subcommand("simulate", "draw a sample to CSV");
  add_family(simulate);
  simulate->add_option("--mu", mu, "location");
  simulate->add_option("--sigma", sigma, "scale");
  simulate->add_option("--delta", delta, "skewness");
  simulate->add_option("--n", n, "sample size")->required();
  simulate->add_option("--seed", seed, "master seed (env SKEWSING_SEED)");
  simulate->add_option("--out", out_path, "CSV path; stdout when absent");

  // lm
  std::string data_path, variant = "auto";
  double alpha = 0.05;
  std::optional<double> nu_mu, nu_sigma;
  auto* lm = app.add_subcommand("lm", "LM test of symmetry");
  add_family(lm);
  lm->add_option("--data", data_path, "CSV with header x")->required();
  lm->add_option("--variant", variant, "simple, double or auto")
      ->check(CLI::IsMember({"simple", "double", "auto"}));
  lm->add_option("--alpha", alpha, "test level");
  lm->add_option("--mu", nu_mu, "fixed location instead of the symmetric MLE");
  lm->add_option("--sigma", nu_sigma, "fixed scale instead of the symmetric MLE");
  lm->add_option("--json", json_out, "also write the result here");

  // rate
  std::vector<std::size_t> grid{250, 500, 1000, 2000, 4000, 8000, 16000};
  int reps = 500, threads = 0, rate_param = -1;
  std::optional<double> quantile;
  auto* rate = app.add_subcommand("rate", "Monte Carlo rate of the skewness estimator");
  add_family(rate);
  rate->add_option("--grid", grid, "sample sizes")->delimiter(',');
  rate->add_option("--reps", reps, "replications per sample size");
  rate->add_option("--seed", seed, "master seed (env SKEWSING_SEED)");
  rate->add_option("--threads", threads, "worker threads, 0 for all cores");
  rate->add_option("--param", rate_param, "fit parametrization, default the family order");
  rate->add_option("--quantile", quantile, "quantile of |delta_hat| for the slope");
  rate->add_option("--out", out_path, "per-replication CSV");
  rate->add_option("--json", json_out, "also write the summary here");

  // cp
  bool forward = false, inverse = false;
  double theta1 = 0.0, theta2 = 1.0, gamma1 = 0.0;
  auto* cp = app.add_subcommand("cp", "centred parametrization of the skew-normal");
  auto* fwd = cp->add_flag("--forward", forward, "(mu, sigma, delta) to CP");
  cp->add_flag("--inverse", inverse, "CP to (mu, sigma, delta)")->excludes(fwd);
  cp->add_option("--mu", mu);
  cp->add_option("--sigma", sigma);
  cp->add_option("--delta", delta);
  cp->add_option("--theta1", theta1);
  cp->add_option("--theta2", theta2);
  cp->add_option("--gamma1", gamma1);
  cp->add_option("--json", json_out, "also write the result here");

  // appendix-check
  std::string grid_of;
  int points = 40;
  double app_tol = 1e-4;
  auto* appx = app.add_subcommand("appendix-check", "transcribed closed-form scores vs numeric derivatives");
  appx->add_option("--grid-of", grid_of, "CSV with header score,parameter,x (score: ours|cp)");
  appx->add_option("--points", points, "random points per score when no grid is given");
  appx->add_option("--seed", seed, "master seed (env SKEWSING_SEED)");
  appx->add_option("--tol", app_tol, "relative tolerance");
  appx->add_option("--json", json_out, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*classify) {
      FamilyPtr f = load_family(family);
      CString out;
      check(sks_classify(f.get(), tol.json().c_str(), &out.p), "classify");
      emit(out.str(), json_out);
    } else if (*fisher) {
      FamilyPtr f = load_family(family);
      CString out;
      check(sks_fisher(f.get(), param, mu, sigma, tol.json().c_str(), &out.p), "fisher");
      emit(out.str(), json_out);
    } else if (*simulate) {
      FamilyPtr f = load_family(family);
      std::vector<double> x(n);
      const double theta[3] = {mu, sigma, delta};
      check(sks_simulate(f.get(), theta, n, seed, 0, x.data()), "simulate");
      std::string csv = "x\n";
      for (double v : x) csv += fmt(v) + "\n";
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        write_file(out_path, csv);
      }
    } else if (*lm) {
      FamilyPtr f = load_family(family);
      const std::vector<double> x = read_data_csv(data_path);
      if (nu_mu.has_value() != nu_sigma.has_value()) {
        throw Failure{kExitInput, "give both --mu and --sigma or neither"};
      }
      int v = variant == "double" ? 1 : 0;
      if (variant == "auto") {
        int order = 0;
        check(sks_order(f.get(), nullptr, &order), "classify");
        v = order == 2 ? 1 : 0;
      }
      const double nuis[2] = {nu_mu.value_or(0.0), nu_sigma.value_or(1.0)};
      CString out;
      check(sks_lm_test(f.get(), x.data(), x.size(), v, nu_mu ? nuis : nullptr, alpha, &out.p), "lm");
      emit(out.str(), json_out);
    } else if (*rate) {
      FamilyPtr f = load_family(family);
      nlohmann::json o;
      o["n_grid"] = grid;
      o["replications"] = reps;
      o["seed"] = seed;
      o["threads"] = threads;
      o["parametrization"] = rate_param;
      if (quantile) o["summary_quantile"] = *quantile;
      CString js, csv;
      check(sks_rate_experiment(f.get(), o.dump().c_str(), &js.p, out_path.empty() ? nullptr : &csv.p),
            "rate");
      if (!out_path.empty()) write_file(out_path, csv.str());
      emit(js.str(), json_out);
    } else if (*cp) {
      if (!forward && !inverse) throw Failure{kExitInput, "cp needs --forward or --inverse"};
      double in[3], res[3];
      nlohmann::json j;
      if (forward) {
        in[0] = mu, in[1] = sigma, in[2] = delta;
        check(sks_cp_forward(nullptr, in, res), "cp");
        j = {{"theta1", res[0]}, {"theta2", res[1]}, {"gamma1", res[2]}};
      } else {
        in[0] = theta1, in[1] = theta2, in[2] = gamma1;
        check(sks_cp_inverse(in, res), "cp");
        j = {{"mu", res[0]}, {"sigma", res[1]}, {"delta", res[2]}};
      }
      j["status"] = "ok";
      emit(j.dump(2) + "\n", json_out);
    } else if (*appx) {
      std::vector<double> ours, cpp;
      if (!grid_of.empty()) {
        std::istringstream in(read_file(grid_of));
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
          ++lineno;
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.empty() || (lineno == 1 && line.rfind("score", 0) == 0)) continue;
          std::istringstream ls(line);
          std::string which, p, x;
          if (!std::getline(ls, which, ',') || !std::getline(ls, p, ',') || !std::getline(ls, x)) {
            throw Failure{kExitInput, grid_of + ":" + std::to_string(lineno) + ": expected score,parameter,x"};
          }
          double pv = 0, xv = 0;
          try {
            pv = std::stod(p);
            xv = std::stod(x);
          } catch (const std::exception&) {
            throw Failure{kExitInput, grid_of + ":" + std::to_string(lineno) + ": not a number"};
          }
          auto& dst = which == "ours" ? ours : cpp;
          if (which != "ours" && which != "cp") {
            throw Failure{kExitInput, grid_of + ":" + std::to_string(lineno) + ": score must be ours or cp"};
          }
          dst.push_back(pv);
          dst.push_back(xv);
        }
      } else {
        std::mt19937_64 eng(seed);
        std::uniform_real_distribution<double> mag(0.05, 1.0), sgn(-1.0, 1.0), xs(-3.0, 3.0);
        const double bound = sks_cp_gamma1_bound();
        for (int i = 0; i < points; ++i) {
          const double s = sgn(eng) < 0 ? -1.0 : 1.0;
          ours.push_back(s * 5.0 * mag(eng));
          ours.push_back(xs(eng));
          const double t = sgn(eng) < 0 ? -1.0 : 1.0;
          cpp.push_back(t * 0.95 * bound * mag(eng));
          cpp.push_back(xs(eng));
        }
      }
      CString out;
      check(sks_appendix_check(ours.data(), ours.size() / 2, cpp.data(), cpp.size() / 2, app_tol, &out.p),
            "appendix-check");
      emit(out.str(), json_out);
      const auto rep = nlohmann::json::parse(out.str());
      if (!rep.at("passed").get<bool>()) return kExitNumeric;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

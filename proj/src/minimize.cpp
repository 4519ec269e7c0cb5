#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "skewsing/error.hpp"
#include "skewsing/numerics.hpp"

namespace skewsing {

std::uint64_t stream_seed(const SeedSpec& seed) noexcept {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(seed.master_seed) ^ splitmix(seed.stream_index ^ 0xD1B54A32D192ED03ULL));
}

Box Box::unbounded(std::size_t dim) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return Box{std::vector<double>(dim, -inf), std::vector<double>(dim, inf)};
}

void Box::project(std::span<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i < lower.size()) x[i] = std::max(x[i], lower[i]);
    if (i < upper.size()) x[i] = std::min(x[i], upper[i]);
  }
}

namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

class NelderMead {
 public:
  NelderMead(const Objective& objective, const Box& bounds, const MinimizeOptions& options)
      : objective_(objective), bounds_(bounds), options_(options) {}

  double eval(std::vector<double>& x) {
    bounds_.project(x);
    ++evaluations_;
    const double v = objective_(std::span<const double>(x));
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  }

  // Returns true on convergence, false when the evaluation budget ran out.
  bool run(Simplex& s) {
    const std::size_t n = s.x.size() - 1;
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n);
    std::vector<double> trial(n);
    std::vector<double> trial2(n);
    while (true) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[n - 1];

      double fspread = 0.0;
      double xspread = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        fspread = std::max(fspread, std::fabs(s.f[i] - s.f[best]));
        for (std::size_t j = 0; j < n; ++j) {
          xspread = std::max(xspread, std::fabs(s.x[i][j] - s.x[best][j]));
        }
      }
      if (std::isfinite(s.f[best]) && fspread <= options_.f_tol && xspread <= options_.x_tol) {
        return true;
      }
      if (evaluations_ >= options_.max_evaluations) return false;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == worst) continue;
        for (std::size_t j = 0; j < n; ++j) centroid[j] += s.x[i][j];
      }
      for (double& c : centroid) c /= static_cast<double>(n);

      auto along = [&](std::vector<double>& out, double coef) {
        for (std::size_t j = 0; j < n; ++j) {
          out[j] = centroid[j] + coef * (s.x[worst][j] - centroid[j]);
        }
        return eval(out);
      };

      const double fr = along(trial, -1.0);
      if (fr < s.f[best]) {
        const double fe = along(trial2, -2.0);
        if (fe < fr) {
          s.x[worst] = trial2;
          s.f[worst] = fe;
        } else {
          s.x[worst] = trial;
          s.f[worst] = fr;
        }
        continue;
      }
      if (fr < s.f[second]) {
        s.x[worst] = trial;
        s.f[worst] = fr;
        continue;
      }
      if (fr < s.f[worst]) {
        const double fc = along(trial2, -0.5);
        if (fc <= fr) {
          s.x[worst] = trial2;
          s.f[worst] = fc;
          continue;
        }
      } else {
        const double fc = along(trial2, 0.5);
        if (fc < s.f[worst]) {
          s.x[worst] = trial2;
          s.f[worst] = fc;
          continue;
        }
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        for (std::size_t j = 0; j < n; ++j) {
          s.x[i][j] = s.x[best][j] + 0.5 * (s.x[i][j] - s.x[best][j]);
        }
        s.f[i] = eval(s.x[i]);
      }
    }
  }

  Simplex build(const std::vector<double>& centre, const std::vector<double>& steps,
                const std::vector<double>& signs) {
    const std::size_t n = centre.size();
    Simplex s;
    s.x.assign(n + 1, centre);
    s.f.assign(n + 1, 0.0);
    s.f[0] = eval(s.x[0]);
    for (std::size_t i = 0; i < n; ++i) {
      auto& v = s.x[i + 1];
      v[i] += signs[i] * steps[i];
      bounds_.project(v);
      if (v[i] == centre[i]) v[i] = centre[i] - signs[i] * steps[i];  // pinned on a bound
      s.f[i + 1] = eval(v);
    }
    return s;
  }

  int evaluations() const { return evaluations_; }

 private:
  const Objective& objective_;
  const Box& bounds_;
  const MinimizeOptions& options_;
  int evaluations_ = 0;
};

}  // namespace

MinimizeResult minimize(const Objective& objective, std::vector<double> init, const Box& bounds,
                        const MinimizeOptions& options) {
  const std::size_t n = init.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "minimize: empty starting point");
  if (options.restarts < 0) throw Error(ErrorCode::InvalidArgument, "minimize: negative restarts");
  bounds.project(init);
  {
    const double f0 = objective(std::span<const double>(init));
    if (!std::isfinite(f0)) {
      throw Error(ErrorCode::NonFinite, "minimize: objective is not finite at the starting point");
    }
  }

  std::vector<double> steps(n);
  for (std::size_t i = 0; i < n; ++i) {
    steps[i] = (i < options.initial_step.size() && options.initial_step[i] > 0)
                   ? options.initial_step[i]
                   : 0.1 * std::max(1.0, std::fabs(init[i]));
  }

  NelderMead nm(objective, bounds, options);
  Simplex s = nm.build(init, steps, std::vector<double>(n, 1.0));
  bool converged = nm.run(s);

  auto best_of = [](const Simplex& sx) {
    return static_cast<std::size_t>(std::min_element(sx.f.begin(), sx.f.end()) - sx.f.begin());
  };
  std::size_t b = best_of(s);
  MinimizeResult result;
  result.argmin = s.x[b];
  result.value = s.f[b];

  Rng rng(options.seed);
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<double> scaled(n);
    std::vector<double> signs(n);
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = steps[i] * (0.5 + rng.uniform());
      signs[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    Simplex again = nm.build(result.argmin, scaled, signs);
    const bool ok = nm.run(again);
    const std::size_t bb = best_of(again);
    ++result.restarts_used;
    if (again.f[bb] <= result.value) {
      result.argmin = again.x[bb];
      result.value = again.f[bb];
    }
    converged = converged && ok;
  }
  result.evaluations = nm.evaluations();
  result.converged = converged;
  return result;
}

}  // namespace skewsing

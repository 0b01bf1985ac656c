#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace heatcast {

struct NelderMeadOptions {
  int max_evals = 20000;
  double f_tol = 1e-10;      // stop when simplex f-spread falls below this
  double x_tol = 1e-9;       // ... or the vertex spread does
  int restarts = 2;          // re-seeded simplexes around the best point
  double initial_step = 0.3;
};

struct OptimResult {
  std::vector<double> x;
  double fx = 0.0;
  int evals = 0;
  bool converged = false;  // tolerance reached inside the budget
  bool improved = false;   // fx strictly better than the initial point
};

// Derivative-free Nelder-Mead simplex with restarts. The returned point is
// never worse than the initial guess (monotone-improvement contract); the
// converged flag reports whether a tolerance was met before the budget ran
// out.
inline OptimResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, NelderMeadOptions opt = {}) {
  const std::size_t n = x0.size();
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : 1e300;
  };

  std::vector<double> best_x = x0;
  double best_f = eval(x0);
  const double f_init = best_f;
  bool converged = false;

  double step = opt.initial_step;
  for (int round = 0; round <= opt.restarts; ++round) {
    // Simplex seeded around the incumbent.
    std::vector<std::vector<double>> pts(n + 1, best_x);
    std::vector<double> fv(n + 1);
    fv[0] = best_f;
    for (std::size_t i = 0; i < n; ++i) {
      double h = step * std::max(1.0, std::fabs(best_x[i]));
      pts[i + 1][i] += h;
      fv[i + 1] = eval(pts[i + 1]);
    }

    while (evals < opt.max_evals) {
      // Order vertices: lo best, hi worst.
      std::vector<std::size_t> ord(n + 1);
      for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
      std::sort(ord.begin(), ord.end(),
                [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t lo = ord[0], hi = ord[n], nh = ord[n - 1];

      double xspread = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        xspread = std::max(xspread,
                           std::fabs(pts[hi][i] - pts[lo][i]));
      }
      if (std::fabs(fv[hi] - fv[lo]) <
              opt.f_tol * (1.0 + std::fabs(fv[lo])) ||
          xspread < opt.x_tol) {
        converged = true;
        break;
      }

      std::vector<double> centroid(n, 0.0);
      for (std::size_t k = 0; k <= n; ++k) {
        if (k == hi) continue;
        for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        centroid[i] /= static_cast<double>(n);
      }

      auto along = [&](double coef) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = centroid[i] + coef * (pts[hi][i] - centroid[i]);
        }
        return x;
      };

      const std::vector<double> xr = along(-1.0);  // reflection
      const double fr = eval(xr);
      if (fr < fv[lo]) {
        const std::vector<double> xe = along(-2.0);  // expansion
        const double fe = eval(xe);
        if (fe < fr) {
          pts[hi] = xe;
          fv[hi] = fe;
        } else {
          pts[hi] = xr;
          fv[hi] = fr;
        }
      } else if (fr < fv[nh]) {
        pts[hi] = xr;
        fv[hi] = fr;
      } else {
        const std::vector<double> xc = along(fr < fv[hi] ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[hi])) {
          pts[hi] = xc;
          fv[hi] = fc;
        } else {
          // Shrink toward the best vertex.
          for (std::size_t k = 0; k <= n; ++k) {
            if (k == lo) continue;
            for (std::size_t i = 0; i < n; ++i) {
              pts[k][i] = pts[lo][i] + 0.5 * (pts[k][i] - pts[lo][i]);
            }
            fv[k] = eval(pts[k]);
          }
        }
      }
    }

    for (std::size_t k = 0; k <= n; ++k) {
      if (fv[k] < best_f) {
        best_f = fv[k];
        best_x = pts[k];
      }
    }
    if (evals >= opt.max_evals) break;
    step *= 0.25;  // tighter simplex for the next restart
  }

  OptimResult r;
  r.x = std::move(best_x);
  r.fx = best_f;
  r.evals = evals;
  r.converged = converged;
  r.improved = best_f < f_init;
  return r;
}

}  // namespace heatcast

#pragma once

// Limited-memory BFGS minimizer with a strong-Wolfe line search and a hard
// budget on objective/gradient evaluations.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace astcrf {

struct LbfgsOptions {
  int history = 10;
  /// Objective/gradient evaluations, the initial one included.
  int max_evaluations = 200;
  double grad_tol = 1e-6;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 25;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> gradient;
  int evaluations = 0;
  int iterations = 0;
  std::string stop_reason;
};

/// Writes the gradient at x into `grad` and returns the objective.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;
/// (iteration, value, gradient infinity-norm, evaluations so far)
using IterationCallback = std::function<void(int, double, double, int)>;

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

inline LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& opt,
                                  const IterationCallback& on_iteration = {}) {
  using detail::dot;
  LbfgsResult r;
  r.x = std::move(x0);
  const std::size_t n = r.x.size();
  r.gradient.assign(n, 0.0);
  if (opt.max_evaluations <= 0) {
    r.stop_reason = "evaluation budget";
    return r;
  }

  auto evaluate = [&](const std::vector<double>& x, std::vector<double>& g) {
    ++r.evaluations;
    const double v = f(x, g);
    if (!std::isfinite(v)) throw std::runtime_error("objective is not finite at evaluation " +
                                                    std::to_string(r.evaluations));
    return v;
  };

  r.value = evaluate(r.x, r.gradient);
  if (on_iteration) on_iteration(0, r.value, detail::inf_norm(r.gradient), r.evaluations);

  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  std::vector<double> d(n), xt(n), gt(n);

  while (true) {
    if (detail::inf_norm(r.gradient) < opt.grad_tol) {
      r.stop_reason = "gradient tolerance";
      break;
    }
    if (r.evaluations >= opt.max_evaluations) {
      r.stop_reason = "evaluation budget";
      break;
    }

    // two-loop recursion
    d = r.gradient;
    std::vector<double> alpha(S.size());
    for (std::size_t i = S.size(); i-- > 0;) {
      alpha[i] = rho[i] * dot(S[i], d);
      for (std::size_t k = 0; k < n; ++k) d[k] -= alpha[i] * Y[i][k];
    }
    if (!S.empty()) {
      const double gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
      for (double& v : d) v *= gamma;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * dot(Y[i], d);
      for (std::size_t k = 0; k < n; ++k) d[k] += (alpha[i] - beta) * S[i][k];
    }
    for (double& v : d) v = -v;
    double slope = dot(r.gradient, d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      for (std::size_t k = 0; k < n; ++k) d[k] = -r.gradient[k];
      slope = dot(r.gradient, d);
    }
    double step = S.empty() ? 1.0 / std::max(1.0, std::sqrt(dot(r.gradient, r.gradient))) : 1.0;

    // strong-Wolfe line search (bracketing, then zoom by safeguarded
    // quadratic interpolation)
    const double f0 = r.value;
    bool accepted = false;
    double best_step = 0.0, best_f = f0;
    std::vector<double> best_g;
    auto trial = [&](double a, double& fa, double& da) {
      for (std::size_t k = 0; k < n; ++k) xt[k] = r.x[k] + a * d[k];
      fa = evaluate(xt, gt);
      da = dot(gt, d);
      if (fa <= f0 + opt.c1 * a * slope && fa < best_f) {
        best_f = fa;
        best_step = a;
        best_g = gt;
      }
      return std::abs(da) <= -opt.c2 * slope && fa <= f0 + opt.c1 * a * slope;
    };

    double lo = 0.0, f_lo = f0, d_lo = slope, hi = 0.0, f_hi = 0.0;
    bool bracketed = false;
    for (int ls = 0; ls < opt.max_line_search && r.evaluations < opt.max_evaluations; ++ls) {
      double a = step;
      if (bracketed) {
        const double width = hi - lo;
        const double denom = 2.0 * (f_hi - f_lo - d_lo * width);
        a = denom > 0.0 ? lo - d_lo * width * width / denom : lo + 0.5 * width;
        const double lo_edge = lo + 0.1 * width, hi_edge = hi - 0.1 * width;
        a = std::clamp(a, std::min(lo_edge, hi_edge), std::max(lo_edge, hi_edge));
      }
      double fa = 0.0, da = 0.0;
      if (trial(a, fa, da)) {
        accepted = true;
        best_step = a;
        best_f = fa;
        best_g = gt;
        break;
      }
      if (fa > f0 + opt.c1 * a * slope || fa >= f_lo) {
        hi = a;
        f_hi = fa;
        bracketed = true;
      } else if (!bracketed && da < 0.0) {
        lo = a;
        f_lo = fa;
        d_lo = da;
        step = 2.0 * a;
      } else {
        if (bracketed ? da * (hi - lo) >= 0.0 : true) {
          hi = lo;
          f_hi = f_lo;
        }
        lo = a;
        f_lo = fa;
        d_lo = da;
        bracketed = true;
      }
    }

    if (!accepted && best_step == 0.0) {
      r.stop_reason = r.evaluations >= opt.max_evaluations ? "evaluation budget" : "line search failed";
      break;
    }
    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = best_step * d[k];
      y[k] = best_g[k] - r.gradient[k];
      r.x[k] += s[k];
    }
    r.value = best_f;
    r.gradient = best_g;
    ++r.iterations;
    const double sy = dot(s, y);
    if (sy > 1e-12) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.history) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    if (on_iteration) on_iteration(r.iterations, r.value, detail::inf_norm(r.gradient), r.evaluations);
  }
  return r;
}

}  // namespace astcrf

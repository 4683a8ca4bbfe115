#include "gelfand/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gelfand/error.hpp"

namespace gelfand {

namespace {

struct Tangent {
  std::vector<double> x;
  double lambda = 0.0;
};

struct Corrected {
  std::vector<double> x;
  double lambda = 0.0;
  int iters = 0;
  double residual = 0.0;
};

double sup_abs(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

double tangent_dot(const DiscreteProblem& p, const Tangent& a, const Tangent& b) {
  return p.dot(a.x, b.x) + a.lambda * b.lambda;
}

// Unit tangent from J z = -R_lambda, oriented along `prev`.
Tangent tangent_at(const DiscreteProblem& p, const std::vector<double>& x, double lambda,
                   const Tangent& prev) {
  std::vector<double> z(x.size());
  p.dlambda(x, lambda, z);
  for (double& v : z) v = -v;
  BandedLU(p.jacobian(x, lambda)).solve_in_place(z);
  const double scale = 1.0 / std::sqrt(p.dot(z, z) + 1.0);
  Tangent t{std::move(z), scale};
  for (double& v : t.x) v *= scale;
  if (tangent_dot(p, t, prev) < 0.0) {
    for (double& v : t.x) v = -v;
    t.lambda = -t.lambda;
  }
  return t;
}

// Newton on R = 0 restricted to the hyperplane through the predictor orthogonal to t.
Corrected correct(const DiscreteProblem& p, std::vector<double> x, double lambda, const Tangent& t,
                  const NewtonOptions& opt, int max_iters) {
  const std::size_t n = x.size();
  const std::vector<double> xp = x;
  const double lp = lambda;
  std::vector<double> r(n), a(n), b(n), trial(n);
  bool last_small = false;
  for (int it = 0; it <= max_iters; ++it) {
    p.residual(x, lambda, r);
    const double res = p.scaled_residual(r, x);
    if (res <= opt.tol && last_small) return {std::move(x), lambda, it, res};
    if (it == max_iters) break;

    BandedLU lu(p.jacobian(x, lambda));
    for (std::size_t i = 0; i < n; ++i) a[i] = -r[i];
    lu.solve_in_place(a);
    p.dlambda(x, lambda, b);
    for (double& v : b) v = -v;
    lu.solve_in_place(b);
    std::vector<double> dx(n);
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] - xp[i];
    const double g = p.dot(t.x, dx) + t.lambda * (lambda - lp);
    const double denom = p.dot(t.x, b) + t.lambda;
    if (!(std::abs(denom) > 0.0)) throw Error(ErrorKind::NonConvergence, "singular bordered system");
    const double dl = (-g - p.dot(t.x, a)) / denom;
    for (std::size_t i = 0; i < n; ++i) a[i] += dl * b[i];

    double alpha = 1.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + alpha * a[i];
      if (p.in_domain(trial)) break;
      alpha *= 0.5;
      if (alpha < 0x1p-10) throw Error(ErrorKind::DomainExit, "corrector leaves the domain");
    }
    const double step = std::max(sup_abs(a), std::abs(dl));
    x.swap(trial);
    lambda += alpha * dl;
    if (!std::isfinite(step) || sup_abs(x) > opt.cap) {
      throw Error(ErrorKind::NonConvergence, "corrector diverged");
    }
    last_small = alpha == 1.0 && step <= opt.step_tol * (1.0 + sup_abs(x) + std::abs(lambda));
  }
  throw Error(ErrorKind::NonConvergence, "corrector did not converge");
}

Corrected predict_correct(const DiscreteProblem& p, const ContinuationPoint& from, const Tangent& t,
                          double ds, const NewtonOptions& opt) {
  std::vector<double> x(from.x.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = from.x[i] + ds * t.x[i];
  const double lambda = from.lambda + ds * t.lambda;
  if (!p.in_domain(x)) throw Error(ErrorKind::DomainExit, "predictor leaves the domain");
  return correct(p, std::move(x), lambda, t, opt, 12);
}

}  // namespace

ContinuationResult continue_from(const DiscreteProblem& p, std::vector<double> x0, double lambda0,
                                 const ContinuationOptions& opt) {
  ContinuationResult out;
  {
    std::vector<double> r(x0.size());
    p.residual(x0, lambda0, r);
    ContinuationPoint start{std::move(x0), lambda0, 0.0, 0.0, 0, p.scaled_residual(r, x0)};
    out.points.push_back(std::move(start));
  }
  Tangent t = tangent_at(p, out.points[0].x, lambda0, Tangent{std::vector<double>(p.size(), 0.0), 1.0});
  out.points[0].tangent_lambda = t.lambda;

  double ds = opt.ds > 0.0 ? opt.ds : (lambda0 > 0.0 ? lambda0 / 4.0 : 0.05);
  ds = std::min(ds, opt.ds_max);
  int steps = 0;
  while (steps < opt.n_steps) {
    const ContinuationPoint here = out.points.back();
    Corrected c;
    Tangent tn;
    try {
      c = predict_correct(p, here, t, ds, opt.newton);
      tn = tangent_at(p, c.x, c.lambda, t);
      if (tangent_dot(p, tn, t) < opt.min_cos && ds > 4.0 * opt.ds_min) {
        throw Error(ErrorKind::StepFailure, "tangent turned too sharply");
      }
    } catch (const Error& e) {
      ds *= 0.5;
      if (ds < opt.ds_min) {
        if (steps == 0) throw Error(ErrorKind::StepFailure, "step size underflow before the first step");
        out.diagnostics.push_back("step size underflow at lambda = " + std::to_string(here.lambda) +
                                  " (" + e.what() + ")");
        break;
      }
      continue;
    }

    if (!out.fold && t.lambda > 0.0 && tn.lambda <= 0.0) {
      // Bisection in arclength on the sign of d lambda / ds.
      double lo = 0.0;
      double hi = ds;
      std::optional<Corrected> best;
      std::optional<Tangent> best_t;
      double best_s = 0.0;
      for (int k = 0; k < opt.fold_bisections && hi - lo > 1e-9 * std::max(1.0, ds); ++k) {
        const double mid = 0.5 * (lo + hi);
        try {
          Corrected m = predict_correct(p, here, t, mid, opt.newton);
          Tangent tm = tangent_at(p, m.x, m.lambda, t);
          if (tm.lambda > 0.0) {
            lo = mid;
          } else {
            hi = mid;
          }
          if (!best || m.lambda > best->lambda) {
            best = std::move(m);
            best_t = std::move(tm);
            best_s = mid;
          }
        } catch (const Error&) {
          out.diagnostics.push_back("fold refinement stopped early");
          break;
        }
      }
      if (best && best->lambda > here.lambda && best->lambda > c.lambda) {
        const double s = here.arclength + best_s;
        out.points.push_back(
            {std::move(best->x), best->lambda, s, best_t->lambda, best->iters, best->residual});
        out.fold = out.points.size() - 1;
      } else {
        // Refinement did not improve on the bracket ends: keep the larger one.
        const bool here_wins = here.lambda >= c.lambda;
        if (here_wins) {
          out.fold = out.points.size() - 1;
        } else {
          out.fold = out.points.size();  // the point appended just below
        }
        out.diagnostics.push_back("fold located at a bracket end");
      }
    }

    if (c.lambda < 0.0) {
      out.diagnostics.push_back("branch reached lambda < 0 after lambda = " + std::to_string(here.lambda));
      break;
    }
    const double s_new = here.arclength + ds;
    const double sup = sup_abs(c.x);
    out.points.push_back({std::move(c.x), c.lambda, s_new, tn.lambda, c.iters, c.residual});
    t = std::move(tn);
    ++steps;

    if (opt.max_sup > 0.0 && sup > opt.max_sup) break;
    if (c.iters <= 3) ds = std::min(1.5 * ds, opt.ds_max);
    if (c.iters >= 6) ds *= 0.7;
  }
  return out;
}

}  // namespace gelfand

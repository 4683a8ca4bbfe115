#include "gelfand/newton.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gelfand/error.hpp"

namespace gelfand {

namespace {

double sup_abs(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

double distance_sq(const DiscreteProblem& p, std::span<const double> x, std::span<const double> r) {
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - r[i];
  return p.dot(d, d);
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

double Deflation::factor(const DiscreteProblem& p, std::span<const double> x) const {
  double m = 1.0;
  for (const auto& r : roots) m *= 1.0 / distance_sq(p, x, r) + 1.0;
  return m;
}

double Deflation::beta(const DiscreteProblem& p, std::span<const double> x,
                       std::span<const double> delta) const {
  double b = 0.0;
  std::vector<double> d(x.size());
  for (const auto& r : roots) {
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - r[i];
    const double d2 = p.dot(d, d);
    const double grad = -2.0 * p.dot(d, delta) / (d2 * d2);
    b += grad / (1.0 / d2 + 1.0);
  }
  return b;
}

NewtonResult newton(const DiscreteProblem& p, double lambda, std::vector<double> guess,
                    const NewtonOptions& opt, const Deflation* deflation) {
  const std::size_t n = p.size();
  if (guess.size() != n) throw Error(ErrorKind::RejectedInput, "Newton guess has the wrong size");
  if (!p.in_domain(guess)) throw Error(ErrorKind::RejectedInput, "Newton guess outside the domain");

  NewtonResult out;
  std::vector<double>& x = out.x;
  x = std::move(guess);
  std::vector<double> r(n), trial(n), rtrial(n), delta(n);

  auto merit = [&](std::span<const double> at, std::span<const double> res) {
    const double m = deflation ? deflation->factor(p, at) : 1.0;
    return m * p.norm(res);
  };

  bool last_step_small = false;
  p.residual(x, lambda, r);
  for (int it = 0;; ++it) {
    out.residual = p.scaled_residual(r, x);
    if (out.residual <= opt.tol && last_step_small) {
      out.iterations = it;
      return out;
    }
    if (it == opt.max_iters) break;

    BandedLU lu(p.jacobian(x, lambda));
    for (std::size_t i = 0; i < n; ++i) delta[i] = -r[i];
    lu.solve_in_place(delta);
    if (deflation && !deflation->roots.empty()) {
      const double b = deflation->beta(p, x, delta);
      if (!(std::abs(1.0 - b) > 1e-14)) {
        throw Error(ErrorKind::NonConvergence, "deflated step is singular");
      }
      for (double& d : delta) d /= 1.0 - b;
    }
    const double step = sup_abs(delta);
    out.step_norms.push_back(step);
    const double xnorm = sup_abs(x);
    if (!std::isfinite(step)) throw Error(ErrorKind::NonConvergence, "Newton step is not finite");

    // A step at rounding level cannot be judged by Armijo; take it as is.
    if (step <= 1e-13 * (1.0 + xnorm)) {
      std::copy(x.begin(), x.end(), trial.begin());
      for (std::size_t i = 0; i < n; ++i) x[i] += delta[i];
      if (!p.in_domain(x)) {
        x = trial;
        throw Error(ErrorKind::DomainExit, "rounding-level step leaves the domain");
      }
      p.residual(x, lambda, r);
      last_step_small = true;
      continue;
    }

    const double m0 = merit(x, r);
    double alpha = 1.0;
    bool domain_blocked = false;
    bool accepted = false;
    while (alpha >= opt.min_damping) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + alpha * delta[i];
      if (!p.in_domain(trial)) {
        domain_blocked = true;
        alpha *= 0.5;
        continue;
      }
      p.residual(trial, lambda, rtrial);
      if (all_finite(rtrial)) {
        const double m1 = merit(trial, rtrial);
        if (m1 <= (1.0 - 1e-4 * alpha) * m0 || out.residual <= opt.tol) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (domain_blocked) {
        throw Error(ErrorKind::DomainExit, "every damped Newton step leaves the domain");
      }
      throw Error(ErrorKind::NonConvergence, "line search failed at iteration " + std::to_string(it));
    }
    x.swap(trial);
    r.swap(rtrial);
    last_step_small = alpha == 1.0 && step <= opt.step_tol * (1.0 + sup_abs(x));
    if (sup_abs(x) > opt.cap) {
      throw Error(ErrorKind::NonConvergence, "Newton iterate exceeded the blow-up cap");
    }
  }
  throw Error(ErrorKind::NonConvergence,
              "Newton did not converge in " + std::to_string(opt.max_iters) + " iterations (residual " +
                  std::to_string(out.residual) + ")");
}

}  // namespace gelfand

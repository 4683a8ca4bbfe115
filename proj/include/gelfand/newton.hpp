#pragma once

#include <span>
#include <vector>

#include "gelfand/problem.hpp"

namespace gelfand {

struct NewtonOptions {
  int max_iters = 60;
  double tol = 1e-10;            // on DiscreteProblem::scaled_residual
  double step_tol = 1e-8;        // relative size of the last full step
  double cap = 1e6;              // sup-norm blow-up cap
  double min_damping = 0x1p-20;  // Armijo floor
};

struct NewtonResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;            // scaled, at the returned x
  std::vector<double> step_norms;   // ||delta||_inf per iteration (tail shows the rate)
};

/// Repels Newton from known roots: the residual is multiplied by
/// prod_j (1 / d_j^2 + 1), d_j the problem-norm distance to root j.
struct Deflation {
  std::vector<std::vector<double>> roots;

  double factor(const DiscreteProblem& p, std::span<const double> x) const;
  /// beta with deflated step = delta / (1 - beta).
  double beta(const DiscreteProblem& p, std::span<const double> x, std::span<const double> delta) const;
};

/// Damped Newton on R(x, lambda) = 0 with Armijo backtracking on the merit
/// ||R|| (times the deflation factor when one is given).
///
/// Throws NonConvergence when the iteration budget runs out, the line search
/// hits its floor, or the iterate exceeds the cap; DomainExit when no damped
/// step stays inside the nonlinearity's domain.
NewtonResult newton(const DiscreteProblem& p, double lambda, std::vector<double> guess,
                    const NewtonOptions& opt = {}, const Deflation* deflation = nullptr);

}  // namespace gelfand

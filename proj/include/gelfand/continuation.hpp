#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gelfand/newton.hpp"
#include "gelfand/problem.hpp"

namespace gelfand {

struct ContinuationOptions {
  double ds = 0.0;              // initial arclength step; <= 0 means lambda_init / 4
  double ds_min = 1e-10;
  double ds_max = 8.0;
  int n_steps = 400;
  double max_sup = 0.0;         // stop once the sup norm passes this; <= 0: no limit here,
                                // the grid resolution limit in the branch and ray drivers
  double min_cos = 0.98;        // smallest accepted cosine between successive tangents
  int fold_bisections = 60;
  NewtonOptions newton{};
};

struct ContinuationPoint {
  std::vector<double> x;
  double lambda = 0.0;
  double arclength = 0.0;
  double tangent_lambda = 0.0;  // d lambda / ds
  int newton_iters = 0;
  double residual = 0.0;
};

struct ContinuationResult {
  std::vector<ContinuationPoint> points;
  std::optional<std::size_t> fold;  // index of the refined first lambda maximum
  std::vector<std::string> diagnostics;
};

/// Pseudo-arclength continuation of R(x, lambda) = 0 from a converged start.
///
/// The arclength norm is ||(x, lambda)||^2 = <x, x> + lambda^2. The corrector
/// solves the bordered system by block elimination with two banded solves. The
/// first sign change of d lambda / ds is refined by bisection in arclength and
/// the refined point is inserted into the output; the run then continues onto
/// the upper branch. Stops after n_steps, when lambda turns negative, or when
/// the sup norm passes max_sup. A step-size underflow ends the run with a
/// diagnostic (StepFailure if not even one step was taken).
ContinuationResult continue_from(const DiscreteProblem& p, std::vector<double> x0, double lambda0,
                                 const ContinuationOptions& opt);

}  // namespace gelfand

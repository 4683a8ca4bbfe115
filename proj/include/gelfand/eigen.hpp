#pragma once

#include <span>
#include <vector>

#include "gelfand/banded.hpp"

namespace gelfand {

struct EigenResult {
  double value = 0.0;
  std::vector<double> vector;  // unit length in the weighted norm
  int iterations = 0;
};

struct EigenOptions {
  int max_iters = 20000;
  double tol = 1e-12;  // relative change of the Rayleigh quotient
};

/// Smallest eigenvalue of a matrix that is self-adjoint in <a, b> = sum w_i a_i b_i.
///
/// Shifted inverse iteration: the shift is a Gershgorin lower bound of the
/// symmetrized matrix W^(1/2) A W^(-1/2), so A - sI is positive semidefinite
/// and the iteration can only settle on the bottom of the spectrum. Throws
/// Eigensolver on stagnation.
EigenResult smallest_eigenvalue(const BandedMatrix& a, std::span<const double> weights,
                                const EigenOptions& opt = {});

}  // namespace gelfand

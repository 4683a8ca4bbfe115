#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gelfand/continuation.hpp"
#include "gelfand/newton.hpp"
#include "gelfand/problem.hpp"
#include "gelfand/radial.hpp"

namespace gelfand {

/// Tolerance on eta1 when judging semi-stability.
inline constexpr double kTolEig = 1e-8;

struct BranchPoint {
  double lambda = 0.0;
  RadialField u;
  double eta1 = 0.0;
  double sup_norm = 0.0;  // max u
  double arclength = 0.0;
  bool converged = false;
  int newton_iters = 0;
  double residual = 0.0;  // scaled, see DiscreteProblem::scaled_residual
};

struct DivergenceReport {
  double lambda = 0.0;
  int iterations = 0;
  double last_sup = 0.0;
  std::string reason;
};

using MinimalOutcome = std::variant<BranchPoint, DivergenceReport>;

struct FoldEstimate {
  double lambda_star = 0.0;
  std::size_t index = 0;
};

struct Branch {
  ProblemSpec spec;
  std::vector<BranchPoint> points;
  std::optional<FoldEstimate> fold;
  std::vector<std::string> diagnostics;
};

struct MonotoneOptions {
  int max_iters = 200000;
  double tol = 1e-12;       // sup-norm increment, relative to 1 + sup u
  double cap = 0.0;         // <= 0: 1e6 for class R, 1 - 1e-9 for class S
  bool polish = true;       // finish with undamped Newton when it agrees
  bool eigenvalue = true;   // compute eta1 on success
};

/// Blow-up cap used by the iterations: 1e6 (class R) or 1 - 1e-9 (class S).
double default_cap(const Nonlinearity& nl);

/// Monotone iteration u_{k+1} = L^-1 (lambda f(u_k)) from zero.
///
/// Throws InternalConsistency if an iterate decreases somewhere (which the
/// comparison structure forbids). The clamped fourth-order problem instead
/// falls back to Newton homotopy in lambda from zero when that happens.
MinimalOutcome minimal_solution(const ProblemSpec& spec, double lambda, const MonotoneOptions& opt = {});

/// sup-norm of L^-1 from the absolute row sums of the full discrete Green matrix.
double inverse_norm_inf(const OperatorMatrix& op);

/// Picard iteration in the sup norm for the clamped problem, valid while
/// lambda ||L^-1|| f'(sqrt lambda) < 1 and sqrt(lambda) ||L^-1|| f(sqrt lambda) <= 1.
/// Throws NoContraction otherwise. The result satisfies sup |u| <= sqrt(lambda).
BranchPoint small_solution(const ProblemSpec& spec, double lambda);

BranchPoint newton_solve(const ProblemSpec& spec, double lambda, const RadialField& guess,
                         const NewtonOptions& opt = {});

/// Smallest eigenvalue of L - lambda f'(u) with the problem's boundary conditions.
double stability_eigenvalue(const ProblemSpec& spec, double lambda, const RadialField& u);
/// First eigenvalue of the bare operator L.
double first_eigenvalue(const OperatorMatrix& op);

/// Minimal solution at lambda_init followed by pseudo-arclength continuation.
Branch continue_branch(const ProblemSpec& spec, double lambda_init, double ds, int n_steps,
                       ContinuationOptions opt = {});

struct ExtremalSolution {
  BranchPoint point;
  /// max over nodes of |max over pre-fold points of u - u at the fold|.
  double limit_gap = 0.0;
  /// Worst decrease of u between consecutive pre-fold points (<= 0 when monotone).
  double worst_decrease = 0.0;
};

/// The fold point of a branch with the monotone-limit checks. Throws Unavailable without a fold.
ExtremalSolution extremal_solution(const Branch& branch);

/// Largest lambda in [lo, hi] for which monotone iteration converges, by bisection.
double lambda_star_bisection(const ProblemSpec& spec, double lo, double hi, double rel_tol = 1e-6);

struct LambdaStarEstimate {
  double from_fold = 0.0;
  double from_bisection = 0.0;
  double discrepancy = 0.0;  // relative
  std::vector<std::string> diagnostics;
};

/// Cross-checks the continuation fold against the monotone-iteration bisection;
/// a relative discrepancy above 2% is reported as a diagnostic.
LambdaStarEstimate lambda_star_crosscheck(const ProblemSpec& spec, const Branch& branch);

/// Polynomial in r^2: sum_k c_k r^(2k).
class RadialPolynomial {
public:
  RadialPolynomial() = default;
  explicit RadialPolynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  const std::vector<double>& coeffs() const noexcept { return c_; }
  double operator()(double r) const;
  double derivative(double r) const;
  RadialPolynomial laplacian(int dim) const;
  RadialPolynomial operator*(const RadialPolynomial& o) const;
  RadialPolynomial operator+(const RadialPolynomial& o) const;
  RadialPolynomial scaled(double a) const;
  RadialField sample(const RadialGrid& g) const;

private:
  std::vector<double> c_;
};

struct TestFunction {
  std::string name;
  RadialPolynomial phi;
};

/// Five radial polynomials with exact boundary compliance for `bc`:
/// phi = 0 (second order), phi = Delta phi = 0 (Navier), phi = phi' = 0 (clamped).
std::vector<TestFunction> test_bank(int dim, BoundaryCondition bc);

/// Throws RejectedInput if phi misses its boundary conditions by more than 1e-12.
void check_boundary(const TestFunction& t, int dim, BoundaryCondition bc);

/// |int u L phi - lambda int f(u) phi| for each test function.
std::vector<double> weak_residual(const ProblemSpec& spec, const BranchPoint& point,
                                  const std::vector<TestFunction>& bank);

}  // namespace gelfand

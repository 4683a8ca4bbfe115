#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gelfand/branch.hpp"
#include "gelfand/continuation.hpp"
#include "gelfand/problem.hpp"

namespace gelfand {

/// -Delta u = lambda f(v), -Delta v = gamma g(u) on the unit ball, u = v = 0 on the boundary.
struct SystemSpec {
  Nonlinearity f = Nonlinearity::exponential();
  Nonlinearity g = Nonlinearity::exponential();
  RadialGrid grid;

  int dim() const noexcept { return grid.dim(); }
};

SystemSpec make_system(int dim, const Nonlinearity& f, const Nonlinearity& g, std::size_t interior);

/// The system along lambda = a t, gamma = b t, unknowns interleaved as (u_i, v_i).
/// A ray gamma = sigma lambda is (a, b) = (1, sigma); a fixed pair is t = 1.
class SystemProblem final : public DiscreteProblem {
public:
  SystemProblem(SystemSpec spec, double a, double b);

  const SystemSpec& spec() const noexcept { return spec_; }

  std::size_t size() const override { return 2 * op_.size(); }
  void residual(std::span<const double> x, double t, std::span<double> out) const override;
  BandedMatrix jacobian(std::span<const double> x, double t) const override;
  void dlambda(std::span<const double> x, double t, std::span<double> out) const override;
  double dot(std::span<const double> p, std::span<const double> q) const override;
  bool in_domain(std::span<const double> x) const override;
  double residual_scale() const override;

  std::vector<double> interleave(const RadialField& u, const RadialField& v) const;
  std::pair<RadialField, RadialField> split(std::span<const double> x) const;

private:
  SystemSpec spec_;
  OperatorMatrix op_;
  double a_;
  double b_;
};

struct SystemPoint {
  double lambda = 0.0;
  double gamma = 0.0;
  double sigma = 0.0;  // gamma / lambda (0 when lambda = 0)
  RadialField u;
  RadialField v;
  bool converged = false;
  int newton_iters = 0;
  double residual = 0.0;
  double arclength = 0.0;
};

using SystemOutcome = std::variant<SystemPoint, DivergenceReport>;

/// Coupled monotone iteration from (0, 0):
/// u_{k+1} = L^-1 (lambda f(v_k)), v_{k+1} = L^-1 (gamma g(u_k)).
SystemOutcome system_minimal(const SystemSpec& spec, double lambda, double gamma,
                             const MonotoneOptions& opt = {});

/// Newton for a fixed (lambda, gamma) from a guess pair.
SystemPoint system_newton(const SystemSpec& spec, double lambda, double gamma, const RadialField& u,
                          const RadialField& v, const NewtonOptions& opt = {});

struct Ray {
  double sigma = 0.0;
  std::vector<SystemPoint> points;
  std::optional<std::size_t> fold;
  double lambda_star = 0.0;  // 0 when no fold was found
  std::vector<std::string> diagnostics;
};

/// Continuation along gamma = sigma lambda from the minimal pair at lambda_init.
Ray trace_ray(const SystemSpec& spec, double sigma, double lambda_init, double ds, int n_steps,
              ContinuationOptions opt = {});

struct UpsilonEntry {
  double sigma = 0.0;
  double lambda_star = 0.0;
  double gamma_star = 0.0;
  bool traced = false;
  std::string diagnostic;
};

struct UpsilonCurve {
  std::vector<UpsilonEntry> entries;
  /// Probes at (1 -/+ probe_offset) times each traced fold: below must converge, above diverge.
  std::size_t probes = 0;
  std::size_t inconsistent = 0;
  std::vector<std::string> diagnostics;
};

/// Traces one ray per sigma (concurrently) and runs the separation probes.
UpsilonCurve upsilon_curve(const SystemSpec& spec, const std::vector<double>& sigma_grid,
                           int n_steps = 400, double probe_offset = 0.02);

struct OrderingReport {
  // i) v <= u, ii) sigma u <= v, iii) sigma u_o <= v_o, iv) v_o <= u_o
  std::array<bool, 4> holds{};
  std::array<double, 4> max_violation{};
};

/// Checks the four pointwise inequalities with tolerance `tol` on the violation.
OrderingReport pointwise_orderings(const SystemSpec& spec, const SystemPoint& second,
                                   const SystemPoint& minimal, double tol = 1e-8);

struct DifferenceResidual {
  RadialField u;  // L u_o - lambda e^{v_min} (e^{v_o} - 1)
  RadialField v;  // L v_o - gamma e^{u_min} (e^{u_o} - 1)
};

DifferenceResidual difference_residual(double lambda, double gamma, const RadialField& u_min,
                                       const RadialField& v_min, const RadialField& u_o,
                                       const RadialField& v_o);
DifferenceResidual difference_residual(const SystemSpec& spec, const SystemPoint& second,
                                       const SystemPoint& minimal);

/// Weak form against the second-order bank: per test function, the larger of
/// |int (-Delta phi) u - lambda int phi f(v)| and |int (-Delta phi) v - gamma int phi g(u)|.
std::vector<double> system_weak_residual(const SystemSpec& spec, const SystemPoint& point,
                                         const std::vector<TestFunction>& bank);

/// Upper-branch points of a ray (after the fold) paired with the minimal pair at the same parameters.
struct SolutionPair {
  SystemPoint second;
  SystemPoint minimal;
};

/// Pairs stop at the first upper point whose sup exceeds `max_sup` (<= 0: resolved_sup(grid, 2)).
std::vector<SolutionPair> upper_branch_pairs(const SystemSpec& spec, const Ray& ray,
                                             std::size_t max_pairs = 0, double max_sup = 0.0);

struct OrderingThreshold {
  double lambda1 = 0.0;           // iv) holds on every upper-branch pair with lambda below this
  bool iv_fails_somewhere = false;
  std::size_t pairs = 0;
};

/// Bisects, between neighbouring upper-branch pairs, the lambda where iv) first fails.
OrderingThreshold ordering_threshold(const SystemSpec& spec, const Ray& ray, double tol = 1e-8);

}  // namespace gelfand

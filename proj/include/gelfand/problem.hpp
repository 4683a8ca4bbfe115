#pragma once

#include <span>
#include <string>
#include <vector>

#include "gelfand/banded.hpp"
#include "gelfand/nonlinearity.hpp"
#include "gelfand/radial.hpp"

namespace gelfand {

enum class Order { Second, FourthNavier, FourthDirichlet };

const char* to_string(Order o);
/// Accepts "q"/"second", "navier", "dirichlet".
Order parse_order(const std::string& s);
BoundaryCondition boundary_of(Order o);

struct ProblemSpec {
  Order order = Order::Second;
  Nonlinearity nl = Nonlinearity::exponential();
  RadialGrid grid;

  int dim() const noexcept { return grid.dim(); }
  BoundaryCondition bc() const noexcept { return boundary_of(order); }
};

/// Validates the combination and builds the grid.
ProblemSpec make_problem(Order order, int dim, const Nonlinearity& nl, std::size_t interior);

/// A square nonlinear system R(x, lambda) = 0 with a banded Jacobian, the
/// common ground for Newton, continuation and deflation.
class DiscreteProblem {
public:
  virtual ~DiscreteProblem() = default;

  virtual std::size_t size() const = 0;
  virtual void residual(std::span<const double> x, double lambda, std::span<double> out) const = 0;
  virtual BandedMatrix jacobian(std::span<const double> x, double lambda) const = 0;
  /// dR / dlambda.
  virtual void dlambda(std::span<const double> x, double lambda, std::span<double> out) const = 0;
  /// Inner product on the unknowns (r^(N-1) weighted, summed over components).
  virtual double dot(std::span<const double> a, std::span<const double> b) const = 0;
  virtual bool in_domain(std::span<const double> x) const = 0;
  /// Multiplier turning ||R||_inf into an O(1)-scaled quantity (h^order).
  virtual double residual_scale() const = 0;

  double norm(std::span<const double> a) const;
  /// ||R||_inf h^order / (1 + ||x||_inf).
  double scaled_residual(std::span<const double> r, std::span<const double> x) const;
};

/// L u - lambda f(u) on the unknowns 0..M of one of the scalar problems.
class ScalarProblem final : public DiscreteProblem {
public:
  explicit ScalarProblem(ProblemSpec spec);

  const ProblemSpec& spec() const noexcept { return spec_; }
  const OperatorMatrix& op() const noexcept { return op_; }

  std::size_t size() const override { return op_.size(); }
  void residual(std::span<const double> x, double lambda, std::span<double> out) const override;
  BandedMatrix jacobian(std::span<const double> x, double lambda) const override;
  void dlambda(std::span<const double> x, double lambda, std::span<double> out) const override;
  double dot(std::span<const double> a, std::span<const double> b) const override;
  bool in_domain(std::span<const double> x) const override;
  double residual_scale() const override;

private:
  ProblemSpec spec_;
  OperatorMatrix op_;
  double scale_;
};

}  // namespace gelfand

#include "gelfand/problem.hpp"

#include <algorithm>
#include <cmath>

#include "gelfand/error.hpp"

namespace gelfand {

const char* to_string(Order o) {
  switch (o) {
    case Order::Second: return "q";
    case Order::FourthNavier: return "navier";
    case Order::FourthDirichlet: return "dirichlet";
  }
  return "?";
}

Order parse_order(const std::string& s) {
  if (s == "q" || s == "second") return Order::Second;
  if (s == "navier") return Order::FourthNavier;
  if (s == "dirichlet") return Order::FourthDirichlet;
  throw Error(ErrorKind::RejectedInput, "unknown problem '" + s + "'");
}

BoundaryCondition boundary_of(Order o) {
  switch (o) {
    case Order::Second: return BoundaryCondition::Dirichlet2;
    case Order::FourthNavier: return BoundaryCondition::Navier;
    case Order::FourthDirichlet: return BoundaryCondition::Dirichlet4;
  }
  return BoundaryCondition::Dirichlet2;
}

ProblemSpec make_problem(Order order, int dim, const Nonlinearity& nl, std::size_t interior) {
  if (order != Order::Second && interior < 32) {
    throw Error(ErrorKind::RejectedInput, "fourth-order problems need at least 32 interior nodes");
  }
  return ProblemSpec{order, nl, RadialGrid(dim, interior)};
}

double DiscreteProblem::norm(std::span<const double> a) const { return std::sqrt(dot(a, a)); }

double DiscreteProblem::scaled_residual(std::span<const double> r, std::span<const double> x) const {
  double rmax = 0.0;
  double xmax = 0.0;
  for (double v : r) rmax = std::max(rmax, std::abs(v));
  for (double v : x) xmax = std::max(xmax, std::abs(v));
  return rmax * residual_scale() / (1.0 + xmax);
}

ScalarProblem::ScalarProblem(ProblemSpec spec)
    : spec_(std::move(spec)),
      op_(make_operator(spec_.grid, spec_.bc())),
      scale_(std::pow(spec_.grid.h(), op_.order())) {}

void ScalarProblem::residual(std::span<const double> x, double lambda, std::span<double> out) const {
  op_.apply(x, out);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] -= lambda * spec_.nl.f(x[i]);
}

BandedMatrix ScalarProblem::jacobian(std::span<const double> x, double lambda) const {
  BandedMatrix j = op_.matrix();
  for (std::size_t i = 0; i < x.size(); ++i) j.ref(i, i) -= lambda * spec_.nl.fprime(x[i]);
  return j;
}

void ScalarProblem::dlambda(std::span<const double> x, double, std::span<double> out) const {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = -spec_.nl.f(x[i]);
}

double ScalarProblem::dot(std::span<const double> a, std::span<const double> b) const {
  return weighted_dot(spec_.grid, a, b);
}

bool ScalarProblem::in_domain(std::span<const double> x) const {
  const double top = spec_.nl.domain_max();
  return std::all_of(x.begin(), x.end(), [top](double v) { return std::isfinite(v) && v < top; });
}

double ScalarProblem::residual_scale() const { return scale_; }

}  // namespace gelfand

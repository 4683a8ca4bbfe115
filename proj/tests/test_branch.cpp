#include <doctest.h>

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "gelfand/branch.hpp"
#include "gelfand/error.hpp"
#include "gelfand/problem.hpp"
#include "oracles.hpp"

using namespace gelfand;
using std::numbers::pi;

namespace {

ProblemSpec disc(std::size_t m = 256) { return make_problem(Order::Second, 2, Nonlinearity::exponential(), m); }

BranchPoint point(const MinimalOutcome& o) {
  REQUIRE(std::holds_alternative<BranchPoint>(o));
  return std::get<BranchPoint>(o);
}

double fold_lambda(const ProblemSpec& spec) {
  const Branch b = continue_branch(spec, 0.05, 0.0, 400);
  REQUIRE(b.fold.has_value());
  return b.fold->lambda_star;
}

}  // namespace

TEST_CASE("closed-form disc solutions satisfy the discrete equation to second order") {
  // Substituting u_b into the discrete operator: the residual shrinks by about 4 per halving.
  const double b = 0.5;
  const double lambda = oracle::disc_lambda(b);
  std::vector<double> res;
  for (std::size_t m : {63u, 127u, 255u}) {
    const ScalarProblem p(disc(m));
    const RadialField u = RadialField::sample(p.spec().grid, [&](double r) { return oracle::disc_u(b, r); });
    std::vector<double> out(p.size());
    p.residual(u.unknowns(), lambda, out);
    double m_ = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) m_ = std::max(m_, std::abs(out[i]));
    res.push_back(m_);
  }
  CHECK(res[0] / res[1] >= 3.5);
  CHECK(res[1] / res[2] >= 3.5);
}

TEST_CASE("minimal solution on the disc") {
  const auto [b_lo, b_hi] = oracle::disc_b(1.0);
  const BranchPoint p = point(minimal_solution(disc(), 1.0));
  CHECK(p.converged);
  CHECK(std::abs(p.u.values[0] - 2.0 * std::log(1.0 + b_lo)) <= 5e-3);
  CHECK(p.eta1 > 0.0);

  const MinimalOutcome above = minimal_solution(disc(), 3.0);
  CHECK(std::holds_alternative<DivergenceReport>(above));

  const BranchPoint zero = point(minimal_solution(disc(), 0.0));
  CHECK(zero.u.sup_abs() == 0.0);
  CHECK(zero.eta1 == doctest::Approx(first_eigenvalue(ScalarProblem(disc()).op())));
  (void)b_hi;
}

TEST_CASE("newton from the upper closed-form profile finds the second solution") {
  const auto [b_lo, b_hi] = oracle::disc_b(1.0);
  const ProblemSpec spec = disc();
  const RadialField guess = RadialField::sample(spec.grid, [&](double r) { return oracle::disc_u(b_hi, r); });
  const BranchPoint up = newton_solve(spec, 1.0, guess);
  CHECK(up.converged);
  CHECK(std::abs(up.u.values[0] - 2.0 * std::log(1.0 + b_hi)) <= 5e-3);
  CHECK(up.eta1 < 0.0);

  // Starting at the minimal solution is already a fixed point.
  const BranchPoint lo = point(minimal_solution(spec, 1.0));
  const BranchPoint again = newton_solve(spec, 1.0, lo.u);
  CHECK(again.newton_iters <= 2);
  CHECK(std::abs(again.u.values[0] - lo.u.values[0]) <= 1e-9);

  const BranchPoint z = newton_solve(spec, 0.0, guess);
  CHECK(z.u.sup_abs() <= 1e-12);
  (void)b_lo;
}

TEST_CASE("disc fold and extremal solution") {
  const Branch br = continue_branch(disc(), 0.05, 0.0, 400);
  REQUIRE(br.fold.has_value());
  CHECK(std::abs(br.fold->lambda_star - 2.0) <= 1e-2);

  // arclength strictly increasing, lambda increasing and u nondecreasing before the fold
  for (std::size_t i = 1; i < br.points.size(); ++i) CHECK(br.points[i].arclength > br.points[i - 1].arclength);
  for (std::size_t i = 1; i <= br.fold->index; ++i) {
    CHECK(br.points[i].lambda > br.points[i - 1].lambda);
    for (std::size_t j = 0; j < br.points[i].u.values.size(); ++j)
      CHECK(br.points[i].u.values[j] >= br.points[i - 1].u.values[j] - 1e-12);
    CHECK(br.points[i - 1].eta1 >= -kTolEig);
  }
  // Just past the fold the branch is unstable.
  REQUIRE(br.points.size() > br.fold->index + 2);
  CHECK(br.points[br.fold->index + 2].eta1 < 0.0);

  const ExtremalSolution ex = extremal_solution(br);
  CHECK(std::abs(ex.point.u.values[0] - 2.0 * std::log(2.0)) <= 5e-3);
  CHECK(ex.worst_decrease <= 1e-12);
  CHECK(ex.limit_gap <= 1e-6);

  const LambdaStarEstimate est = lambda_star_crosscheck(disc(), br);
  CHECK(est.discrepancy < 0.02);
  CHECK(est.diagnostics.empty());
}

TEST_CASE("fold converges at second order on the disc") {
  const double e1 = std::abs(fold_lambda(disc(127)) - 2.0);
  const double e2 = std::abs(fold_lambda(disc(255)) - 2.0);
  CHECK(e1 / e2 >= 3.5);
  // Richardson on the two grids.
  const double l1 = fold_lambda(disc(127)), l2 = fold_lambda(disc(255));
  CHECK(std::abs((4.0 * l2 - l1) / 3.0 - 2.0) <= 1e-3);
}

TEST_CASE("three-dimensional fold matches shooting") {
  const ProblemSpec spec = make_problem(Order::Second, 3, Nonlinearity::exponential(), 256);
  const Branch br = continue_branch(spec, 0.05, 0.0, 600);
  REQUIRE(br.fold.has_value());
  CHECK(std::abs(br.fold->lambda_star - oracle::shooting_lambda_star(3)) <= 1e-2);
  // The upper segment turns back below lambda = 2 before coming up again.
  double lowest = 1e9;
  for (std::size_t i = br.fold->index; i < br.points.size(); ++i) lowest = std::min(lowest, br.points[i].lambda);
  CHECK(lowest < 2.0);
}

TEST_CASE("one-dimensional extremal solution is bounded") {
  const ProblemSpec spec = make_problem(Order::Second, 1, Nonlinearity::exponential(), 256);
  const Branch br = continue_branch(spec, 0.05, 0.0, 400);
  REQUIRE(br.fold.has_value());
  CHECK(std::abs(br.fold->lambda_star - oracle::shooting_lambda_star(1)) <= 1e-2);
  CHECK(std::isfinite(extremal_solution(br).point.sup_norm));
}

TEST_CASE("eta1 at lambda = 0 in three dimensions is the ball eigenvalue") {
  std::vector<double> err;
  for (std::size_t m : {64u, 128u}) {
    const ProblemSpec spec = make_problem(Order::Second, 3, Nonlinearity::exponential(), m);
    err.push_back(std::abs(stability_eigenvalue(spec, 0.0, RadialField(spec.grid)) - pi * pi));
  }
  CHECK(err[1] < 2e-3);
  CHECK(err[0] / err[1] >= 3.5);
}

TEST_CASE("Navier fold is a stability crossing") {
  const ProblemSpec spec = make_problem(Order::FourthNavier, 5, Nonlinearity::exponential(), 128);
  const Branch br = continue_branch(spec, 1.0, 0.0, 300);
  REQUIRE(br.fold.has_value());
  for (std::size_t i = 0; i < br.fold->index; ++i) CHECK(br.points[i].eta1 > 0.0);
  CHECK(std::abs(br.points[br.fold->index].eta1) <= 5e-2);
}

TEST_CASE("small solution of the clamped problem") {
  const ProblemSpec spec = make_problem(Order::FourthDirichlet, 5, Nonlinearity::exponential(), 128);
  const BranchPoint z = small_solution(spec, 0.0);
  CHECK(z.u.sup_abs() == 0.0);

  const BranchPoint s = small_solution(spec, 1e-3);
  CHECK(s.converged);
  CHECK(s.sup_norm <= std::sqrt(1e-3));
  CHECK(s.eta1 > 0.0);
  const BranchPoint m = point(minimal_solution(spec, 1e-3));
  for (std::size_t i = 0; i < s.u.values.size(); ++i) CHECK(std::abs(s.u.values[i] - m.u.values[i]) <= 1e-8);

  // Contraction estimate fails once lambda f'(sqrt lambda) ||L^-1|| >= 1.
  const double g = inverse_norm_inf(ScalarProblem(spec).op());
  double big = 1e-3;
  while (big * std::exp(std::sqrt(big)) * g < 1.0) big *= 2.0;
  try {
    small_solution(spec, big);
    FAIL("expected NoContraction");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoContraction);
  }
}

TEST_CASE("property: minimal solutions are ordered in lambda") {
  oracle::Gen gen(42);
  for (Order order : {Order::Second, Order::FourthNavier, Order::FourthDirichlet}) {
    const int n = order == Order::Second ? 3 : 5;
    const double top = order == Order::Second ? 3.0 : 100.0;
    const ProblemSpec spec = make_problem(order, n, Nonlinearity::exponential(), 96);
    for (int trial = 0; trial < 6; ++trial) {
      double a = gen.uniform(0.0, top), b = gen.uniform(0.0, top);
      if (a > b) std::swap(a, b);
      const MinimalOutcome oa = minimal_solution(spec, a), ob = minimal_solution(spec, b);
      if (!std::holds_alternative<BranchPoint>(ob)) continue;
      REQUIRE(std::holds_alternative<BranchPoint>(oa));
      const auto& ua = std::get<BranchPoint>(oa).u.values;
      const auto& ub = std::get<BranchPoint>(ob).u.values;
      CAPTURE(to_string(order));
      for (std::size_t i = 0; i < ua.size(); ++i) CHECK(ua[i] <= ub[i] + 1e-10);
      CHECK(std::get<BranchPoint>(ob).eta1 >= -kTolEig);
    }
  }
}

TEST_CASE("class S points stay below the pole") {
  const ProblemSpec spec = make_problem(Order::Second, 2, Nonlinearity::mems(2.0), 128);
  const Branch br = continue_branch(spec, 0.05, 0.0, 300);
  REQUIRE(br.fold.has_value());
  for (const BranchPoint& p : br.points) CHECK(p.sup_norm < 1.0);
  CHECK(std::holds_alternative<DivergenceReport>(minimal_solution(spec, 1.0)));
}

TEST_CASE("weak residuals") {
  for (Order order : {Order::Second, Order::FourthNavier, Order::FourthDirichlet}) {
    const ProblemSpec spec = make_problem(order, 5, Nonlinearity::exponential(), 32);
    const auto bank = test_bank(5, spec.bc());
    CHECK(bank.size() == 5);
    for (const auto& t : bank) CHECK_NOTHROW(check_boundary(t, 5, spec.bc()));
    const BranchPoint zero{0.0, RadialField(spec.grid)};
    for (double r : weak_residual(spec, zero, bank)) CHECK(r == 0.0);
  }
  CHECK_THROWS_AS(check_boundary({"bad", RadialPolynomial({1.0, 0.5})}, 3, BoundaryCondition::Dirichlet2), Error);

  // Closed-form disc solution sampled on the grid.
  const double b = 0.5;
  std::vector<double> worst;
  for (std::size_t m : {63u, 127u}) {
    const ProblemSpec spec = disc(m);
    const BranchPoint p{oracle::disc_lambda(b), RadialField::sample(spec.grid, [&](double r) { return oracle::disc_u(b, r); })};
    double w = 0.0;
    for (double r : weak_residual(spec, p, test_bank(2, spec.bc()))) w = std::max(w, r);
    worst.push_back(w);
  }
  CHECK(worst[1] <= 30.0 * std::pow(1.0 / 128, 2));
  CHECK(worst[0] / worst[1] >= 3.5);

  // Converged Navier point.
  std::vector<double> nav;
  for (std::size_t m : {63u, 127u}) {
    const ProblemSpec spec = make_problem(Order::FourthNavier, 5, Nonlinearity::exponential(), m);
    const BranchPoint p = point(minimal_solution(spec, 50.0));
    double w = 0.0;
    for (double r : weak_residual(spec, p, test_bank(5, spec.bc()))) w = std::max(w, r);
    nav.push_back(w);
  }
  CHECK(nav[0] / nav[1] >= 3.5);
}

TEST_CASE("rejected inputs") {
  CHECK_THROWS_AS(minimal_solution(disc(64), -1.0), Error);
  const Branch none{disc(64), {}, std::nullopt, {}};
  try {
    extremal_solution(none);
    FAIL("expected Unavailable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unavailable);
  }
}

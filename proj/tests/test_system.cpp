#include <doctest.h>

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "gelfand/branch.hpp"
#include "gelfand/error.hpp"
#include "gelfand/system.hpp"
#include "oracles.hpp"

using namespace gelfand;
using std::numbers::pi;

namespace {

SystemSpec ball(int n, std::size_t m = 128) {
  return make_system(n, Nonlinearity::exponential(), Nonlinearity::exponential(), m);
}

SystemPoint pair(const SystemOutcome& o) {
  REQUIRE(std::holds_alternative<SystemPoint>(o));
  return std::get<SystemPoint>(o);
}

double sup_diff(const RadialField& a, const RadialField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("equal parameters reduce to the scalar problem") {
  const SystemSpec spec = ball(3);
  for (double lambda : {0.5, 2.0, 3.0}) {
    const SystemPoint p = pair(system_minimal(spec, lambda, lambda));
    CHECK(sup_diff(p.u, p.v) <= 1e-10);
    const auto scalar = minimal_solution(make_problem(Order::Second, 3, Nonlinearity::exponential(), 128), lambda);
    REQUIRE(std::holds_alternative<BranchPoint>(scalar));
    CHECK(sup_diff(p.u, std::get<BranchPoint>(scalar).u) <= 1e-9);
  }
  const SystemPoint z = pair(system_minimal(spec, 0.0, 0.0));
  CHECK(z.u.sup_abs() == 0.0);
  CHECK(z.v.sup_abs() == 0.0);
}

TEST_CASE("minimal pairs shrink to zero with the parameters") {
  const SystemSpec spec = ball(3);
  oracle::Gen gen(9);
  double prev = 1e9;
  for (double lambda : {1e-1, 1e-2, 1e-3}) {
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double sigma = gen.uniform(0.01, 1.0);
      const SystemPoint p = pair(system_minimal(spec, lambda, sigma * lambda));
      worst = std::max({worst, p.u.sup_abs(), p.v.sup_abs()});
    }
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("property: minimal pairs are monotone in both parameters") {
  const SystemSpec spec = ball(3, 96);
  oracle::Gen gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const double l1 = gen.uniform(0.0, 3.0), g1 = gen.uniform(0.0, 3.0);
    const double l2 = l1 + gen.uniform(0.0, 1.0), g2 = g1 + gen.uniform(0.0, 1.0);
    const SystemOutcome hi = system_minimal(spec, l2, g2);
    if (!std::holds_alternative<SystemPoint>(hi)) continue;
    const SystemPoint a = pair(system_minimal(spec, l1, g1));
    const SystemPoint& b = std::get<SystemPoint>(hi);
    for (std::size_t i = 0; i < a.u.values.size(); ++i) {
      CHECK(a.u.values[i] <= b.u.values[i] + 1e-12);
      CHECK(a.v.values[i] <= b.v.values[i] + 1e-12);
    }
  }
}

TEST_CASE("property: sigma u <= v <= u on minimal pairs") {
  const SystemSpec spec = ball(3, 96);
  oracle::Gen gen(77);
  for (int trial = 0; trial < 10; ++trial) {
    const double sigma = gen.uniform(0.05, 1.0);
    const double lambda = gen.uniform(0.0, 3.0);
    const SystemOutcome o = system_minimal(spec, lambda, sigma * lambda);
    if (!std::holds_alternative<SystemPoint>(o)) continue;
    const SystemPoint& p = std::get<SystemPoint>(o);
    const OrderingReport rep = pointwise_orderings(spec, p, p);
    CAPTURE(sigma);
    CAPTURE(lambda);
    for (bool h : rep.holds) CHECK(h);
  }
}

TEST_CASE("diagonal ray reproduces the scalar fold") {
  const Ray two = trace_ray(ball(2), 1.0, 0.05, 0.0, 400);
  REQUIRE(two.fold.has_value());
  CHECK(std::abs(two.lambda_star - 2.0) <= 1e-2);

  const Ray three = trace_ray(ball(3), 1.0, 0.05, 0.0, 400);
  REQUIRE(three.fold.has_value());
  CHECK(std::abs(three.lambda_star - oracle::shooting_lambda_star(3)) <= 1e-2);
  for (const SystemPoint& p : three.points) CHECK(sup_diff(p.u, p.v) <= 1e-8);
}

TEST_CASE("critical curve: monotone in sigma, swap symmetric, separating") {
  const SystemSpec spec = ball(3);
  const std::vector<double> sigmas = {0.25, 0.5, 1.0, 2.0, 4.0};
  const UpsilonCurve c = upsilon_curve(spec, sigmas);
  REQUIRE(c.entries.size() == sigmas.size());
  for (const auto& e : c.entries) {
    CHECK(e.traced);
    CHECK(e.lambda_star > 0.0);
    CHECK(e.gamma_star == doctest::Approx(e.sigma * e.lambda_star));
  }
  for (std::size_t i = 1; i < c.entries.size(); ++i) CHECK(c.entries[i].lambda_star <= c.entries[i - 1].lambda_star);
  // lambda*(1/sigma) = sigma lambda*(sigma)
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const auto& a = c.entries[i];
    const auto& b = c.entries[sigmas.size() - 1 - i];
    CHECK(b.lambda_star == doctest::Approx(a.sigma * a.lambda_star).epsilon(2e-2));
  }
  CHECK(c.probes > 0);
  CHECK(c.inconsistent == 0);
}

TEST_CASE("parameter probes") {
  const SystemSpec spec = ball(3);
  CHECK(std::holds_alternative<SystemPoint>(system_minimal(spec, 0.1, 0.1)));
  const Ray r = trace_ray(spec, 1.0, 0.05, 0.0, 400);
  REQUIRE(r.fold.has_value());
  CHECK(std::holds_alternative<DivergenceReport>(system_minimal(spec, 1.05 * r.lambda_star, 1.05 * r.lambda_star)));
  CHECK(std::holds_alternative<DivergenceReport>(system_minimal(spec, 1.05 * r.lambda_star, 1.2 * r.lambda_star)));
}

TEST_CASE("orderings on upper-branch pairs") {
  const SystemSpec spec = ball(3);
  for (double sigma : {0.25, 0.5, 1.0}) {
    CAPTURE(sigma);
    const Ray ray = trace_ray(spec, sigma, 0.05, 0.0, 400);
    REQUIRE(ray.fold.has_value());
    const auto pairs = upper_branch_pairs(spec, ray, 10);
    REQUIRE(!pairs.empty());
    const OrderingThreshold th = ordering_threshold(spec, ray);
    for (const SolutionPair& p : pairs) {
      const OrderingReport rep = pointwise_orderings(spec, p.second, p.minimal);
      CHECK(rep.holds[0]);
      CHECK(rep.holds[1]);
      CHECK(rep.holds[2]);
      CHECK(rep.max_violation[0] <= 1e-8);
      if (p.second.lambda < th.lambda1) CHECK(rep.holds[3]);
      // the second solution lies above the minimal one
      for (std::size_t i = 0; i < p.second.u.values.size(); ++i)
        CHECK(p.second.u.values[i] >= p.minimal.u.values[i] - 1e-10);
    }
    if (sigma == 1.0) CHECK_FALSE(th.iv_fails_somewhere);
  }
}

TEST_CASE("symmetric pairs satisfy the orderings with equality") {
  const SystemSpec spec = ball(3);
  const Ray ray = trace_ray(spec, 1.0, 0.05, 0.0, 400);
  for (const SolutionPair& p : upper_branch_pairs(spec, ray, 4)) {
    const OrderingReport rep = pointwise_orderings(spec, p.second, p.minimal);
    for (double v : rep.max_violation) CHECK(v <= 1e-8);
  }
}

TEST_CASE("difference residual") {
  const SystemSpec spec = ball(3);
  const SystemPoint m = pair(system_minimal(spec, 1.0, 0.5));
  const DifferenceResidual zero = difference_residual(spec, m, m);
  CHECK(zero.u.sup_abs() == 0.0);
  CHECK(zero.v.sup_abs() == 0.0);

  // Computed pairs solve the difference system up to the Newton tolerance.
  const Ray ray = trace_ray(spec, 0.5, 0.05, 0.0, 400);
  for (const SolutionPair& p : upper_branch_pairs(spec, ray, 4)) {
    const DifferenceResidual d = difference_residual(spec, p.second, p.minimal);
    const double h = spec.grid.h();
    CHECK(std::max(d.u.sup_abs(), d.v.sup_abs()) * h * h <= 1e-8);
  }

  // Manufactured: u_o = v_o = cos(pi r / 2) with u_min = v_min = 0 leaves
  // -Delta u_o - lambda (e^{u_o} - 1), known in closed form.
  const double lambda = 0.7, gamma = 0.3;
  auto neg_lap = [](double r) {
    const double k = pi / 2;
    return r == 0.0 ? 3.0 * k * k : k * k * std::cos(k * r) + 2.0 / r * k * std::sin(k * r);
  };
  std::vector<double> err;
  for (std::size_t mm : {64u, 128u, 256u}) {
    const RadialGrid g(3, mm);
    const RadialField o = RadialField::sample(g, [](double r) { return std::cos(pi * r / 2); });
    const RadialField z(g);
    const DifferenceResidual d = difference_residual(lambda, gamma, z, z, o, o);
    double e = 0.0;
    for (std::size_t i = 0; i < g.unknowns(); ++i) {
      const double r = g.r(i), eo = std::exp(o.values[i]) - 1.0;
      e = std::max(e, std::abs(d.u.values[i] - (neg_lap(r) - lambda * eo)));
      e = std::max(e, std::abs(d.v.values[i] - (neg_lap(r) - gamma * eo)));
    }
    err.push_back(e);
  }
  CHECK(std::log2(err[0] / err[1]) >= 1.9);
  CHECK(std::log2(err[1] / err[2]) >= 1.9);
}

TEST_CASE("weak residual of computed pairs") {
  std::vector<double> worst;
  for (std::size_t m : {63u, 127u}) {
    const SystemSpec spec = ball(3, m);
    const SystemPoint p = pair(system_minimal(spec, 2.0, 1.0));
    double w = 0.0;
    for (double r : system_weak_residual(spec, p, test_bank(3, BoundaryCondition::Dirichlet2))) w = std::max(w, r);
    worst.push_back(w);
  }
  CHECK(worst[0] / worst[1] >= 3.5);
}

TEST_CASE("rejected inputs") {
  const SystemSpec spec = ball(3, 64);
  CHECK_THROWS_AS(system_minimal(spec, -1.0, 0.0), Error);
  CHECK_THROWS_AS(trace_ray(spec, 0.0, 0.05, 0.0, 10), Error);
  const SystemPoint a = pair(system_minimal(spec, 1.0, 0.5));
  const SystemPoint b = pair(system_minimal(spec, 1.0, 0.6));
  try {
    pointwise_orderings(spec, a, b);
    FAIL("expected RejectedInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RejectedInput);
  }
}

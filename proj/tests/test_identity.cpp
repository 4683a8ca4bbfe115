#include <doctest.h>

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "gelfand/branch.hpp"
#include "gelfand/identity.hpp"
#include "gelfand/system.hpp"
#include "oracles.hpp"

using namespace gelfand;

namespace {

const IdentityReport& find(const std::vector<IdentityReport>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return r;
  FAIL("missing report " << name);
  return rs.front();
}

double order(double coarse, double fine) { return std::log2(std::abs(coarse) / std::abs(fine)); }

SystemSpec ball3(std::size_t m = 128) {
  return make_system(3, Nonlinearity::exponential(), Nonlinearity::exponential(), m);
}

}  // namespace

TEST_CASE("manufactured Pohozaev equality converges at second order") {
  for (BoundaryCondition bc : {BoundaryCondition::Navier, BoundaryCondition::Dirichlet4}) {
    for (int n : {5, 6}) {
      CAPTURE(to_string(bc));
      CAPTURE(n);
      const auto a = manufactured_pohozaev(n, bc, 64);
      const auto b = manufactured_pohozaev(n, bc, 128);
      const auto& ea = find(a, "pohozaev-equality");
      const auto& eb = find(b, "pohozaev-equality");
      CHECK(order(ea.residual, eb.residual) >= 1.9);
      CHECK(eb.verdict == Verdict::Pass);
    }
  }
}

TEST_CASE("manufactured energy identities converge at second order") {
  for (int n : {3, 4, 5}) {
    CAPTURE(n);
    const auto a = manufactured_energy(n, 64);
    const auto b = manufactured_energy(n, 128);
    for (const char* name : {"cross-pohozaev", "energy-balance-u", "energy-balance-v"}) {
      CAPTURE(name);
      const auto& ra = find(a, name);
      const auto& rb = find(b, name);
      CHECK(rb.verdict == Verdict::Pass);
      if (std::abs(ra.residual) > 1e-12) CHECK(order(ra.residual, rb.residual) >= 1.9);
    }
  }
}

TEST_CASE("zero differences give zero on both sides") {
  const RadialGrid g(5, 64);
  for (BoundaryCondition bc : {BoundaryCondition::Navier, BoundaryCondition::Dirichlet4}) {
    for (const auto& r : pohozaev_fields(bc, RadialField(g), RadialField(g))) {
      CHECK(r.lhs == 0.0);
      CHECK(r.rhs == 0.0);
    }
  }
  const SystemSpec spec = ball3(64);
  const auto m = system_minimal(spec, 1.0, 0.5);
  REQUIRE(std::holds_alternative<SystemPoint>(m));
  const SystemPoint& p = std::get<SystemPoint>(m);
  for (const auto& r : system_energy(spec, p, p)) {
    CAPTURE(r.name);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
  }
}

TEST_CASE("Pohozaev inequality on computed Navier pairs") {
  const ProblemSpec spec = make_problem(Order::FourthNavier, 5, Nonlinearity::exponential(), 128);
  const Branch br = continue_branch(spec, 1.0, 0.0, 300);
  REQUIRE(br.fold.has_value());
  MonotoneOptions mo;
  mo.eigenvalue = false;
  int checked = 0;
  for (std::size_t k = br.fold->index + 1; k < br.points.size(); k += 4) {
    const auto low = minimal_solution(spec, br.points[k].lambda, mo);
    if (!std::holds_alternative<BranchPoint>(low)) continue;
    const auto rs = pohozaev_fourth(spec, br.points[k], std::get<BranchPoint>(low));
    CAPTURE(br.points[k].lambda);
    CHECK(find(rs, "pohozaev-inequality").verdict == Verdict::Pass);
    ++checked;
  }
  CHECK(checked >= 3);
  // A point paired with itself is not a pair at all.
  const auto same = pohozaev_fourth(spec, br.points[br.fold->index + 1], br.points[br.fold->index + 1]);
  CHECK(find(same, "pohozaev-equality").residual == 0.0);
}

TEST_CASE("T scan: convexity bound, empty t = 0 row, small-lambda sign") {
  const ProblemSpec spec = make_problem(Order::FourthNavier, 5, Nonlinearity::exponential(), 96);
  const Branch br = continue_branch(spec, 1.0, 0.0, 200);
  REQUIRE(br.fold.has_value());
  const auto m = minimal_solution(spec, br.fold->lambda_star / 100.0);
  REQUIRE(std::holds_alternative<BranchPoint>(m));
  const BranchPoint& u = std::get<BranchPoint>(m);

  TScanOptions opt;
  opt.t_hi = 5.0;
  const TScanResult r = t_scan(spec, u, opt);
  CHECK(r.domination_violations == 0);
  CHECK(r.domination_gap >= 0.0);
  CHECK(r.epsilon > 0.0);
  CHECK(r.c_sigma > 0.0);
  CHECK(r.t.min_value > 0.0);
  CHECK(r.t.min_value >= r.s.min_value);

  // Every term carries a factor t: the minimum over t in (0, 1e-9] is tiny.
  TScanOptions tiny;
  tiny.t_hi = 1e-9;
  tiny.t_samples = 11;
  CHECK(std::abs(t_scan(spec, u, tiny).t.min_value) <= 1e-12);

  // Domination holds for other parameters too.
  oracle::Gen gen(5);
  for (int k = 0; k < 4; ++k) {
    TScanOptions o;
    o.sigma_conv = gen.uniform(0.1, 0.95);
    o.c_sigma = gen.uniform(0.1, 50.0);
    o.t_hi = gen.uniform(1.0, 30.0);
    o.t_samples = 101;
    const TScanResult s = t_scan(spec, u, o);
    CHECK(s.domination_violations == 0);
  }
}

TEST_CASE("quadrant integrand") {
  CHECK(quadrant_integrand(0.0, 0.0, 0.01, 0.5, 3.0) == 0.0);
  CHECK(default_quadrant_c(3) == doctest::Approx(6.0));
  CHECK(quadrant_scan(3.0, 0.01, 0.5).min_value > 0.0);
  CHECK(quadrant_scan(3.0, 1e6, 0.5).min_value < 0.0);
  // With C = 2 the e-terms alone are nonnegative: (e^a - 1) a - 2 (e^a - a - 1) >= 0.
  CHECK(quadrant_scan(2.0, 1e6, 0.5).min_value > 0.0);

  // Direct oracle on a few points.
  oracle::Gen gen(8);
  for (int k = 0; k < 50; ++k) {
    const double a = gen.uniform(0, 5), b = gen.uniform(0, 5), l = gen.log_uniform(1e-3, 1e3);
    const double s = gen.uniform(0.01, 1.0), c = gen.uniform(1.0, 8.0);
    auto part = [&](double x) { return x * x / l + (std::exp(x) - 1) * x - c * (std::exp(x) - x - 1); };
    CHECK(quadrant_integrand(a, b, l, s, c) == doctest::Approx(s * part(a) + part(b)).epsilon(1e-12));
  }
}

TEST_CASE("property: quadrant threshold decreases as C grows") {
  double prev = 1e300;
  for (double c : {2.5, 3.0, 4.0, 6.0, 10.0}) {
    const ScanThreshold t = quadrant_threshold(c, 0.5);
    CAPTURE(c);
    CHECK(t.lambda > 0.0);
    CHECK(t.lambda < prev);
    prev = t.lambda;
  }
}

TEST_CASE("exponential scaling threshold") {
  const double serial = exp_scaling_threshold_serial();
  const double par = exp_scaling_threshold();
  CHECK(serial == par);
  CHECK(std::abs(par - 1.0) <= 1e-3);
  // Stable once the axes are denser than a thousand points.
  for (std::size_t n : {1001u, 4001u}) CHECK(std::abs(exp_scaling_threshold(n, n) - 1.0) <= 1e-3);
  // A failing point: sigma = 1/2, t = 2.
  CHECK(std::exp(1.0) - 0.5 * std::exp(2.0) == doctest::Approx(-0.976).epsilon(1e-3));
  CHECK(par < 2.0);
}

TEST_CASE("energy identities on computed system pairs") {
  const SystemSpec spec = ball3();
  const Ray ray = trace_ray(spec, 0.5, 0.05, 0.0, 400);
  REQUIRE(ray.fold.has_value());
  const auto pairs = upper_branch_pairs(spec, ray, 6);
  REQUIRE(!pairs.empty());
  for (const SolutionPair& p : pairs) {
    const auto rs = system_energy(spec, p.second, p.minimal);
    for (const char* name : {"cross-pohozaev", "energy-balance-u", "energy-balance-v", "pohozaev-bound"}) {
      CAPTURE(name);
      CHECK(find(rs, name).verdict == Verdict::Pass);
    }
    for (const char* name : {"coercivity-u", "coercivity-v"}) {
      CAPTURE(name);
      CHECK(find(rs, name).lhs < find(rs, name).rhs);
    }
  }
}

TEST_CASE("energy bound along the diagonal ray") {
  const SystemSpec spec = ball3();
  const Ray ray = trace_ray(spec, 1.0, 0.05, 0.0, 400);
  REQUIRE(ray.fold.has_value());
  const EnergyBound eb = extremal_energy_bound(spec, ray);
  CHECK(eb.holds);
  CHECK(eb.worst_margin >= 0.0);
  CHECK(eb.increasing);
  CHECK(eb.bounded);
  CHECK(std::isfinite(eb.sup_fv_v));
  REQUIRE(!eb.entries.empty());
  for (const auto& e : eb.entries) CHECK(e.lhs <= e.rhs);

  // Near the origin int f(v) v ~ int v -> 0.
  const auto small = system_minimal(spec, 1e-4, 1e-4);
  REQUIRE(std::holds_alternative<SystemPoint>(small));
  Ray tiny;
  tiny.sigma = 1.0;
  tiny.points.push_back(std::get<SystemPoint>(small));
  const EnergyBound e0 = extremal_energy_bound(spec, tiny);
  REQUIRE(e0.entries.size() == 1);
  CHECK(e0.entries[0].fv_v <= 1e-4);
}

TEST_CASE("report tolerances") {
  const IdentityReport eq = make_report("x", false, 1.0, 1.0 + 1e-6, 0.01, 40.0);
  CHECK(eq.verdict == Verdict::Pass);
  CHECK(eq.tolerance == doctest::Approx(40.0 * 1e-4));
  CHECK(make_report("x", false, 1.0, 1.1, 0.01, 40.0).verdict == Verdict::Fail);
  CHECK(make_report("x", true, 0.5, 1.0, 0.01, 40.0).verdict == Verdict::Pass);
  CHECK(make_report("x", true, 1.5, 1.0, 0.01, 40.0).verdict == Verdict::Fail);
}

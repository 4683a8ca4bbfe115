#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "gelfand/banded.hpp"
#include "gelfand/eigen.hpp"
#include "gelfand/error.hpp"
#include "gelfand/radial.hpp"
#include "oracles.hpp"

using namespace gelfand;
using std::numbers::pi;

namespace {

double max_err(const RadialField& a, auto&& exact, std::size_t upto) {
  double m = 0.0;
  for (std::size_t i = 0; i < upto; ++i) m = std::max(m, std::abs(a.values[i] - exact(a.grid.r(i))));
  return m;
}

Eigen::MatrixXd dense(const BandedMatrix& a) {
  Eigen::MatrixXd d(a.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) d(i, j) = a.at(i, j);
  return d;
}

}  // namespace

TEST_CASE("grid tables") {
  for (int n : {1, 2, 3, 5}) {
    const RadialGrid g(n, 64);
    CHECK(g.nodes() == 66);
    CHECK(g.unknowns() == 65);
    CHECK(g.h() == doctest::Approx(1.0 / 65));
    double w = 0.0;
    for (double x : g.weights()) w += x;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK(RadialGrid(3, 16).surface_measure() == doctest::Approx(4.0 * pi));
  CHECK(RadialGrid(2, 16).surface_measure() == doctest::Approx(2.0 * pi));
}

TEST_CASE("laplacian is exact on quadratics in r") {
  oracle::Gen gen(3);
  for (int n : {1, 2, 3, 4, 5, 7}) {
    const RadialGrid g(n, 50);
    const OperatorMatrix lap = laplacian(g);
    // u = c (1 - r^2): -Delta u = 2 N c.
    const double c = gen.uniform(-3.0, 3.0);
    const RadialField u = RadialField::sample(g, [&](double r) { return c * (1.0 - r * r); });
    const RadialField lu = lap.apply(u);
    CAPTURE(n);
    CHECK(max_err(lu, [&](double) { return 2.0 * n * c; }, g.unknowns()) <= 1e-10);
    // u = 0 -> 0.
    const RadialField z = lap.apply(RadialField(g));
    CHECK(max_err(z, [](double) { return 0.0; }, g.nodes()) == 0.0);
  }
}

TEST_CASE("first Dirichlet eigenvalue of -Delta on the 3-ball is pi^2") {
  std::vector<double> err;
  for (std::size_t m : {64u, 128u, 256u}) {
    const RadialGrid g(3, m);
    const double ev = smallest_eigenvalue(laplacian(g).matrix(), g.weights()).value;
    err.push_back(std::abs(ev - pi * pi));
  }
  CHECK(err[2] < 1e-3);
  CHECK(std::log2(err[1] / err[2]) >= 1.9);
}

TEST_CASE("bilaplacian on manufactured polynomials converges at second order") {
  // Nodal truncation of the squared operator stays O(1) on the first rows and the
  // last row, so convergence is measured on the solution and consistency in the bulk.
  for (int n : {2, 3, 5}) {
    CAPTURE(n);
    // Clamped: (1 - r^2)^2, Delta^2 = 8 N (N + 2).
    // Navier: (N+4)/N - 2(N+2)/N r^2 + r^4 has u = Delta u = 0 at r = 1 and the same Delta^2.
    struct Case {
      BoundaryCondition bc;
      double (*u)(double, int);
    };
    const Case cases[] = {
        {BoundaryCondition::Dirichlet4, [](double r, int) { return (1 - r * r) * (1 - r * r); }},
        {BoundaryCondition::Navier,
         [](double r, int d) { return (d + 4.0) / d - 2.0 * (d + 2.0) / d * r * r + r * r * r * r; }},
    };
    const double source = 8.0 * n * (n + 2.0);
    for (const Case& c : cases) {
      CAPTURE(to_string(c.bc));
      std::vector<double> err;
      for (std::size_t m : {64u, 128u, 256u}) {
        const RadialGrid g(n, m);
        const OperatorMatrix op = bilaplacian(g, c.bc);
        const std::vector<double> x = op.solve(std::vector<double>(g.unknowns(), source));
        double e = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - c.u(g.r(i), n)));
        err.push_back(e);

        const RadialField b = op.apply(RadialField::sample(g, [&](double r) { return c.u(r, n); }));
        double bulk = 0.0;
        for (std::size_t i = 0; i < g.unknowns(); ++i)
          if (g.r(i) >= 0.25 && g.r(i) <= 0.75) bulk = std::max(bulk, std::abs(b.values[i] - source));
        CHECK(bulk <= 1e-4 * source);
      }
      CHECK(err[2] < 1e-4);
      CHECK(std::log2(err[0] / err[1]) >= 1.9);
      CHECK(std::log2(err[1] / err[2]) >= 1.9);
      CHECK(bilaplacian(RadialGrid(n, 32), c.bc).apply(RadialField(RadialGrid(n, 32))).sup_abs() == 0.0);
    }
  }
}

TEST_CASE("Navier bilaplacian squares the Dirichlet eigenvalue") {
  // sin(pi r) / r has -Delta u = pi^2 u in three dimensions, so Delta^2 u = pi^4 u with u = Delta u = 0 at r = 1.
  const auto ef = [](double r) { return r == 0.0 ? pi : std::sin(pi * r) / r; };
  std::vector<double> err;
  for (std::size_t m : {64u, 128u, 256u}) {
    const RadialGrid g(3, m);
    std::vector<double> rhs(g.unknowns());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::pow(pi, 4) * ef(g.r(i));
    const std::vector<double> x = bilaplacian(g, BoundaryCondition::Navier).solve(rhs);
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - ef(g.r(i))));
    err.push_back(e);
  }
  CHECK(err[2] / pi < 1e-4);
  CHECK(std::log2(err[1] / err[2]) >= 1.9);
  const RadialGrid g(3, 128);
  const double ev = smallest_eigenvalue(bilaplacian(g, BoundaryCondition::Navier).matrix(), g.weights()).value;
  CHECK(ev == doctest::Approx(std::pow(pi, 4)).epsilon(1e-3));
}

TEST_CASE("operators are self-adjoint in the weighted inner product") {
  for (BoundaryCondition bc : {BoundaryCondition::Dirichlet2, BoundaryCondition::Navier, BoundaryCondition::Dirichlet4}) {
    const RadialGrid g(4, 40);
    const OperatorMatrix op = make_operator(g, bc);
    const Eigen::MatrixXd a = dense(op.matrix());
    Eigen::VectorXd w(g.unknowns());
    for (std::size_t i = 0; i < g.unknowns(); ++i) w(i) = g.weights()[i];
    const Eigen::MatrixXd wa = w.asDiagonal() * a;
    CAPTURE(to_string(bc));
    CHECK((wa - wa.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * wa.cwiseAbs().maxCoeff());

    // Dense reference: eigenvalues of the symmetrized matrix, real to 1e-10.
    const Eigen::VectorXd s = w.cwiseSqrt();
    const Eigen::MatrixXd sym = s.asDiagonal() * a * s.cwiseInverse().asDiagonal();
    Eigen::EigenSolver<Eigen::MatrixXd> es(sym);
    CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() <= 1e-10 * es.eigenvalues().real().cwiseAbs().maxCoeff());
    const double dense_min = es.eigenvalues().real().minCoeff();
    const double ev = smallest_eigenvalue(op.matrix(), g.weights()).value;
    CHECK(ev == doctest::Approx(dense_min).epsilon(1e-8));
  }
}

TEST_CASE("property: banded solves match a dense LU") {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = static_cast<std::size_t>(gen.integer(5, 60));
    const std::size_t kl = static_cast<std::size_t>(gen.integer(0, 4));
    const std::size_t ku = static_cast<std::size_t>(gen.integer(0, 4));
    BandedMatrix a(n, kl, ku);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (a.in_band(i, j)) a.ref(i, j) = gen.uniform(-1.0, 1.0) + (i == j ? 6.0 : 0.0);
    const std::vector<double> b = gen.vector(n, -1.0, 1.0);
    const std::vector<double> x = BandedLU(a).solve(b);
    const Eigen::VectorXd ref = dense(a).partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
    for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref(i)).epsilon(1e-10));
    // apply is the matrix-vector product.
    const std::vector<double> y = a.apply(x);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(b[i]).epsilon(1e-10));
  }
}

TEST_CASE("operator solve inverts apply") {
  oracle::Gen gen(5);
  for (BoundaryCondition bc : {BoundaryCondition::Dirichlet2, BoundaryCondition::Navier, BoundaryCondition::Dirichlet4}) {
    const RadialGrid g(5, 80);
    const OperatorMatrix op = make_operator(g, bc);
    const std::vector<double> x = gen.vector(g.unknowns(), -1.0, 1.0);
    const std::vector<double> back = op.solve(op.apply(x));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-8));
  }
}

TEST_CASE("cell quadrature") {
  const RadialGrid g3(3, 100), g2(2, 100);
  CHECK(integrate(RadialField::sample(g3, [](double) { return 1.0; })) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-10));
  CHECK(integrate(RadialField::sample(g2, [](double) { return 1.0; })) == doctest::Approx(pi).epsilon(1e-10));
  std::vector<double> err;
  for (std::size_t m : {100u, 200u}) {
    const RadialGrid g(3, m);
    err.push_back(std::abs(integrate(RadialField::sample(g, [](double r) { return r * r; })) - 4.0 * pi / 5.0));
  }
  CHECK(err[0] < 1e-3);
  CHECK(err[1] < 0.3 * err[0]);
}

TEST_CASE("radial derivative") {
  const RadialGrid g(3, 100);
  const RadialField d = radial_derivative(RadialField::sample(g, [](double r) { return 1.0 - r * r; }));
  CHECK(max_err(d, [](double r) { return -2.0 * r; }, g.nodes()) <= 1e-12);
  CHECK(radial_derivative(RadialField::sample(g, [](double) { return 4.2; })).sup_abs() <= 1e-12);
  const RadialGrid g2(3, 199);  // r = 0.5 is node 100
  const RadialField q = radial_derivative(RadialField::sample(g2, [](double r) { return r * r * r * r; }));
  CHECK(q.values[100] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(boundary_derivative(RadialField::sample(g, [](double r) { return 1.0 - r * r; })) == doctest::Approx(-2.0));
}

TEST_CASE("prolongation is accurate to the interpolation order") {
  const RadialGrid g(3, 63);
  const RadialField u = RadialField::sample(g, [](double r) { return std::cos(2.0 * r); });
  const RadialField p = prolong(u);
  CHECK(p.grid.interior() == 127);
  CHECK(max_err(p, [](double r) { return std::cos(2.0 * r); }, p.grid.nodes()) < 1e-6);
}

TEST_CASE("resolution limit") {
  const RadialGrid g(2, 255);
  CHECK(resolved_sup(g, 2) == doctest::Approx(2.0 * std::log(256.0)));
  CHECK(resolved_sup(g, 4) == doctest::Approx(4.0 * std::log(256.0)));
}

TEST_CASE("rejected grids") {
  CHECK_THROWS_AS(RadialGrid(0, 10), Error);
  CHECK_THROWS_AS(RadialGrid(3, 2), Error);
}

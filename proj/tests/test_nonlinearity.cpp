#include <doctest.h>

#include <cmath>
#include <vector>

#include "gelfand/error.hpp"
#include "gelfand/lemma.hpp"
#include "gelfand/nonlinearity.hpp"
#include "oracles.hpp"

using namespace gelfand;

namespace {

Nonlinearity affine() {
  return Nonlinearity::custom("affine", NonlinearityClass::R, false,
                              {[](double t) { return 1.0 + t; }, [](double) { return 1.0; },
                               [](double) { return 0.0; }, [](double t) { return t + 0.5 * t * t; }, {}});
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

bool throws_kind(ErrorKind k, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == k;
  }
  return false;
}

}  // namespace

TEST_CASE("built-ins start at one, increase and bend upward") {
  for (const auto& nl : {Nonlinearity::exponential(), Nonlinearity::power(3.0), Nonlinearity::mems(2.0)}) {
    CAPTURE(nl.spec());
    CHECK(nl.f(0.0) == 1.0);
    const double top = nl.class_tag() == NonlinearityClass::S ? 0.99 : 20.0;
    // Power members continue below zero by a Taylor polynomial, increasing for t > -1/(p-1).
    for (double t : linspace(-0.3, top, 301)) {
      CHECK(nl.fprime(t) >= 0.0);
      CHECK(nl.fsecond(t) >= 0.0);
    }
  }
  const auto m = Nonlinearity::mems(2.0);
  CHECK(m.domain_max() == 1.0);
  CHECK(m.f(1.0 - 1e-6) > 1e11);
  CHECK(std::isinf(m.f(1.0)));
  CHECK(throws_kind(ErrorKind::SingularEvaluation, [&] { m.checked_f(1.0); }));
}

TEST_CASE("antiderivative agrees with Simpson quadrature of f") {
  oracle::Gen gen(7);
  for (const auto& nl : {Nonlinearity::exponential(), Nonlinearity::power(2.5), Nonlinearity::mems(2.0)}) {
    for (int k = 0; k < 20; ++k) {
      const double hi = nl.class_tag() == NonlinearityClass::S ? 0.95 : 8.0;
      const double t = gen.uniform(-0.5, hi);
      const double q = oracle::simpson([&](double s) { return nl.f(s); }, 0.0, t, 4000);
      CHECK(nl.antiderivative(t) == doctest::Approx(q).epsilon(1e-10));
    }
  }
}

TEST_CASE("parse round-trips the spec string") {
  for (const char* s : {"exp", "power:p=3", "mems:p=2"}) {
    CHECK(Nonlinearity::parse(s).spec() == s);
  }
  CHECK(throws_kind(ErrorKind::RejectedInput, [] { Nonlinearity::parse("cosh"); }));
}

TEST_CASE("classify") {
  const auto r = linspace(0.0, 60.0, 400);
  const auto s = linspace(0.0, 0.999, 400);
  CHECK(classify(Nonlinearity::exponential(), r) == Classification::R);
  CHECK(classify(Nonlinearity::mems(2.0), s) == Classification::S);
  CHECK(classify(affine(), r) == Classification::Neither);
  const std::vector<double> outside = {0.0, 0.5, 1.5};
  CHECK(throws_kind(ErrorKind::RejectedInput, [&] { classify(Nonlinearity::mems(2.0), outside); }));
}

TEST_CASE("superlinearity ratio") {
  const auto e = Nonlinearity::exponential();
  CHECK(superlinearity_ratio(e, 1.0) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) - 1.0)).epsilon(1e-12));
  CHECK(throws_kind(ErrorKind::SingularEvaluation, [&] { superlinearity_ratio(e, 0.0); }));

  for (double p : {1.5, 3.0, 5.0}) {
    CHECK(superlinearity_ratio(Nonlinearity::power(p), 1e7) == doctest::Approx(p + 1.0).epsilon(1e-5));
  }

  // f/F = 1/(t(1-t)) for (1-t)^-2.
  const auto m = Nonlinearity::mems(2.0);
  double prev = 0.0;
  for (double t : linspace(0.9, 0.999, 50)) {
    const double r = superlinearity_ratio(m, t);
    CHECK(r == doctest::Approx(1.0 / (t * (1.0 - t))).epsilon(1e-9));
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("exponential ratio increases past one and crosses every bound") {
  const auto e = Nonlinearity::exponential();
  double prev = superlinearity_ratio(e, 1.0);
  for (double t = 1.25; t < 200.0; t += 0.25) {
    const double r = superlinearity_ratio(e, t);
    CHECK(r > prev);
    prev = r;
  }
  for (double bound : {10.0, 100.0}) {
    double t = 1.0;
    while (superlinearity_ratio(e, t) <= bound) t += 0.01;
    CHECK(t < bound + 1.0);  // ratio ~ t for large t
    CHECK(superlinearity_ratio(e, t) > bound);
  }
}

TEST_CASE("class S: f/F exceeds n near the pole") {
  for (double p : {1.0, 2.0, 3.0}) {
    const auto m = Nonlinearity::mems(p);
    for (int n = 1; n <= 64; n *= 2) {
      double t = 0.5;
      while (superlinearity_ratio(m, t) < n) t = 0.5 * (t + 1.0);
      CHECK(t < 1.0);
      CHECK(m.f(t) / m.antiderivative(t) >= n);
    }
  }
}

TEST_CASE("supercritical threshold and check") {
  CHECK(supercritical_threshold(5) == 10.0);
  CHECK(supercritical_threshold(6) == 6.0);
  const auto tail = linspace(1000.0, 5000.0, 9);
  const auto ex = supercritical_check(Nonlinearity::exponential(), 5, tail);
  CHECK(ex.supercritical);
  CHECK(ex.threshold == 10.0);
  const auto pw = supercritical_check(Nonlinearity::power(3.0), 5, tail);
  CHECK_FALSE(pw.supercritical);
  CHECK(pw.min_ratio == doctest::Approx(4.0).epsilon(1e-2));
  CHECK(throws_kind(ErrorKind::WrongClass, [&] { supercritical_check(Nonlinearity::mems(2.0), 5, tail); }));
}

TEST_CASE("mu for class R: accepted and rejected candidates") {
  const auto e = Nonlinearity::exponential();
  const auto grid = hybrid_grid(1000.0);
  // Dense-grid oracle: min over t of mu^2 (e^{t/mu} + 1) - e^t - 1/2 at mu = 0.9.
  double m = 1e300;
  for (double t = 0.0; t < 40.0; t += 1e-4) {
    m = std::min(m, 0.81 * (std::exp(t / 0.9) + 1.0) - std::exp(t) - 0.5);
  }
  CHECK(m > 0.0);
  CHECK(m < 0.1);
  CHECK_FALSE(first_mu_r_violation(e, 0.9, 1.0, grid).has_value());
  CHECK(mu_r_inequality_holds(e, 0.9, 1.0, 0.95));

  const auto bad = first_mu_r_violation(e, 0.5, 1.0, grid);
  REQUIRE(bad.has_value());
  CHECK(grid[*bad] == 0.0);  // 0.25 * 2 = 0.5 < 1.5

  const double mu = find_mu_r(e, 1.0, grid);
  CHECK(mu > 0.0);
  CHECK(mu < 1.0);
  CHECK(mu * mu * 2.0 >= 1.5 - kInequalitySlack);
}

TEST_CASE("property: find_mu_r holds at fresh random points") {
  const auto e = Nonlinearity::exponential();
  const auto grid = hybrid_grid(1000.0);
  oracle::Gen gen(20261018);
  for (double eps : {0.1, 1.0, 10.0}) {
    const double mu = find_mu_r(e, eps, grid);
    int violations = 0;
    for (int k = 0; k < 10000; ++k) {
      if (!mu_r_inequality_holds(e, mu, eps, gen.uniform(0.0, 1000.0))) ++violations;
    }
    CAPTURE(eps);
    CHECK(violations == 0);
  }
}

TEST_CASE("find_k") {
  const auto e = Nonlinearity::exponential();
  // max of 3 e^t - e^{2t} sits at e^t = 1.5.
  CHECK(find_k(e, 0.5, 3) == doctest::Approx(2.25).epsilon(1e-6));
  // N = 1: the supremum is 0, at t = 0.
  CHECK(find_k(e, 0.5, 1) == doctest::Approx(0.0).epsilon(1e-6));
  // t = 0 forces k >= N - 1.
  for (int n = 1; n <= 6; ++n) CHECK(find_k(e, 0.5, n) >= n - 1 - 1e-12);
}

TEST_CASE("property: find_k is minimal when the maximizer is interior") {
  const auto e = Nonlinearity::exponential();
  const auto grid = hybrid_grid(50.0);
  for (double mu : {0.3, 0.5, 0.7}) {
    for (int n : {2, 3, 5}) {
      const double k = find_k(e, mu, n, grid);
      if (!(k > n - 1 + 1e-6)) continue;
      // The maximizer of n e^t - e^{t/mu} solves e^{t (1/mu - 1)} = n mu.
      const double t_star = std::log(n * mu) / (1.0 / mu - 1.0);
      const bool fails = n * e.f(t_star) > e.f(t_star / mu) + k - 1e-6;
      CAPTURE(mu);
      CAPTURE(n);
      CHECK(fails);
    }
  }
}

TEST_CASE("mu for class S") {
  const auto m = Nonlinearity::mems(2.0);
  const double mu = find_mu_s(m, 1.0);
  CHECK(mu >= 0.75 - 1e-12);  // (1 + eps/2)/(1 + eps)
  CHECK(mu < 1.0);
  std::vector<double> pts;
  for (int i = 0; i < 512; ++i) pts.push_back(mu * i / 512.0);
  CHECK(mu_s_inequality_holds(m, mu, 1.0, pts));
  for (double t : pts) CHECK(mu * (m.f(t / mu) + 1.0) - m.f(t) - 0.5 >= -kInequalitySlack);

  const std::vector<double> edge = {0.5};
  CHECK(throws_kind(ErrorKind::SingularEvaluation, [&] { mu_s_inequality_holds(m, 0.5, 1.0, edge); }));
}

TEST_CASE("strict convexity") {
  const auto g = linspace(0.0, 10.0, 200);
  CHECK(strict_convexity_check(Nonlinearity::exponential(), g));
  const auto quad = Nonlinearity::custom("1+t^2", NonlinearityClass::R, false,
                                         {[](double t) { return 1.0 + t * t; }, [](double t) { return 2.0 * t; },
                                          [](double) { return 2.0; },
                                          [](double t) { return t + t * t * t / 3.0; }, {}});
  CHECK(strict_convexity_check(quad, g));
  CHECK_FALSE(strict_convexity_check(affine(), g));
}

TEST_CASE("common parameters serve both nonlinearities") {
  const auto e = Nonlinearity::exponential();
  const auto grid = hybrid_grid(1000.0);
  const double mu = common_mu_r(e, e, 1.0, grid);
  CHECK(mu == doctest::Approx(find_mu_r(e, 1.0, grid)));
  CHECK_FALSE(first_mu_r_violation(e, mu, 1.0, grid).has_value());
  CHECK(common_k(e, e, 0.5, 3) == doctest::Approx(2.25).epsilon(1e-6));
}

#include "gelfand/branch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gelfand/eigen.hpp"
#include "gelfand/error.hpp"

namespace gelfand {

namespace {

double sup_abs(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

double sup_of(std::span<const double> x) { return *std::max_element(x.begin(), x.end()); }

BranchPoint make_point(const ProblemSpec& spec, const ScalarProblem& prob, double lambda,
                       std::vector<double> x, int iters, bool eigenvalue) {
  std::vector<double> r(x.size());
  prob.residual(x, lambda, r);
  const double res = prob.scaled_residual(r, x);
  RadialField u = field_from_unknowns(spec.grid, x);
  const double eta = eigenvalue ? stability_eigenvalue(spec, lambda, u)
                                : std::numeric_limits<double>::quiet_NaN();
  const double top = u.sup();
  return BranchPoint{lambda, std::move(u), eta, top, 0.0, true, iters, res};
}

struct HomotopyResult {
  std::vector<double> x;
  bool reached = false;
  double last_lambda = 0.0;
  int steps = 0;
};

// Newton continuation in lambda from u = 0 with a tangent predictor.
HomotopyResult newton_homotopy(const ScalarProblem& prob, double target) {
  HomotopyResult out;
  out.x.assign(prob.size(), 0.0);
  double lam = 0.0;
  double dl = target / 8.0;
  std::vector<double> z(prob.size());
  NewtonOptions nopt;
  nopt.max_iters = 25;
  while (lam < target) {
    const double step = std::min(dl, target - lam);
    prob.dlambda(out.x, lam, z);
    for (double& v : z) v = -v;
    BandedLU(prob.jacobian(out.x, lam)).solve_in_place(z);
    std::vector<double> guess(out.x);
    for (std::size_t i = 0; i < guess.size(); ++i) guess[i] += step * z[i];
    try {
      if (!prob.in_domain(guess)) guess = out.x;
      NewtonResult nr = newton(prob, lam + step, std::move(guess), nopt);
      out.x = std::move(nr.x);
      lam += step;
      ++out.steps;
      dl = std::min(1.5 * dl, target / 4.0);
    } catch (const Error&) {
      dl *= 0.5;
      if (dl < 1e-10 * std::max(1.0, target)) break;
    }
  }
  out.last_lambda = lam;
  out.reached = lam >= target;
  return out;
}

}  // namespace

double default_cap(const Nonlinearity& nl) {
  return nl.class_tag() == NonlinearityClass::R ? 1e6 : 1.0 - 1e-9;
}

double first_eigenvalue(const OperatorMatrix& op) {
  return smallest_eigenvalue(op.matrix(), op.grid().weights()).value;
}

double stability_eigenvalue(const ProblemSpec& spec, double lambda, const RadialField& u) {
  ScalarProblem prob(spec);
  return smallest_eigenvalue(prob.jacobian(u.unknowns(), lambda), spec.grid.weights()).value;
}

MinimalOutcome minimal_solution(const ProblemSpec& spec, double lambda, const MonotoneOptions& opt) {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::RejectedInput, "lambda must be >= 0");
  ScalarProblem prob(spec);
  const OperatorMatrix& op = prob.op();
  const double cap = opt.cap > 0.0 ? opt.cap : default_cap(spec.nl);
  const bool class_s = spec.nl.class_tag() == NonlinearityClass::S;
  const std::size_t n = prob.size();

  std::vector<double> u(n, 0.0), next(n), inc(n), prev_inc(n, 0.0);
  int k = 0;
  bool converged = lambda == 0.0;
  for (; !converged && k < opt.max_iters; ++k) {
    for (std::size_t i = 0; i < n; ++i) next[i] = lambda * spec.nl.f(u[i]);
    op.solve_in_place(next);
    double top = -std::numeric_limits<double>::infinity();
    double step = 0.0;
    bool monotone = true;
    for (std::size_t i = 0; i < n; ++i) {
      inc[i] = next[i] - u[i];
      if (inc[i] < -1e-12 * (1.0 + std::abs(u[i]))) monotone = false;
      step = std::max(step, std::abs(inc[i]));
      top = std::max(top, next[i]);
    }
    if (!std::isfinite(top) || top > cap) {
      return DivergenceReport{lambda, k + 1, top, "sup norm passed the blow-up cap"};
    }
    if (!monotone) {
      if (spec.order == Order::FourthDirichlet) {
        HomotopyResult h = newton_homotopy(prob, lambda);
        if (!h.reached) {
          return DivergenceReport{lambda, h.steps, h.x.empty() ? 0.0 : sup_of(h.x),
                                  "Newton homotopy stalled at lambda = " + std::to_string(h.last_lambda)};
        }
        BranchPoint p = make_point(spec, prob, lambda, std::move(h.x), h.steps, opt.eigenvalue);
        if (class_s && p.sup_norm >= cap) {
          return DivergenceReport{lambda, h.steps, p.sup_norm, "class-S ceiling reached"};
        }
        return p;
      }
      throw Error(ErrorKind::InternalConsistency,
                  "monotone iteration decreased at step " + std::to_string(k + 1));
    }
    // Increments that stop shrinking everywhere certify lambda >= lambda* for
    // convex f and a positive inverse (Collatz-Wielandt on the linearization).
    if (k > 0 && step > 1e-9 * (1.0 + top)) {
      bool growing = true;
      for (std::size_t i = 0; i < n && growing; ++i) growing = inc[i] >= prev_inc[i];
      if (growing) {
        return DivergenceReport{lambda, k + 1, top, "increments stopped decreasing"};
      }
    }
    u.swap(next);
    prev_inc.swap(inc);
    if (step <= opt.tol * (1.0 + std::abs(top))) converged = true;
  }
  if (!converged) {
    return DivergenceReport{lambda, k, sup_of(u), "iteration budget exhausted"};
  }
  if (class_s && sup_of(u) >= cap) {
    return DivergenceReport{lambda, k, sup_of(u), "class-S ceiling reached"};
  }

  int newton_iters = 0;
  if (opt.polish && lambda > 0.0) {
    try {
      NewtonResult nr = newton(prob, lambda, u);
      double gap = 0.0;
      for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(nr.x[i] - u[i]));
      if (gap <= 1e-6 * (1.0 + sup_abs(u))) {
        u = std::move(nr.x);
        newton_iters = nr.iterations;
      }
    } catch (const Error&) {
      // keep the monotone limit
    }
  }
  BranchPoint p = make_point(spec, prob, lambda, std::move(u), newton_iters, opt.eigenvalue);
  return p;
}

double inverse_norm_inf(const OperatorMatrix& op) {
  const std::size_t n = op.size();
  std::vector<double> rows(n, 0.0), e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    op.solve_in_place(e);
    for (std::size_t i = 0; i < n; ++i) rows[i] += std::abs(e[i]);
  }
  return *std::max_element(rows.begin(), rows.end());
}

BranchPoint small_solution(const ProblemSpec& spec, double lambda) {
  if (spec.order != Order::FourthDirichlet) {
    throw Error(ErrorKind::RejectedInput, "small_solution is defined for the clamped problem");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorKind::RejectedInput, "lambda must be >= 0");
  ScalarProblem prob(spec);
  const std::size_t n = prob.size();
  if (lambda == 0.0) {
    return make_point(spec, prob, 0.0, std::vector<double>(n, 0.0), 0, true);
  }
  const double green = inverse_norm_inf(prob.op());
  const double radius = std::sqrt(lambda);
  if (!spec.nl.in_domain(radius)) {
    throw Error(ErrorKind::NoContraction, "ball of radius sqrt(lambda) leaves the domain");
  }
  const double rate = lambda * green * spec.nl.fprime(radius);
  if (!(rate < 1.0)) {
    throw Error(ErrorKind::NoContraction, "contraction rate estimate " + std::to_string(rate) + " >= 1");
  }
  if (!(radius * green * spec.nl.f(radius) <= 1.0)) {
    throw Error(ErrorKind::NoContraction, "map does not send the sqrt(lambda) ball into itself");
  }

  std::vector<double> u(n, 0.0), next(n);
  int k = 0;
  for (;; ++k) {
    if (k == 100000) throw Error(ErrorKind::NonConvergence, "Picard iteration budget exhausted");
    for (std::size_t i = 0; i < n; ++i) next[i] = lambda * spec.nl.f(u[i]);
    prob.op().solve_in_place(next);
    double step = 0.0;
    for (std::size_t i = 0; i < n; ++i) step = std::max(step, std::abs(next[i] - u[i]));
    u.swap(next);
    if (step <= 1e-15 * (1.0 + sup_abs(u))) break;
  }
  BranchPoint p = make_point(spec, prob, lambda, std::move(u), k + 1, true);
  if (!(p.u.sup_abs() <= radius)) {
    throw Error(ErrorKind::InternalConsistency, "small solution violates sup |u| <= sqrt(lambda)");
  }
  if (!(p.eta1 > 0.0)) {
    throw Error(ErrorKind::InternalConsistency, "small solution is not stable");
  }
  return p;
}

BranchPoint newton_solve(const ProblemSpec& spec, double lambda, const RadialField& guess,
                         const NewtonOptions& opt) {
  if (!guess.grid.same_as(spec.grid)) throw Error(ErrorKind::RejectedInput, "guess is on another grid");
  ScalarProblem prob(spec);
  std::vector<double> x(guess.unknowns().begin(), guess.unknowns().end());
  NewtonResult nr = newton(prob, lambda, std::move(x), opt);
  return make_point(spec, prob, lambda, std::move(nr.x), nr.iterations, true);
}

Branch continue_branch(const ProblemSpec& spec, double lambda_init, double ds, int n_steps,
                       ContinuationOptions opt) {
  Branch branch{spec, {}, std::nullopt, {}};
  if (n_steps < 0) throw Error(ErrorKind::RejectedInput, "n_steps must be >= 0");
  MinimalOutcome start = minimal_solution(spec, lambda_init);
  if (auto* d = std::get_if<DivergenceReport>(&start)) {
    throw Error(ErrorKind::RejectedInput,
                "no minimal solution at lambda_init = " + std::to_string(lambda_init) + ": " + d->reason);
  }
  const BranchPoint& p0 = std::get<BranchPoint>(start);
  ScalarProblem prob(spec);
  opt.ds = ds > 0.0 ? ds : lambda_init / 4.0;
  opt.n_steps = n_steps;
  if (opt.max_sup <= 0.0) opt.max_sup = resolved_sup(spec.grid, spec.order == Order::Second ? 2 : 4);
  if (spec.nl.class_tag() == NonlinearityClass::S) opt.max_sup = std::min(opt.max_sup, 1.0 - 1e-6);

  std::vector<double> x0(p0.u.unknowns().begin(), p0.u.unknowns().end());
  ContinuationResult run = continue_from(prob, std::move(x0), lambda_init, opt);
  branch.diagnostics = std::move(run.diagnostics);
  branch.points.reserve(run.points.size());
  for (auto& cp : run.points) {
    RadialField u = field_from_unknowns(spec.grid, cp.x);
    double eta = std::numeric_limits<double>::quiet_NaN();
    try {
      eta = smallest_eigenvalue(prob.jacobian(cp.x, cp.lambda), spec.grid.weights()).value;
    } catch (const Error& e) {
      branch.diagnostics.push_back(std::string("eigenvalue: ") + e.what());
    }
    const double top = u.sup();
    branch.points.push_back(
        BranchPoint{cp.lambda, std::move(u), eta, top, cp.arclength, true, cp.newton_iters, cp.residual});
  }
  if (run.fold) {
    branch.fold = FoldEstimate{branch.points[*run.fold].lambda, *run.fold};
  } else {
    branch.diagnostics.push_back("no fold found");
  }
  return branch;
}

ExtremalSolution extremal_solution(const Branch& branch) {
  if (!branch.fold) throw Error(ErrorKind::Unavailable, "branch has no fold");
  const std::size_t f = branch.fold->index;
  const BranchPoint& star = branch.points[f];
  const std::size_t n = star.u.values.size();
  std::vector<double> envelope(n, -std::numeric_limits<double>::infinity());
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= f; ++k) {
    const auto& v = branch.points[k].u.values;
    for (std::size_t i = 0; i < n; ++i) envelope[i] = std::max(envelope[i], v[i]);
    if (k > 0) {
      const auto& w = branch.points[k - 1].u.values;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, w[i] - v[i]);
    }
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(envelope[i] - star.u.values[i]));
  return ExtremalSolution{star, gap, f == 0 ? 0.0 : worst};
}

double lambda_star_bisection(const ProblemSpec& spec, double lo, double hi, double rel_tol) {
  MonotoneOptions opt;
  opt.polish = false;
  opt.eigenvalue = false;
  opt.tol = 1e-11;
  auto converges = [&](double lam) {
    return std::holds_alternative<BranchPoint>(minimal_solution(spec, lam, opt));
  };
  if (!converges(lo)) throw Error(ErrorKind::RejectedInput, "lower bracket does not converge");
  int grow = 0;
  while (converges(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 40) throw Error(ErrorKind::SearchFailure, "no divergent upper bracket found");
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (converges(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LambdaStarEstimate lambda_star_crosscheck(const ProblemSpec& spec, const Branch& branch) {
  if (!branch.fold) throw Error(ErrorKind::Unavailable, "branch has no fold");
  LambdaStarEstimate est;
  est.from_fold = branch.fold->lambda_star;
  est.from_bisection = lambda_star_bisection(spec, 0.9 * est.from_fold, 1.1 * est.from_fold);
  est.discrepancy = std::abs(est.from_bisection - est.from_fold) / est.from_fold;
  if (est.discrepancy > 0.02) {
    est.diagnostics.push_back("fold and bisection estimates differ by " +
                              std::to_string(100.0 * est.discrepancy) + "%");
  }
  return est;
}

double RadialPolynomial::operator()(double r) const {
  const double s = r * r;
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double RadialPolynomial::derivative(double r) const {
  double acc = 0.0;
  for (std::size_t k = 1; k < c_.size(); ++k) acc += 2.0 * static_cast<double>(k) * c_[k] * std::pow(r, 2.0 * k - 1.0);
  return acc;
}

RadialPolynomial RadialPolynomial::laplacian(int dim) const {
  if (c_.size() <= 1) return RadialPolynomial({0.0});
  std::vector<double> out(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) {
    const double kk = static_cast<double>(k);
    out[k - 1] = 2.0 * kk * (2.0 * kk + dim - 2.0) * c_[k];
  }
  return RadialPolynomial(std::move(out));
}

RadialPolynomial RadialPolynomial::operator*(const RadialPolynomial& o) const {
  if (c_.empty() || o.c_.empty()) return {};
  std::vector<double> out(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) {
    for (std::size_t j = 0; j < o.c_.size(); ++j) out[i + j] += c_[i] * o.c_[j];
  }
  return RadialPolynomial(std::move(out));
}

RadialPolynomial RadialPolynomial::operator+(const RadialPolynomial& o) const {
  std::vector<double> out(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) out[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) out[i] += o.c_[i];
  return RadialPolynomial(std::move(out));
}

RadialPolynomial RadialPolynomial::scaled(double a) const {
  std::vector<double> out(c_);
  for (double& v : out) v *= a;
  return RadialPolynomial(std::move(out));
}

RadialField RadialPolynomial::sample(const RadialGrid& g) const {
  return RadialField::sample(g, [this](double r) { return (*this)(r); });
}

std::vector<TestFunction> test_bank(int dim, BoundaryCondition bc) {
  const RadialPolynomial one_minus({1.0, -1.0});
  const RadialPolynomial bump = one_minus * one_minus;
  std::vector<TestFunction> bank;
  for (int j = 0; j < 5; ++j) {
    std::vector<double> mono(static_cast<std::size_t>(j) + 1, 0.0);
    mono.back() = 1.0;
    const RadialPolynomial rj(mono);
    const std::string tag = "j=" + std::to_string(j);
    switch (bc) {
      case BoundaryCondition::Dirichlet2:
        bank.push_back({"(1-r^2) r^2j, " + tag, one_minus * rj});
        break;
      case BoundaryCondition::Navier: {
        const RadialPolynomial psi = one_minus * rj;
        // Delta (1-r^2)^2 = 8 at r = 1, so this cancels Delta psi there.
        const double alpha = -psi.laplacian(dim)(1.0) / 8.0;
        bank.push_back({"(1-r^2) r^2j + a (1-r^2)^2, " + tag, psi + bump.scaled(alpha)});
        break;
      }
      case BoundaryCondition::Dirichlet4:
        bank.push_back({"(1-r^2)^2 r^2j, " + tag, bump * rj});
        break;
    }
  }
  return bank;
}

void check_boundary(const TestFunction& t, int dim, BoundaryCondition bc) {
  const double scale = 1.0 + std::abs(t.phi(0.0));
  auto fail = [&](const char* what, double v) {
    throw Error(ErrorKind::RejectedInput,
                "test function '" + t.name + "' violates " + what + " (" + std::to_string(v) + ")");
  };
  const double v = t.phi(1.0);
  if (std::abs(v) > 1e-12 * scale) fail("phi(1) = 0", v);
  if (bc == BoundaryCondition::Navier) {
    const double lap = t.phi.laplacian(dim)(1.0);
    if (std::abs(lap) > 1e-12 * scale) fail("Delta phi(1) = 0", lap);
  }
  if (bc == BoundaryCondition::Dirichlet4) {
    const double d = t.phi.derivative(1.0);
    if (std::abs(d) > 1e-12 * scale) fail("phi'(1) = 0", d);
  }
}

std::vector<double> weak_residual(const ProblemSpec& spec, const BranchPoint& point,
                                  const std::vector<TestFunction>& bank) {
  const RadialGrid& g = spec.grid;
  const int n = spec.dim();
  std::vector<double> out;
  out.reserve(bank.size());
  for (const auto& t : bank) {
    check_boundary(t, n, spec.bc());
    const RadialPolynomial lphi = spec.order == Order::Second
                                      ? t.phi.laplacian(n).scaled(-1.0)
                                      : t.phi.laplacian(n).laplacian(n);
    const RadialField a = lphi.sample(g);
    const RadialField phi = t.phi.sample(g);
    std::vector<double> integrand(g.nodes());
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      integrand[i] = point.u.values[i] * a.values[i] - point.lambda * spec.nl.f(point.u.values[i]) * phi.values[i];
    }
    out.push_back(std::abs(integrate(g, integrand)));
  }
  return out;
}

}  // namespace gelfand

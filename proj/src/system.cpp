#include "gelfand/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gelfand/error.hpp"
#include "gelfand/parallel.hpp"

namespace gelfand {

namespace {

double sup_abs(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

double cap_for(const SystemSpec& spec) {
  return std::min(default_cap(spec.f), default_cap(spec.g));
}

SystemPoint make_point(const SystemProblem& prob, double lambda, double gamma, double t,
                       const std::vector<double>& x, int iters) {
  std::vector<double> r(x.size());
  prob.residual(x, t, r);
  auto [u, v] = prob.split(x);
  const double sigma = lambda > 0.0 ? gamma / lambda : 0.0;
  return SystemPoint{lambda, gamma, sigma, std::move(u), std::move(v), true, iters,
                     prob.scaled_residual(r, x), 0.0};
}

}  // namespace

SystemSpec make_system(int dim, const Nonlinearity& f, const Nonlinearity& g, std::size_t interior) {
  return SystemSpec{f, g, RadialGrid(dim, interior)};
}

SystemProblem::SystemProblem(SystemSpec spec, double a, double b)
    : spec_(std::move(spec)), op_(laplacian(spec_.grid)), a_(a), b_(b) {}

void SystemProblem::residual(std::span<const double> x, double t, std::span<double> out) const {
  const std::size_t n = op_.size();
  const BandedMatrix& l = op_.matrix();
  for (std::size_t i = 0; i < n; ++i) {
    double lu = 0.0;
    double lv = 0.0;
    const std::size_t j0 = i > 0 ? i - 1 : 0;
    const std::size_t j1 = std::min(n - 1, i + 1);
    for (std::size_t j = j0; j <= j1; ++j) {
      lu += l.at(i, j) * x[2 * j];
      lv += l.at(i, j) * x[2 * j + 1];
    }
    out[2 * i] = lu - a_ * t * spec_.f.f(x[2 * i + 1]);
    out[2 * i + 1] = lv - b_ * t * spec_.g.f(x[2 * i]);
  }
}

BandedMatrix SystemProblem::jacobian(std::span<const double> x, double t) const {
  const std::size_t n = op_.size();
  const BandedMatrix& l = op_.matrix();
  BandedMatrix j(2 * n, 2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k0 = i > 0 ? i - 1 : 0;
    const std::size_t k1 = std::min(n - 1, i + 1);
    for (std::size_t k = k0; k <= k1; ++k) {
      j.ref(2 * i, 2 * k) = l.at(i, k);
      j.ref(2 * i + 1, 2 * k + 1) = l.at(i, k);
    }
    j.ref(2 * i, 2 * i + 1) = -a_ * t * spec_.f.fprime(x[2 * i + 1]);
    j.ref(2 * i + 1, 2 * i) = -b_ * t * spec_.g.fprime(x[2 * i]);
  }
  return j;
}

void SystemProblem::dlambda(std::span<const double> x, double, std::span<double> out) const {
  for (std::size_t i = 0; i < op_.size(); ++i) {
    out[2 * i] = -a_ * spec_.f.f(x[2 * i + 1]);
    out[2 * i + 1] = -b_ * spec_.g.f(x[2 * i]);
  }
}

double SystemProblem::dot(std::span<const double> p, std::span<const double> q) const {
  const auto w = spec_.grid.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < op_.size(); ++i) {
    acc += w[i] * (p[2 * i] * q[2 * i] + p[2 * i + 1] * q[2 * i + 1]);
  }
  return acc;
}

bool SystemProblem::in_domain(std::span<const double> x) const {
  for (std::size_t i = 0; i < op_.size(); ++i) {
    if (!std::isfinite(x[2 * i]) || !std::isfinite(x[2 * i + 1])) return false;
    if (!spec_.g.in_domain(x[2 * i]) || !spec_.f.in_domain(x[2 * i + 1])) return false;
  }
  return true;
}

double SystemProblem::residual_scale() const { return spec_.grid.h() * spec_.grid.h(); }

std::vector<double> SystemProblem::interleave(const RadialField& u, const RadialField& v) const {
  std::vector<double> x(size());
  for (std::size_t i = 0; i < op_.size(); ++i) {
    x[2 * i] = u.values[i];
    x[2 * i + 1] = v.values[i];
  }
  return x;
}

std::pair<RadialField, RadialField> SystemProblem::split(std::span<const double> x) const {
  RadialField u(spec_.grid), v(spec_.grid);
  for (std::size_t i = 0; i < op_.size(); ++i) {
    u.values[i] = x[2 * i];
    v.values[i] = x[2 * i + 1];
  }
  return {std::move(u), std::move(v)};
}

SystemOutcome system_minimal(const SystemSpec& spec, double lambda, double gamma,
                             const MonotoneOptions& opt) {
  if (!(lambda >= 0.0) || !(gamma >= 0.0)) {
    throw Error(ErrorKind::RejectedInput, "lambda and gamma must be >= 0");
  }
  const OperatorMatrix op = laplacian(spec.grid);
  const std::size_t n = op.size();
  const double cap = opt.cap > 0.0 ? opt.cap : cap_for(spec);
  std::vector<double> u(n, 0.0), v(n, 0.0), un(n), vn(n), inc(2 * n), prev(2 * n, 0.0);
  int k = 0;
  bool converged = lambda == 0.0 && gamma == 0.0;
  for (; !converged && k < opt.max_iters; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      un[i] = lambda * spec.f.f(v[i]);
      vn[i] = gamma * spec.g.f(u[i]);
    }
    op.solve_in_place(un);
    op.solve_in_place(vn);
    double top = -std::numeric_limits<double>::infinity();
    double step = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inc[2 * i] = un[i] - u[i];
      inc[2 * i + 1] = vn[i] - v[i];
      const bool down = inc[2 * i] < -1e-12 * (1.0 + std::abs(u[i])) ||
                        inc[2 * i + 1] < -1e-12 * (1.0 + std::abs(v[i]));
      if (down) {
        throw Error(ErrorKind::InternalConsistency,
                    "coupled monotone iteration decreased at step " + std::to_string(k + 1));
      }
      step = std::max({step, std::abs(inc[2 * i]), std::abs(inc[2 * i + 1])});
      top = std::max({top, un[i], vn[i]});
    }
    if (!std::isfinite(top) || top > cap) {
      return DivergenceReport{lambda, k + 1, top, "sup norm passed the blow-up cap"};
    }
    if (k > 0 && step > 1e-9 * (1.0 + top)) {
      bool growing = true;
      for (std::size_t i = 0; i < 2 * n && growing; ++i) growing = inc[i] >= prev[i];
      if (growing) return DivergenceReport{lambda, k + 1, top, "increments stopped decreasing"};
    }
    u.swap(un);
    v.swap(vn);
    prev.swap(inc);
    if (step <= opt.tol * (1.0 + std::abs(top))) converged = true;
  }
  if (!converged) {
    return DivergenceReport{lambda, k, std::max(sup_abs(u), sup_abs(v)), "iteration budget exhausted"};
  }

  SystemProblem prob(spec, lambda, gamma);
  std::vector<double> x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[2 * i] = u[i];
    x[2 * i + 1] = v[i];
  }
  int iters = 0;
  if (opt.polish && (lambda > 0.0 || gamma > 0.0)) {
    try {
      NewtonResult nr = newton(prob, 1.0, x);
      double gap = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) gap = std::max(gap, std::abs(nr.x[i] - x[i]));
      if (gap <= 1e-6 * (1.0 + sup_abs(x))) {
        x = std::move(nr.x);
        iters = nr.iterations;
      }
    } catch (const Error&) {
      // keep the monotone limit
    }
  }
  return make_point(prob, lambda, gamma, 1.0, x, iters);
}

SystemPoint system_newton(const SystemSpec& spec, double lambda, double gamma, const RadialField& u,
                          const RadialField& v, const NewtonOptions& opt) {
  SystemProblem prob(spec, lambda, gamma);
  NewtonResult nr = newton(prob, 1.0, prob.interleave(u, v), opt);
  return make_point(prob, lambda, gamma, 1.0, nr.x, nr.iterations);
}

Ray trace_ray(const SystemSpec& spec, double sigma, double lambda_init, double ds, int n_steps,
              ContinuationOptions opt) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::RejectedInput, "sigma must be > 0");
  Ray ray;
  ray.sigma = sigma;
  SystemOutcome start = system_minimal(spec, lambda_init, sigma * lambda_init);
  if (auto* d = std::get_if<DivergenceReport>(&start)) {
    throw Error(ErrorKind::RejectedInput, "no minimal pair at lambda_init: " + d->reason);
  }
  const SystemPoint& p0 = std::get<SystemPoint>(start);
  SystemProblem prob(spec, 1.0, sigma);
  opt.ds = ds > 0.0 ? ds : lambda_init / 4.0;
  opt.n_steps = n_steps;
  if (opt.max_sup <= 0.0) opt.max_sup = resolved_sup(spec.grid, 2);
  if (spec.f.class_tag() == NonlinearityClass::S || spec.g.class_tag() == NonlinearityClass::S) {
    opt.max_sup = std::min(opt.max_sup, 1.0 - 1e-6);
  }
  ContinuationResult run = continue_from(prob, prob.interleave(p0.u, p0.v), lambda_init, opt);
  ray.diagnostics = std::move(run.diagnostics);
  for (const auto& cp : run.points) {
    SystemPoint p = make_point(prob, cp.lambda, sigma * cp.lambda, cp.lambda, cp.x, cp.newton_iters);
    p.arclength = cp.arclength;
    ray.points.push_back(std::move(p));
  }
  if (run.fold) {
    ray.fold = *run.fold;
    ray.lambda_star = ray.points[*run.fold].lambda;
  } else {
    ray.diagnostics.push_back("no fold found on the ray sigma = " + std::to_string(sigma));
  }
  return ray;
}

UpsilonCurve upsilon_curve(const SystemSpec& spec, const std::vector<double>& sigma_grid, int n_steps,
                           double probe_offset) {
  UpsilonCurve curve;
  curve.entries.resize(sigma_grid.size());
  kernels::parallel_tasks(sigma_grid.size(), [&](std::size_t k) {
    UpsilonEntry& e = curve.entries[k];
    e.sigma = sigma_grid[k];
    try {
      // Start well inside the region: the ray's lambda* is at most that of its slower component.
      const double lambda_init = 0.05 / std::max(1.0, e.sigma);
      Ray ray = trace_ray(spec, e.sigma, lambda_init, 0.0, n_steps);
      if (ray.fold) {
        e.traced = true;
        e.lambda_star = ray.lambda_star;
        e.gamma_star = e.sigma * ray.lambda_star;
      } else {
        e.diagnostic = "no fold";
      }
    } catch (const Error& err) {
      e.diagnostic = err.what();
    }
  });

  MonotoneOptions probe;
  probe.polish = false;
  probe.eigenvalue = false;
  std::vector<std::pair<std::size_t, bool>> checks;
  for (std::size_t k = 0; k < curve.entries.size(); ++k) {
    if (!curve.entries[k].traced) {
      curve.diagnostics.push_back("ray sigma = " + std::to_string(curve.entries[k].sigma) + ": " +
                                  curve.entries[k].diagnostic);
      continue;
    }
    checks.emplace_back(k, true);
    checks.emplace_back(k, false);
  }
  std::vector<char> ok(checks.size(), 0);
  kernels::parallel_tasks(checks.size(), [&](std::size_t c) {
    const auto& e = curve.entries[checks[c].first];
    const bool below = checks[c].second;
    const double scale = below ? 1.0 - probe_offset : 1.0 + probe_offset;
    const bool converged =
        std::holds_alternative<SystemPoint>(system_minimal(spec, scale * e.lambda_star, scale * e.gamma_star, probe));
    ok[c] = converged == below;
  });
  curve.probes = checks.size();
  for (std::size_t c = 0; c < checks.size(); ++c) {
    if (!ok[c]) {
      ++curve.inconsistent;
      curve.diagnostics.push_back(std::string("probe ") + (checks[c].second ? "below" : "above") +
                                  " the fold of sigma = " +
                                  std::to_string(curve.entries[checks[c].first].sigma) + " disagrees");
    }
  }
  return curve;
}

OrderingReport pointwise_orderings(const SystemSpec& spec, const SystemPoint& second,
                                   const SystemPoint& minimal, double tol) {
  if (spec.f.kind() != NonlinearityKind::Exp || spec.g.kind() != NonlinearityKind::Exp) {
    throw Error(ErrorKind::RejectedInput, "orderings are stated for the exponential pair");
  }
  if (second.lambda != minimal.lambda || second.gamma != minimal.gamma) {
    throw Error(ErrorKind::RejectedInput, "the two solutions have different parameters");
  }
  const double sigma = second.lambda > 0.0 ? second.gamma / second.lambda : 0.0;
  if (second.lambda > 0.0 && !(sigma > 0.0 && sigma <= 1.0)) {
    throw Error(ErrorKind::RejectedInput, "orderings need 0 < sigma <= 1");
  }
  OrderingReport rep;
  rep.max_violation.fill(-std::numeric_limits<double>::infinity());
  const std::size_t n = spec.grid.nodes();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = second.u.values[i];
    const double v = second.v.values[i];
    const double uo = u - minimal.u.values[i];
    const double vo = v - minimal.v.values[i];
    rep.max_violation[0] = std::max(rep.max_violation[0], v - u);
    rep.max_violation[1] = std::max(rep.max_violation[1], sigma * u - v);
    rep.max_violation[2] = std::max(rep.max_violation[2], sigma * uo - vo);
    rep.max_violation[3] = std::max(rep.max_violation[3], vo - uo);
  }
  for (std::size_t k = 0; k < 4; ++k) rep.holds[k] = rep.max_violation[k] <= tol;
  return rep;
}

DifferenceResidual difference_residual(double lambda, double gamma, const RadialField& u_min,
                                       const RadialField& v_min, const RadialField& u_o,
                                       const RadialField& v_o) {
  const OperatorMatrix op = laplacian(u_o.grid);
  DifferenceResidual out{op.apply(u_o), op.apply(v_o)};
  for (std::size_t i = 0; i < u_o.grid.unknowns(); ++i) {
    out.u.values[i] -= lambda * std::exp(v_min.values[i]) * std::expm1(v_o.values[i]);
    out.v.values[i] -= gamma * std::exp(u_min.values[i]) * std::expm1(u_o.values[i]);
  }
  return out;
}

DifferenceResidual difference_residual(const SystemSpec& spec, const SystemPoint& second,
                                       const SystemPoint& minimal) {
  if (second.lambda != minimal.lambda || second.gamma != minimal.gamma) {
    throw Error(ErrorKind::RejectedInput, "the two solutions have different parameters");
  }
  RadialField uo(spec.grid), vo(spec.grid);
  for (std::size_t i = 0; i < spec.grid.nodes(); ++i) {
    uo.values[i] = second.u.values[i] - minimal.u.values[i];
    vo.values[i] = second.v.values[i] - minimal.v.values[i];
  }
  return difference_residual(second.lambda, second.gamma, minimal.u, minimal.v, uo, vo);
}

std::vector<double> system_weak_residual(const SystemSpec& spec, const SystemPoint& point,
                                         const std::vector<TestFunction>& bank) {
  const RadialGrid& g = spec.grid;
  std::vector<double> out;
  for (const auto& t : bank) {
    check_boundary(t, g.dim(), BoundaryCondition::Dirichlet2);
    const RadialField a = t.phi.laplacian(g.dim()).scaled(-1.0).sample(g);
    const RadialField phi = t.phi.sample(g);
    std::vector<double> ru(g.nodes()), rv(g.nodes());
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      ru[i] = a.values[i] * point.u.values[i] - point.lambda * phi.values[i] * spec.f.f(point.v.values[i]);
      rv[i] = a.values[i] * point.v.values[i] - point.gamma * phi.values[i] * spec.g.f(point.u.values[i]);
    }
    out.push_back(std::max(std::abs(integrate(g, ru)), std::abs(integrate(g, rv))));
  }
  return out;
}

std::vector<SolutionPair> upper_branch_pairs(const SystemSpec& spec, const Ray& ray, std::size_t max_pairs,
                                             double max_sup) {
  std::vector<SolutionPair> pairs;
  if (!ray.fold) return pairs;
  if (max_sup <= 0.0) max_sup = resolved_sup(spec.grid, 2);
  MonotoneOptions opt;
  opt.eigenvalue = false;
  for (std::size_t k = *ray.fold + 1; k < ray.points.size(); ++k) {
    if (max_pairs > 0 && pairs.size() == max_pairs) break;
    const SystemPoint& s = ray.points[k];
    if (!(s.lambda > 0.0) || std::max(s.u.sup(), s.v.sup()) > max_sup) break;
    SystemOutcome m = system_minimal(spec, s.lambda, s.gamma, opt);
    if (auto* p = std::get_if<SystemPoint>(&m)) pairs.push_back({s, std::move(*p)});
  }
  return pairs;
}

OrderingThreshold ordering_threshold(const SystemSpec& spec, const Ray& ray, double tol) {
  OrderingThreshold out;
  const auto pairs = upper_branch_pairs(spec, ray);
  out.pairs = pairs.size();
  if (pairs.empty()) return out;
  std::vector<bool> iv(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    iv[k] = pointwise_orderings(spec, pairs[k].second, pairs[k].minimal, tol).holds[3];
  }
  double lambda1 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (iv[k]) continue;
    out.iv_fails_somewhere = true;
    lambda1 = std::min(lambda1, pairs[k].second.lambda);
    // Refine toward a holding neighbour by bisection in lambda, Newton-solving
    // for the upper solution from the interpolated pair.
    for (std::size_t nb : {k - 1, k + 1}) {
      if (nb >= pairs.size() || !iv[nb]) continue;
      const SystemPoint* bad = &pairs[k].second;
      const SystemPoint* good = &pairs[nb].second;
      double lb = bad->lambda;
      double lg = good->lambda;
      for (int it = 0; it < 30 && std::abs(lb - lg) > 1e-8 * lb; ++it) {
        const double mid = 0.5 * (lb + lg);
        const double w = (mid - good->lambda) / (bad->lambda - good->lambda);
        RadialField u(spec.grid), v(spec.grid);
        for (std::size_t i = 0; i < spec.grid.nodes(); ++i) {
          u.values[i] = (1.0 - w) * good->u.values[i] + w * bad->u.values[i];
          v.values[i] = (1.0 - w) * good->v.values[i] + w * bad->v.values[i];
        }
        try {
          const double gamma = ray.sigma * mid;
          SystemPoint s = system_newton(spec, mid, gamma, u, v);
          MonotoneOptions opt;
          opt.eigenvalue = false;
          SystemOutcome m = system_minimal(spec, mid, gamma, opt);
          const auto* mp = std::get_if<SystemPoint>(&m);
          if (!mp) break;
          if (pointwise_orderings(spec, s, *mp, tol).holds[3]) {
            lg = mid;
          } else {
            lb = mid;
          }
        } catch (const Error&) {
          break;
        }
      }
      lambda1 = std::min(lambda1, lb);
    }
  }
  if (!out.iv_fails_somewhere) {
    lambda1 = 0.0;
    for (const auto& p : pairs) lambda1 = std::max(lambda1, p.second.lambda);
  }
  out.lambda1 = lambda1;
  return out;
}

}  // namespace gelfand

#include "gelfand/identity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gelfand/error.hpp"
#include "gelfand/parallel.hpp"

namespace gelfand {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Informational: return "informational";
  }
  return "?";
}

IdentityReport make_report(std::string name, bool inequality, double lhs, double rhs, double h,
                           double c) {
  IdentityReport r;
  r.name = std::move(name);
  r.inequality = inequality;
  r.lhs = lhs;
  r.rhs = rhs;
  r.residual = lhs - rhs;
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  r.relative = r.residual / scale;
  r.grid_h = h;
  r.tolerance = c * h * h * scale;
  const bool ok = inequality ? r.residual <= r.tolerance : std::abs(r.residual) <= r.tolerance;
  r.verdict = std::isfinite(r.residual) && ok ? Verdict::Pass : Verdict::Fail;
  return r;
}

namespace {

RadialField times_r(const RadialField& w) {
  RadialField out(w.grid);
  for (std::size_t i = 0; i < w.values.size(); ++i) out.values[i] = w.grid.r(i) * w.values[i];
  return out;
}

template <class Fn>
double integrate_nodes(const RadialGrid& g, Fn&& fn) {
  RadialField w(g);
  for (std::size_t i = 0; i < g.nodes(); ++i) w.values[i] = fn(i);
  return integrate(w);
}

// (Delta v)'(1) = v''' + (N-1)(v'' - v') at r = 1, each from a second-order
// one-sided stencil on v. Differencing a computed Delta v field instead would
// lose an order.
double boundary_laplacian_slope(const RadialField& v) {
  const auto& x = v.values;
  const std::size_t l = x.size() - 1;
  const double h = v.grid.h();
  const double d3 = (5.0 * x[l] - 18.0 * x[l - 1] + 24.0 * x[l - 2] - 14.0 * x[l - 3] + 3.0 * x[l - 4]) /
                    (2.0 * h * h * h);
  const double d2 = (2.0 * x[l] - 5.0 * x[l - 1] + 4.0 * x[l - 2] - x[l - 3]) / (h * h);
  return d3 + (v.grid.dim() - 1) * (d2 - boundary_derivative(v));
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
  if (!a.same_as(b)) throw Error(ErrorKind::RejectedInput, "fields live on different grids");
}

void require_same_lambda(double a, double b) {
  if (std::abs(a - b) > 1e-10 * (1.0 + std::abs(a))) {
    throw Error(ErrorKind::RejectedInput, "the two solutions are at different parameters (" +
                                              std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

std::vector<IdentityReport> pohozaev_fields(BoundaryCondition bc, const RadialField& v,
                                            const RadialField& bilap_v) {
  if (bc == BoundaryCondition::Dirichlet2) {
    throw Error(ErrorKind::RejectedInput, "the fourth-order identity needs Navier or clamped data");
  }
  require_same_grid(v.grid, bilap_v.grid);
  const RadialGrid& g = v.grid;
  const double n = g.dim();
  const double omega = g.surface_measure();

  const RadialField rv = times_r(radial_derivative(v));
  const RadialField lap = laplacian_field(v);
  const double work = integrate_nodes(g, [&](std::size_t i) { return -rv.values[i] * bilap_v.values[i]; });
  const double energy = integrate_nodes(g, [&](std::size_t i) { return lap.values[i] * lap.values[i]; });

  double boundary = 0.0;
  if (bc == BoundaryCondition::Navier) {
    boundary = -omega * boundary_derivative(v) * boundary_laplacian_slope(v);
  } else {
    const double edge = lap.values.back();
    boundary = 0.5 * omega * edge * edge;
  }
  const double bulk = 0.5 * (n - 4.0) * energy;
  return {
      make_report("pohozaev-equality", false, work, bulk + boundary, g.h(), kPohozaevTolC),
      make_report("pohozaev-inequality", true, bulk, work, g.h(), kPohozaevTolC),
  };
}

std::vector<IdentityReport> pohozaev_fourth(const ProblemSpec& spec, const BranchPoint& point,
                                            const BranchPoint& minimal) {
  if (spec.order == Order::Second) {
    throw Error(ErrorKind::RejectedInput, "pohozaev_fourth needs a fourth-order problem");
  }
  require_same_grid(spec.grid, point.u.grid);
  require_same_grid(spec.grid, minimal.u.grid);
  require_same_lambda(point.lambda, minimal.lambda);
  const double lambda = point.lambda;
  RadialField v(spec.grid), d(spec.grid);
  for (std::size_t i = 0; i < spec.grid.nodes(); ++i) {
    const double u = point.u.values[i];
    const double um = minimal.u.values[i];
    v.values[i] = u - um;
    d.values[i] = lambda * (spec.nl.f(u) - spec.nl.f(um));
  }
  return pohozaev_fields(spec.bc(), v, d);
}

std::vector<IdentityReport> manufactured_pohozaev(int dim, BoundaryCondition bc,
                                                  std::size_t interior) {
  const RadialGrid g(dim, interior);
  const double n = dim;
  const RadialPolynomial v = bc == BoundaryCondition::Navier
                                 ? RadialPolynomial({(n + 4.0) / n, -2.0 * (n + 2.0) / n, 1.0})
                                 : RadialPolynomial({1.0, -2.0, 1.0});
  return pohozaev_fields(bc, v.sample(g), v.laplacian(dim).laplacian(dim).sample(g));
}

TScanResult t_scan(const ProblemSpec& spec, const BranchPoint& minimal, const TScanOptions& opt) {
  if (spec.order == Order::Second) throw Error(ErrorKind::RejectedInput, "T scan is for fourth-order problems");
  if (spec.dim() < 5) throw Error(ErrorKind::RejectedInput, "T scan needs N >= 5");
  if (!(opt.sigma_conv > 0.0 && opt.sigma_conv < 1.0)) {
    throw Error(ErrorKind::RejectedInput, "sigma_conv must lie in (0, 1)");
  }
  if (!(opt.t_hi > opt.t_lo) || opt.t_samples < 2) {
    throw Error(ErrorKind::RejectedInput, "t range must be increasing with at least two samples");
  }
  require_same_grid(spec.grid, minimal.u.grid);
  const RadialGrid& g = spec.grid;
  const Nonlinearity& f = spec.nl;
  const double n = spec.dim();
  const double lambda = minimal.lambda;
  if (!(lambda > 0.0)) throw Error(ErrorKind::RejectedInput, "T scan needs lambda > 0");

  TScanResult out;
  const double coercive = 0.5 * (n - 4.0) * (1.0 - opt.sigma_conv);
  out.c_sigma = opt.c_sigma ? *opt.c_sigma : coercive * first_eigenvalue(make_operator(g, spec.bc()));
  if (!(out.c_sigma > 0.0)) throw Error(ErrorKind::RejectedInput, "C_sigma must be positive");

  const std::vector<double>& u = minimal.u.values;
  const RadialField ru = times_r(radial_derivative(minimal.u));
  for (double x : ru.values) out.epsilon = std::max(out.epsilon, std::abs(x));

  double t_hi = opt.t_hi;
  std::vector<std::string> warnings;
  if (f.class_tag() == NonlinearityClass::S) {
    const double ceiling = 1.0 - minimal.u.sup() - 1e-6;
    if (t_hi > ceiling) {
      warnings.push_back("t range clipped from " + std::to_string(t_hi) + " to " +
                         std::to_string(ceiling) + " below the pole");
      t_hi = ceiling;
    }
    if (!(t_hi > opt.t_lo)) throw Error(ErrorKind::RejectedInput, "t range lies beyond the pole");
  }
  const std::size_t nt = opt.t_samples;
  std::vector<double> t(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    t[j] = opt.t_lo + (t_hi - opt.t_lo) * static_cast<double>(j) / static_cast<double>(nt - 1);
  }

  const double a = 0.5 * (n - 4.0) * opt.sigma_conv;
  const double b = out.c_sigma / lambda;
  // Shared part of T and S, and the convexity remainder that multiplies the last term.
  auto parts = [&](std::size_t i, std::size_t j, double& common, double& rem) {
    const double ui = u[i];
    const double tj = t[j];
    const double fu = f.f(ui);
    const double fut = f.f(ui + tj);
    rem = fut - fu - f.fprime(ui) * tj;
    common = a * (fut - fu) * tj + b * tj * tj -
             n * (f.antiderivative(ui + tj) - f.antiderivative(ui) - fu * tj);
  };
  auto t_val = [&](std::size_t i, std::size_t j) {
    double c = 0.0, rem = 0.0;
    parts(i, j, c, rem);
    return c - ru.values[i] * rem;
  };
  auto s_val = [&](std::size_t i, std::size_t j) {
    double c = 0.0, rem = 0.0;
    parts(i, j, c, rem);
    return c - out.epsilon * rem;
  };
  auto skip = [&](std::size_t, std::size_t j) { return t[j] == 0.0; };
  const std::size_t ni = g.nodes();
  const auto tmin = kernels::grid_min(ni, nt, t_val, skip);
  const auto smin = kernels::grid_min(ni, nt, s_val, skip);
  const auto gap = kernels::grid_min(
      ni, nt, [&](std::size_t i, std::size_t j) { return t_val(i, j) - s_val(i, j); }, skip);

  std::size_t violations = 0;
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      if (skip(i, j)) continue;
      const double tv = t_val(i, j);
      const double sv = s_val(i, j);
      if (tv < sv - 1e-12 * (1.0 + std::abs(sv))) ++violations;
    }
  }
  out.domination_gap = gap.value;
  out.domination_violations = violations;

  auto fill = [&](ScanReport& r, const char* name, const kernels::GridMin& m) {
    r.name = name;
    r.min_value = m.value;
    r.argmin_x = g.r(m.i);
    r.argmin_t = t[m.j];
    r.samples = m.count;
    r.x_axis = {"r", 0.0, 1.0, ni};
    r.t_axis = {"t", opt.t_lo, t_hi, nt};
    r.warnings = warnings;
  };
  fill(out.t, "T", tmin);
  fill(out.s, "S", smin);
  return out;
}

ScanThreshold t_scan_threshold(const ProblemSpec& spec, const TScanOptions& opt, double lo,
                               double hi, double rel_tol) {
  if (!(lo > 0.0 && hi > lo)) throw Error(ErrorKind::RejectedInput, "need 0 < lo < hi");
  MonotoneOptions mo;
  mo.eigenvalue = false;
  auto positive = [&](double lambda) {
    const MinimalOutcome m = minimal_solution(spec, lambda, mo);
    const auto* p = std::get_if<BranchPoint>(&m);
    return p != nullptr && t_scan(spec, *p, opt).t.min_value > 0.0;
  };
  ScanThreshold out;
  if (!positive(lo)) {
    out.failing = lo;
    return out;
  }
  if (positive(hi)) {
    out.lambda = hi;
    return out;
  }
  while (hi / lo > 1.0 + rel_tol) {
    const double mid = std::sqrt(lo * hi);
    (positive(mid) ? lo : hi) = mid;
    ++out.bisections;
  }
  out.lambda = lo;
  out.failing = hi;
  return out;
}

double gradient_product(const RadialField& a, const RadialField& b) {
  require_same_grid(a.grid, b.grid);
  const RadialGrid& g = a.grid;
  const double h = g.h();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.nodes(); ++i) {
    acc += g.face(i) * (a.values[i + 1] - a.values[i]) * (b.values[i + 1] - b.values[i]);
  }
  return g.surface_measure() * acc / h;
}

std::vector<IdentityReport> energy_fields(const EnergyFields& in, double lambda1,
                                          bool with_inequalities) {
  const RadialGrid& g = in.u_o.grid;
  for (const RadialField* f : {&in.v_o, &in.source_u, &in.source_v, &in.u_min, &in.v_min}) {
    require_same_grid(g, f->grid);
  }
  const double n = g.dim();
  const double h = g.h();
  const double omega = g.surface_measure();
  const double grad = gradient_product(in.u_o, in.v_o);

  const RadialField lap_u = laplacian_field(in.u_o);
  const RadialField lap_v = laplacian_field(in.v_o);
  const RadialField ru = times_r(radial_derivative(in.u_o));
  const RadialField rv = times_r(radial_derivative(in.v_o));
  const double cross = integrate_nodes(g, [&](std::size_t i) {
    return lap_u.values[i] * rv.values[i] + lap_v.values[i] * ru.values[i];
  });
  const double edge = omega * boundary_derivative(in.u_o) * boundary_derivative(in.v_o);

  const double src_u = integrate_nodes(g, [&](std::size_t i) { return in.source_u.values[i] * in.v_o.values[i]; });
  const double src_v = integrate_nodes(g, [&](std::size_t i) { return in.source_v.values[i] * in.u_o.values[i]; });

  std::vector<IdentityReport> out{
      make_report("cross-pohozaev", false, cross, (n - 2.0) * grad + edge, h, kCrossTolC),
      make_report("energy-balance-u", false, src_u, grad, h, kEnergyTolC),
      make_report("energy-balance-v", false, src_v, grad, h, kEnergyTolC),
  };
  if (!with_inequalities) return out;

  const RadialField ru_min = times_r(radial_derivative(in.u_min));
  const RadialField rv_min = times_r(radial_derivative(in.v_min));
  const double lambda = in.lambda;
  const double gamma = in.sigma * in.lambda;
  const double bound = integrate_nodes(g, [&](std::size_t i) {
    const double uo = in.u_o.values[i];
    const double vo = in.v_o.values[i];
    const double ev = std::exp(in.v_min.values[i]);
    const double eu = std::exp(in.u_min.values[i]);
    const double qv = std::expm1(vo) - vo;
    const double qu = std::expm1(uo) - uo;
    return lambda * ev * (n + rv_min.values[i]) * qv + gamma * eu * (n + ru_min.values[i]) * qu;
  });
  const double uo2 = integrate_nodes(g, [&](std::size_t i) { return in.u_o.values[i] * in.u_o.values[i]; });
  const double vo2 = integrate_nodes(g, [&](std::size_t i) { return in.v_o.values[i] * in.v_o.values[i]; });
  out.push_back(make_report("pohozaev-bound", true, (n - 2.0) * grad, bound, h, kEnergyTolC));
  out.push_back(make_report("coercivity-u", true, in.sigma * lambda1 * uo2, grad, h, kEnergyTolC));
  out.push_back(make_report("coercivity-v", true, lambda1 * vo2, grad, h, kEnergyTolC));
  return out;
}

std::vector<IdentityReport> system_energy(const SystemSpec& spec, const SystemPoint& second,
                                          const SystemPoint& minimal) {
  if (spec.f.kind() != NonlinearityKind::Exp || spec.g.kind() != NonlinearityKind::Exp) {
    throw Error(ErrorKind::RejectedInput, "system energy identities need f = g = exp");
  }
  require_same_grid(spec.grid, second.u.grid);
  require_same_grid(spec.grid, minimal.u.grid);
  require_same_lambda(second.lambda, minimal.lambda);
  require_same_lambda(second.gamma, minimal.gamma);
  const double lambda = second.lambda;
  const double sigma = second.gamma / lambda;
  if (!(lambda > 0.0) || !(sigma > 0.0 && sigma <= 1.0 + 1e-12)) {
    throw Error(ErrorKind::RejectedInput, "system energy identities need lambda > 0 and 0 < sigma <= 1");
  }
  const RadialGrid& g = spec.grid;
  EnergyFields in{RadialField(g), RadialField(g), RadialField(g), RadialField(g),
                  minimal.u,      minimal.v,      lambda,         sigma};
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const double um = minimal.u.values[i];
    const double vm = minimal.v.values[i];
    in.u_o.values[i] = second.u.values[i] - um;
    in.v_o.values[i] = second.v.values[i] - vm;
    in.source_u.values[i] = lambda * std::exp(vm) * std::expm1(in.v_o.values[i]);
    in.source_v.values[i] = second.gamma * std::exp(um) * std::expm1(in.u_o.values[i]);
  }
  return energy_fields(in, first_eigenvalue(laplacian(g)));
}

std::vector<IdentityReport> manufactured_energy(int dim, std::size_t interior) {
  const RadialGrid g(dim, interior);
  const RadialPolynomial u({1.0, -1.0});
  const RadialPolynomial v({1.0, 0.0, -1.0});
  EnergyFields in{u.sample(g),
                  v.sample(g),
                  u.laplacian(dim).scaled(-1.0).sample(g),
                  v.laplacian(dim).scaled(-1.0).sample(g),
                  RadialField(g),
                  RadialField(g),
                  1.0,
                  1.0};
  return energy_fields(in, 0.0, false);
}

double default_quadrant_c(int dim) {
  if (dim <= 2) throw Error(ErrorKind::RejectedInput, "the quadrant constant needs N >= 3");
  return 2.0 * dim / (dim - 2.0);
}

double quadrant_integrand(double a, double b, double lambda, double sigma, double c) {
  auto part = [&](double x) {
    const double e = std::expm1(x);
    return x * x / lambda + e * x - c * (e - x);
  };
  return sigma * part(a) + part(b);
}

ScanReport quadrant_scan(double c, double lambda, double sigma, double extent, std::size_t samples) {
  if (!(c > 0.0) || !(lambda > 0.0) || !(sigma > 0.0 && sigma <= 1.0) || !(extent > 0.0) ||
      samples < 2) {
    throw Error(ErrorKind::RejectedInput, "quadrant scan needs C, lambda, extent > 0, sigma in (0, 1]");
  }
  const double step = extent / static_cast<double>(samples - 1);
  const auto m = kernels::grid_min(
      samples, samples,
      [&](std::size_t i, std::size_t j) {
        return quadrant_integrand(step * static_cast<double>(i), step * static_cast<double>(j), lambda,
                                  sigma, c);
      },
      [](std::size_t i, std::size_t j) { return i == 0 && j == 0; });
  ScanReport r;
  r.name = "quadrant";
  r.min_value = m.value;
  r.argmin_x = step * static_cast<double>(m.i);
  r.argmin_t = step * static_cast<double>(m.j);
  r.samples = m.count;
  r.x_axis = {"u_o", 0.0, extent, samples};
  r.t_axis = {"v_o", 0.0, extent, samples};
  return r;
}

ScanThreshold quadrant_threshold(double c, double sigma, double extent, std::size_t samples,
                                 double lo, double hi, double rel_tol) {
  if (!(lo > 0.0 && hi > lo)) throw Error(ErrorKind::RejectedInput, "need 0 < lo < hi");
  // The integrand only depends on lambda through positive 1/lambda terms, so
  // the minimum decreases with lambda and bisection is sound.
  auto positive = [&](double lambda) { return quadrant_scan(c, lambda, sigma, extent, samples).min_value > 0.0; };
  ScanThreshold out;
  if (!positive(lo)) {
    out.failing = lo;
    return out;
  }
  if (positive(hi)) {
    out.lambda = hi;
    return out;
  }
  while (hi / lo > 1.0 + rel_tol) {
    const double mid = std::sqrt(lo * hi);
    (positive(mid) ? lo : hi) = mid;
    ++out.bisections;
  }
  out.lambda = lo;
  out.failing = hi;
  return out;
}

namespace {

template <class RowMin>
double scaling_threshold(std::size_t nt, std::size_t ns, double t_max, RowMin&& row_min) {
  if (nt < 2 || ns < 1 || !(t_max > 0.0)) {
    throw Error(ErrorKind::RejectedInput, "scaling scan needs at least 2 x 1 samples");
  }
  const double dt = t_max / static_cast<double>(nt - 1);
  const double ds = 1.0 / static_cast<double>(ns + 1);
  const std::vector<double> mins = row_min(nt, ns, [&](std::size_t i, std::size_t j) {
    const double t = dt * static_cast<double>(i);
    const double s = ds * static_cast<double>(j + 1);
    return std::exp(s * t) - s * std::exp(t);
  });
  double t0 = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = dt * static_cast<double>(i);
    // At t = 1, s -> 1 the exact value is a vanishing square; allow rounding.
    if (mins[i] < -1e-13 * std::exp(t)) break;
    t0 = t;
  }
  return t0;
}

}  // namespace

double exp_scaling_threshold(std::size_t t_samples, std::size_t s_samples, double t_max) {
  return scaling_threshold(t_samples, s_samples, t_max,
                           [](std::size_t a, std::size_t b, auto&& fn) { return kernels::row_min(a, b, fn); });
}

double exp_scaling_threshold_serial(std::size_t t_samples, std::size_t s_samples, double t_max) {
  return scaling_threshold(t_samples, s_samples, t_max, [](std::size_t a, std::size_t b, auto&& fn) {
    return kernels::row_min_serial(a, b, fn);
  });
}

EnergyBound extremal_energy_bound(const SystemSpec& spec, const Ray& ray) {
  if (spec.dim() < 3) throw Error(ErrorKind::RejectedInput, "the ray energy bound needs N >= 3");
  const RadialGrid& g = spec.grid;
  const double n = spec.dim();
  EnergyBound out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ray.points.size(); ++k) {
    const SystemPoint& p = ray.points[k];
    require_same_grid(g, p.u.grid);
    EnergyBoundEntry e;
    e.lambda = p.lambda;
    e.gamma = p.gamma;
    e.before_fold = !ray.fold || k <= *ray.fold;
    const auto& u = p.u.values;
    const auto& v = p.v.values;
    e.fv_v = integrate_nodes(g, [&](std::size_t i) { return spec.f.f(v[i]) * v[i]; });
    e.gu_u = integrate_nodes(g, [&](std::size_t i) { return spec.g.f(u[i]) * u[i]; });
    const double fv = integrate_nodes(g, [&](std::size_t i) { return spec.f.antiderivative(v[i]); });
    const double gu = integrate_nodes(g, [&](std::size_t i) { return spec.g.antiderivative(u[i]); });
    e.lhs = 0.5 * (n - 2.0) * (p.lambda * e.fv_v + p.gamma * e.gu_u);
    e.rhs = n * (p.lambda * fv + p.gamma * gu);
    const double margin = e.rhs - e.lhs;
    out.worst_margin = std::min(out.worst_margin, margin);
    if (!(margin >= -1e-12 * std::max(1.0, std::abs(e.rhs)))) out.holds = false;
    out.entries.push_back(e);
  }
  if (out.entries.empty()) {
    out.worst_margin = 0.0;
    return out;
  }
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_at = 0;
  std::size_t last_pre = 0;
  for (std::size_t k = 0; k < out.entries.size(); ++k) {
    const auto& e = out.entries[k];
    if (!e.before_fold) break;
    if (!std::isfinite(e.fv_v)) out.bounded = false;
    if (k > 0 && e.fv_v < out.entries[k - 1].fv_v - 1e-12 * (1.0 + std::abs(e.fv_v))) out.increasing = false;
    if (e.fv_v > best) {
      best = e.fv_v;
      best_at = k;
    }
    last_pre = k;
  }
  out.sup_fv_v = best;
  if (best_at != last_pre) out.bounded = false;
  return out;
}

}  // namespace gelfand

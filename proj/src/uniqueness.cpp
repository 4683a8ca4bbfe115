#include "gelfand/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "gelfand/error.hpp"
#include "gelfand/parallel.hpp"

namespace gelfand {

std::string SolutionSet::summary() const {
  const std::string k = " (" + std::to_string(starts) + " starts)";
  if (solutions.empty()) return "no solution found" + k;
  if (solutions.size() == 1) return "no second solution found" + k;
  return std::to_string(solutions.size()) + " distinct solutions found" + k;
}

namespace {

// Weak-form residuals of a converged discrete solution scale like h^2 times the
// size of the forcing; this is the acceptance bound used for re-verification.
constexpr double kWeakTolC = 50.0;

using Vec = std::vector<double>;

struct Target {
  const DiscreteProblem& p;
  double param;  // lambda for scalar problems, 1 for the system at fixed (lambda, gamma)
  double a_hi;   // largest start amplitude
  std::function<Vec(double amplitude, int q, std::mt19937_64& rng)> start;
  std::function<std::optional<double>(const Vec&, const Vec&)> fine_distance;
};

struct RawSet {
  std::vector<Vec> roots;
  std::vector<std::size_t> origin;
  std::vector<double> residual;
  std::size_t failed = 0;
  std::vector<std::string> notes;
};

double distance(const DiscreteProblem& p, const Vec& a, const Vec& b) {
  Vec d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return p.norm(d);
}

RawSet run_search(const Target& t, const SearchOptions& opt) {
  if (opt.starts == 0) throw Error(ErrorKind::RejectedInput, "need at least one start");
  if (!(opt.distinct > 0.0)) throw Error(ErrorKind::RejectedInput, "distinct threshold must be positive");
  RawSet out;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  NewtonOptions nopt = opt.newton;
  nopt.cap = std::min(nopt.cap, 3.0 * t.a_hi + 1.0);
  const double a_lo = std::min(1e-2, 0.1 * t.a_hi);
  Deflation defl;

  for (std::size_t k = 0; k < opt.starts; ++k) {
    const double frac = opt.starts > 1 ? static_cast<double>(k) / static_cast<double>(opt.starts - 1) : 0.0;
    double amp = a_lo * std::pow(t.a_hi / a_lo, frac) * std::exp(jitter(rng));
    amp = std::min(amp, t.a_hi);
    const int q = 1 + static_cast<int>(k % 2);
    const Vec x0 = t.start(amp, q, rng);
    for (int rep = 0; rep < opt.max_roots_per_start; ++rep) {
      Vec x;
      double res = 0.0;
      try {
        NewtonResult d = newton(t.p, t.param, x0, nopt, &defl);
        NewtonResult v = newton(t.p, t.param, std::move(d.x), nopt);
        x = std::move(v.x);
        res = v.residual;
      } catch (const Error&) {
        ++out.failed;
        break;
      }
      double nearest = std::numeric_limits<double>::infinity();
      std::size_t which = 0;
      for (std::size_t j = 0; j < out.roots.size(); ++j) {
        const double d = distance(t.p, x, out.roots[j]);
        if (d < nearest) {
          nearest = d;
          which = j;
        }
      }
      if (nearest <= opt.distinct) break;
      if (nearest <= 10.0 * opt.distinct && t.fine_distance) {
        const std::optional<double> fine = t.fine_distance(x, out.roots[which]);
        out.notes.push_back("start " + std::to_string(k) + ": candidate at distance " +
                            std::to_string(nearest) + " re-compared on the doubled grid (" +
                            (fine ? std::to_string(*fine) : std::string("no fine solution")) + ")");
        if (!fine || *fine <= opt.distinct) break;
      }
      out.roots.push_back(x);
      out.origin.push_back(k);
      out.residual.push_back(res);
      defl.roots.push_back(std::move(x));
    }
  }
  return out;
}

Vec profile(const RadialGrid& g, double amp, int q) {
  Vec x(g.unknowns());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = g.r(i);
    x[i] = amp * std::pow(1.0 - r * r, q);
  }
  return x;
}

double amplitude_cap(const Nonlinearity& nl, const RadialGrid& g, int order) {
  return nl.class_tag() == NonlinearityClass::S ? 0.999 : resolved_sup(g, order);
}

int order_number(Order o) { return o == Order::Second ? 2 : 4; }

void order_by_center(SolutionSet& s) {
  std::stable_sort(s.solutions.begin(), s.solutions.end(),
                   [](const FoundSolution& a, const FoundSolution& b) { return a.center < b.center; });
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Forcing size for the weak-residual bound.
double forcing(const RadialGrid& g, double coeff, const Nonlinearity& nl, const RadialField& w) {
  RadialField fw(g);
  for (std::size_t i = 0; i < g.nodes(); ++i) fw.values[i] = std::abs(coeff * nl.f(w.values[i]));
  return integrate(fw);
}

}  // namespace

SolutionSet deflated_search(const ProblemSpec& spec, double lambda, const SearchOptions& opt) {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::RejectedInput, "lambda must be >= 0");
  ScalarProblem prob(spec);
  const RadialGrid& g = spec.grid;
  const ProblemSpec fine_spec =
      make_problem(spec.order, spec.dim(), spec.nl, 2 * g.interior() + 1);
  Target t{prob, lambda, amplitude_cap(spec.nl, g, order_number(spec.order)),
           [&](double amp, int q, std::mt19937_64&) { return profile(g, amp, q); },
           [&](const Vec& a, const Vec& b) -> std::optional<double> {
             ScalarProblem fp(fine_spec);
             auto lift = [&](const Vec& x) {
               const RadialField f = prolong(field_from_unknowns(g, x));
               return newton(fp, lambda, Vec(f.unknowns().begin(), f.unknowns().end())).x;
             };
             try {
               return distance(fp, lift(a), lift(b));
             } catch (const Error&) {
               return std::nullopt;
             }
           }};
  RawSet raw = run_search(t, opt);

  SolutionSet set;
  set.lambda = lambda;
  set.starts = opt.starts;
  set.failed_runs = raw.failed;
  set.distinct = opt.distinct;
  set.seed = opt.seed;
  set.notes = std::move(raw.notes);
  const auto bank = test_bank(spec.dim(), spec.bc());
  const double h = g.h();
  for (std::size_t k = 0; k < raw.roots.size(); ++k) {
    FoundSolution s{raw.roots[k], field_from_unknowns(g, raw.roots[k])};
    s.sup_u = s.u.sup();
    s.center = s.u.values[0];
    s.residual = raw.residual[k];
    s.start = raw.origin[k];
    try {
      s.eta1 = stability_eigenvalue(spec, lambda, s.u);
    } catch (const Error& e) {
      set.notes.push_back(std::string("eigenvalue: ") + e.what());
    }
    BranchPoint bp{lambda, s.u};
    s.weak_residual = max_of(weak_residual(spec, bp, bank));
    const double weak_tol = kWeakTolC * h * h * (1.0 + forcing(g, lambda, spec.nl, s.u));
    s.verified = s.residual <= opt.newton.tol && s.weak_residual <= weak_tol;
    set.solutions.push_back(std::move(s));
  }
  order_by_center(set);
  return set;
}

SolutionSet deflated_search(const SystemSpec& spec, double lambda, double gamma, const SearchOptions& opt) {
  if (!(lambda >= 0.0) || !(gamma >= 0.0)) throw Error(ErrorKind::RejectedInput, "lambda, gamma must be >= 0");
  SystemProblem prob(spec, lambda, gamma);
  const RadialGrid& g = spec.grid;
  const SystemSpec fine_spec = make_system(spec.dim(), spec.f, spec.g, 2 * g.interior() + 1);
  const double sigma = lambda > 0.0 ? gamma / lambda : 1.0;
  const double ratio = std::min(sigma, 1.0 / sigma);
  const double cap = std::min(amplitude_cap(spec.f, g, 2), amplitude_cap(spec.g, g, 2));
  Target t{prob, 1.0, cap,
           [&](double amp, int q, std::mt19937_64& rng) {
             std::uniform_real_distribution<double> mix(0.0, 1.0);
             const double c = ratio + (1.0 - ratio) * mix(rng);
             const Vec base = profile(g, amp, q);
             Vec x(2 * base.size());
             for (std::size_t i = 0; i < base.size(); ++i) {
               // The component with the larger parameter is the larger one.
               x[2 * i] = sigma <= 1.0 ? base[i] : c * base[i];
               x[2 * i + 1] = sigma <= 1.0 ? c * base[i] : base[i];
             }
             return x;
           },
           [&](const Vec& a, const Vec& b) -> std::optional<double> {
             SystemProblem fp(fine_spec, lambda, gamma);
             auto lift = [&](const Vec& x) {
               auto [u, v] = prob.split(x);
               return newton(fp, 1.0, fp.interleave(prolong(u), prolong(v))).x;
             };
             try {
               return distance(fp, lift(a), lift(b));
             } catch (const Error&) {
               return std::nullopt;
             }
           }};
  RawSet raw = run_search(t, opt);

  SolutionSet set;
  set.lambda = lambda;
  set.gamma = gamma;
  set.starts = opt.starts;
  set.failed_runs = raw.failed;
  set.distinct = opt.distinct;
  set.seed = opt.seed;
  set.notes = std::move(raw.notes);
  const auto bank = test_bank(spec.dim(), BoundaryCondition::Dirichlet2);
  const double h = g.h();
  for (std::size_t k = 0; k < raw.roots.size(); ++k) {
    auto [u, v] = prob.split(raw.roots[k]);
    FoundSolution s{raw.roots[k], u, v};
    s.sup_u = u.sup();
    s.sup_v = v.sup();
    s.center = u.values[0];
    s.residual = raw.residual[k];
    s.start = raw.origin[k];
    SystemPoint sp{lambda, gamma, sigma, u, v};
    s.weak_residual = max_of(system_weak_residual(spec, sp, bank));
    const double size = std::max(forcing(g, lambda, spec.f, v), forcing(g, gamma, spec.g, u));
    s.verified = s.residual <= opt.newton.tol && s.weak_residual <= kWeakTolC * h * h * (1.0 + size);
    set.solutions.push_back(std::move(s));
  }
  order_by_center(set);
  return set;
}

namespace {

UniquenessRegion summarize(std::vector<RegionEntry> entries) {
  UniquenessRegion out;
  out.entries = std::move(entries);
  bool leading = true;
  for (const auto& e : out.entries) {
    if (leading && e.count == 1) {
      out.unique_up_to = e.lambda;
    } else {
      leading = false;
    }
    if (e.count >= 2 && !out.first_multiple) out.first_multiple = e.lambda;
  }
  return out;
}

}  // namespace

UniquenessRegion uniqueness_region(const ProblemSpec& spec, const std::vector<double>& lambda_grid,
                                   const SearchOptions& opt) {
  std::vector<RegionEntry> entries(lambda_grid.size());
  kernels::parallel_tasks(lambda_grid.size(), [&](std::size_t k) {
    const SolutionSet s = deflated_search(spec, lambda_grid[k], opt);
    entries[k] = {lambda_grid[k], s.count(), s.summary()};
  });
  return summarize(std::move(entries));
}

UniquenessRegion uniqueness_region(const SystemSpec& spec, double sigma,
                                   const std::vector<double>& lambda_grid, const SearchOptions& opt) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::RejectedInput, "sigma must be > 0");
  std::vector<RegionEntry> entries(lambda_grid.size());
  kernels::parallel_tasks(lambda_grid.size(), [&](std::size_t k) {
    const SolutionSet s = deflated_search(spec, lambda_grid[k], sigma * lambda_grid[k], opt);
    entries[k] = {lambda_grid[k], s.count(), s.summary()};
  });
  return summarize(std::move(entries));
}

namespace {

struct FoldData {
  Vec x;           // the fold solution
  double lambda;   // lambda*
  Vec direction;   // approximate null direction, unit sup norm
};

double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

FoldData fold_data(const std::vector<Vec>& xs, std::size_t fold, double lambda_star) {
  FoldData f{xs[fold], lambda_star, Vec(xs[fold].size(), 0.0)};
  const std::size_t lo = fold > 0 ? fold - 1 : fold;
  const std::size_t hi = std::min(fold + 1, xs.size() - 1);
  double top = 0.0;
  for (std::size_t i = 0; i < f.direction.size(); ++i) {
    f.direction[i] = xs[hi][i] - xs[lo][i];
    top = std::max(top, std::abs(f.direction[i]));
  }
  if (top > 0.0) {
    for (double& v : f.direction) v /= top;
  }
  return f;
}

CollapseReport collapse(const DiscreteProblem& p, const FoldData& fold,
                        const std::function<std::optional<Vec>(double)>& lower,
                        const std::vector<double>& deltas, const CollapseOptions& opt) {
  CollapseReport rep;
  rep.lambda_star = fold.lambda;
  std::vector<double> ld, lc, ln;
  for (double delta : deltas) {
    if (!(delta > 0.0 && delta < 1.0)) {
      rep.diagnostics.push_back("delta " + std::to_string(delta) + " skipped (must lie in (0, 1))");
      continue;
    }
    const double lambda = fold.lambda * (1.0 - delta);
    const std::optional<Vec> lo = lower(lambda);
    if (!lo) {
      rep.diagnostics.push_back("no lower solution at delta = " + std::to_string(delta));
      continue;
    }
    Deflation defl;
    defl.roots.push_back(*lo);
    std::optional<Vec> up;
    // From the fold solution the lower root is deflated away, leaving the upper one.
    for (double push : {0.0, 1.0, 4.0}) {
      Vec x0 = fold.x;
      const double s = push * std::sqrt(delta);
      for (std::size_t i = 0; i < x0.size(); ++i) x0[i] += s * fold.direction[i];
      try {
        NewtonResult d = newton(p, lambda, x0, {}, &defl);
        NewtonResult v = newton(p, lambda, std::move(d.x));
        if (distance(p, v.x, *lo) > 1e-10 && v.x[0] > (*lo)[0]) {
          up = std::move(v.x);
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!up) {
      rep.diagnostics.push_back("no upper solution at delta = " + std::to_string(delta));
      continue;
    }
    CollapseSample s;
    s.delta = delta;
    s.lambda = lambda;
    s.lower_center = (*lo)[0];
    s.upper_center = (*up)[0];
    s.gap_center = s.upper_center - s.lower_center;
    s.gap_norm = distance(p, *up, *lo);
    rep.samples.push_back(s);
    ld.push_back(std::log(delta));
    lc.push_back(std::log(s.gap_center));
    ln.push_back(std::log(s.gap_norm));
  }
  rep.exponent = slope(ld, lc);
  rep.exponent_norm = slope(ld, ln);

  // At the fold the two roots merge into a double root, which Newton only
  // reaches linearly and which may sit a rounding error below the estimated
  // lambda*. Starts pushed either way along the null direction are run a
  // hair below lambda*, backing off further only if most of them fail.
  NewtonOptions slow;
  slow.max_iters = 200;
  std::vector<Vec> found;
  for (double eps = 1e-10; eps <= 1e-7 * 1.01; eps *= 10.0) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> push(-0.1, 0.1);
    found.clear();
    for (std::size_t k = 0; k < opt.fold_starts; ++k) {
      Vec x0 = fold.x;
      const double s = push(rng);
      for (std::size_t i = 0; i < x0.size(); ++i) x0[i] += s * fold.direction[i];
      try {
        found.push_back(newton(p, fold.lambda * (1.0 - eps), std::move(x0), slow).x);
      } catch (const Error&) {
      }
    }
    rep.fold_offset = eps;
    if (2 * found.size() > opt.fold_starts) break;
  }
  rep.fold_converged = found.size();
  std::vector<Vec> centers;
  for (const Vec& x : found) {
    const bool near = std::any_of(centers.begin(), centers.end(),
                                  [&](const Vec& c) { return distance(p, x, c) <= opt.cluster_radius; });
    if (!near) centers.push_back(x);
  }
  rep.fold_clusters = centers.size();
  return rep;
}

}  // namespace

CollapseReport extremal_uniqueness_probe(const ProblemSpec& spec, const std::vector<double>& deltas,
                                         const CollapseOptions& opt) {
  const double lambda_init = opt.lambda_init > 0.0 ? opt.lambda_init : 0.05;
  Branch branch = continue_branch(spec, lambda_init, 0.0, opt.n_steps);
  if (!branch.fold) throw Error(ErrorKind::Unavailable, "the branch has no fold");
  std::vector<Vec> xs;
  for (const auto& bp : branch.points) xs.emplace_back(bp.u.unknowns().begin(), bp.u.unknowns().end());
  const FoldData fold = fold_data(xs, branch.fold->index, branch.fold->lambda_star);
  ScalarProblem prob(spec);
  MonotoneOptions mo;
  mo.eigenvalue = false;
  CollapseReport rep = collapse(
      prob, fold,
      [&](double lambda) -> std::optional<Vec> {
        const MinimalOutcome m = minimal_solution(spec, lambda, mo);
        const auto* p = std::get_if<BranchPoint>(&m);
        if (!p) return std::nullopt;
        return Vec(p->u.unknowns().begin(), p->u.unknowns().end());
      },
      deltas, opt);
  rep.diagnostics.insert(rep.diagnostics.begin(), branch.diagnostics.begin(), branch.diagnostics.end());
  return rep;
}

CollapseReport extremal_uniqueness_probe(const SystemSpec& spec, double sigma,
                                         const std::vector<double>& deltas, const CollapseOptions& opt) {
  const double lambda_init = opt.lambda_init > 0.0 ? opt.lambda_init : 0.05 / std::max(1.0, sigma);
  Ray ray = trace_ray(spec, sigma, lambda_init, 0.0, opt.n_steps);
  if (!ray.fold) throw Error(ErrorKind::Unavailable, "the ray has no fold");
  SystemProblem prob(spec, 1.0, sigma);
  std::vector<Vec> xs;
  for (const auto& sp : ray.points) xs.push_back(prob.interleave(sp.u, sp.v));
  const FoldData fold = fold_data(xs, *ray.fold, ray.lambda_star);
  MonotoneOptions mo;
  mo.eigenvalue = false;
  CollapseReport rep = collapse(
      prob, fold,
      [&](double lambda) -> std::optional<Vec> {
        const SystemOutcome m = system_minimal(spec, lambda, sigma * lambda, mo);
        const auto* p = std::get_if<SystemPoint>(&m);
        if (!p) return std::nullopt;
        return prob.interleave(p->u, p->v);
      },
      deltas, opt);
  rep.diagnostics.insert(rep.diagnostics.begin(), ray.diagnostics.begin(), ray.diagnostics.end());
  return rep;
}

}  // namespace gelfand

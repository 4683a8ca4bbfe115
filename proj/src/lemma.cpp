#include "gelfand/lemma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gelfand/error.hpp"
#include "gelfand/parallel.hpp"

namespace gelfand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMuFloor = 1e-6;
constexpr int kBisectionSteps = 60;

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -kInf) return -kInf;
  if (m == kInf) return kInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

bool holds(double lhs, double rhs) { return lhs - rhs >= -kInequalitySlack; }

void require_log_convex_r(const Nonlinearity& nl) {
  if (nl.class_tag() != NonlinearityClass::R) {
    throw Error(ErrorKind::WrongClass, "expected a class (R) nonlinearity, got " + nl.spec());
  }
  if (!nl.log_convex()) {
    throw Error(ErrorKind::RejectedInput, nl.spec() + " is not flagged log-convex");
  }
}

bool grid_all(std::size_t n, const auto& pred) {
  const auto m = kernels::grid_min(n, 1, [&](std::size_t i, std::size_t) {
    return pred(i) ? 1.0 : 0.0;
  });
  return m.count == 0 || m.value > 0.5;
}

// Bisection on mu from 1 downward: shrink [bad, good] until the valid end is located,
// then hand back the midpoint between that edge and 1 when it also verifies.
template <class Valid>
double bisect_mu(const Valid& valid, const char* what) {
  double good = 1.0 - std::ldexp(1.0, -30);
  if (!valid(good)) {
    throw Error(ErrorKind::SearchFailure, std::string("no admissible mu below 1 for ") + what);
  }
  double bad = kMuFloor;
  if (valid(bad)) {
    return bad;
  }
  for (int it = 0; it < kBisectionSteps; ++it) {
    const double mid = 0.5 * (good + bad);
    if (valid(mid)) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  const double roomy = 0.5 * (good + 1.0);
  return valid(roomy) ? roomy : good;
}

}  // namespace

const char* to_string(Classification c) {
  switch (c) {
    case Classification::R: return "R";
    case Classification::S: return "S";
    case Classification::Neither: return "Neither";
  }
  return "Neither";
}

Classification classify(const Nonlinearity& nl, std::span<const double> samples) {
  if (samples.empty()) {
    throw Error(ErrorKind::RejectedInput, "classify needs at least one sample");
  }
  for (double t : samples) {
    if (!nl.in_domain(t) || !std::isfinite(t)) {
      throw Error(ErrorKind::RejectedInput, "sample outside the domain of " + nl.spec());
    }
  }
  if (std::abs(nl.f(0.0) - 1.0) > kInequalitySlack) {
    return Classification::Neither;
  }
  for (double t : samples) {
    const double f = nl.f(t);
    if (!(f > 0.0) || nl.fprime(t) < -kInequalitySlack || nl.fsecond(t) < -kInequalitySlack) {
      return Classification::Neither;
    }
  }

  if (nl.class_tag() == NonlinearityClass::S) {
    // Blow-up at the pole: log f(1 - 10^-k) keeps growing by non-vanishing increments.
    double prev = nl.log_f(0.9);
    double first_increment = 0.0;
    double last_increment = 0.0;
    for (int k = 2; k <= 8; ++k) {
      const double cur = nl.log_f(1.0 - std::pow(10.0, -k));
      const double inc = cur - prev;
      if (!(inc > 0.0)) return Classification::Neither;
      if (k == 2) first_increment = inc;
      last_increment = inc;
      prev = cur;
    }
    return last_increment >= 0.25 * first_increment ? Classification::S : Classification::Neither;
  }

  // Superlinearity: f(t)/t nondecreasing along the tail and growing overall.
  std::vector<double> tail;
  for (double t : samples) {
    if (t >= 1.0) tail.push_back(t);
  }
  std::sort(tail.begin(), tail.end());
  tail.erase(std::unique(tail.begin(), tail.end()), tail.end());
  if (tail.size() < 3) {
    return Classification::Neither;
  }
  double prev = nl.f(tail.front()) / tail.front();
  const double first = prev;
  for (std::size_t i = 1; i < tail.size(); ++i) {
    const double cur = nl.f(tail[i]) / tail[i];
    if (cur < prev) return Classification::Neither;
    prev = cur;
  }
  return prev > first ? Classification::R : Classification::Neither;
}

double superlinearity_ratio(const Nonlinearity& nl, double t) {
  if (t == 0.0) {
    throw Error(ErrorKind::SingularEvaluation, "superlinearity ratio is singular at t = 0");
  }
  if (!nl.in_domain(t)) {
    throw Error(ErrorKind::SingularEvaluation, "superlinearity ratio evaluated at the pole");
  }
  const double p = nl.parameter();
  switch (nl.kind()) {
    case NonlinearityKind::Exp:
      return -t / std::expm1(-t);
    case NonlinearityKind::PowerR:
      if (t > 0.0) return (p + 1.0) * t / ((1.0 + t) - std::pow(1.0 + t, -p));
      return t * nl.f(t) / nl.antiderivative(t);
    case NonlinearityKind::MemsS:
      if (p == 1.0) return 1.0 / ((1.0 - t) * -std::log1p(-t));
      return (p - 1.0) / ((1.0 - t) - std::pow(1.0 - t, p));
    case NonlinearityKind::Custom:
      if (nl.class_tag() == NonlinearityClass::S) return nl.f(t) / nl.antiderivative(t);
      return t * nl.f(t) / nl.antiderivative(t);
  }
  return 0.0;
}

double supercritical_threshold(int dim) {
  if (dim <= 4) {
    throw Error(ErrorKind::RejectedInput, "supercritical threshold needs N >= 5");
  }
  return 2.0 * dim / (dim - 4.0);
}

SupercriticalCheck supercritical_check(const Nonlinearity& nl, int dim, std::span<const double> tail) {
  if (nl.class_tag() != NonlinearityClass::R) {
    throw Error(ErrorKind::WrongClass, "supercritical check applies to class (R) only");
  }
  if (tail.empty() ||
      std::adjacent_find(tail.begin(), tail.end(), std::greater_equal<>{}) != tail.end()) {
    throw Error(ErrorKind::RejectedInput, "tail samples must be strictly increasing");
  }
  if (tail.back() < 1e3) {
    throw Error(ErrorKind::RejectedInput, "tail must reach at least 1e3");
  }
  SupercriticalCheck out;
  out.threshold = supercritical_threshold(dim);
  out.min_ratio = kInf;
  for (double t : tail) {
    out.min_ratio = std::min(out.min_ratio, superlinearity_ratio(nl, t));
  }
  out.margin = out.min_ratio - out.threshold;
  out.supercritical = out.margin > 0.0;
  return out;
}

std::vector<double> hybrid_grid(double t_max, std::size_t n_linear, std::size_t n_geometric) {
  std::vector<double> grid;
  grid.reserve(n_linear + n_geometric + 1);
  grid.push_back(0.0);
  const double g_hi = std::min(1.0, t_max);
  const double g_lo = 1e-8 * g_hi;
  for (std::size_t i = 0; i < n_geometric; ++i) {
    const double s = n_geometric == 1 ? 0.0 : static_cast<double>(i) / (n_geometric - 1);
    grid.push_back(g_lo * std::pow(g_hi / g_lo, s));
  }
  for (std::size_t i = 1; i < n_linear; ++i) {
    grid.push_back(t_max * static_cast<double>(i) / (n_linear - 1));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

bool mu_r_inequality_holds(const Nonlinearity& nl, double mu, double eps, double t) {
  const double lhs = mu * mu * (nl.f(t / mu) + eps);
  const double rhs = nl.f(t) + 0.5 * eps;
  if (std::isfinite(lhs) && std::isfinite(rhs)) {
    return holds(lhs, rhs);
  }
  const double log_lhs = 2.0 * std::log(mu) + log_add_exp(nl.log_f(t / mu), std::log(eps));
  const double log_rhs = log_add_exp(nl.log_f(t), std::log(0.5 * eps));
  return log_lhs >= log_rhs;
}

std::optional<std::size_t> first_mu_r_violation(const Nonlinearity& nl, double mu, double eps,
                                                std::span<const double> t_grid) {
  const auto m = kernels::grid_min(t_grid.size(), 1, [&](std::size_t i, std::size_t) {
    return mu_r_inequality_holds(nl, mu, eps, t_grid[i]) ? 1.0 : 0.0;
  });
  if (m.count == 0 || m.value > 0.5) return std::nullopt;
  return m.i;
}

double find_mu_r(const Nonlinearity& nl, double eps, std::span<const double> t_grid) {
  require_log_convex_r(nl);
  if (!(eps > 0.0)) {
    throw Error(ErrorKind::RejectedInput, "eps must be positive");
  }
  return bisect_mu(
      [&](double mu) { return !first_mu_r_violation(nl, mu, eps, t_grid).has_value(); },
      nl.spec().c_str());
}

double find_k(const Nonlinearity& nl, double mu, int dim, std::span<const double> t_grid) {
  require_log_convex_r(nl);
  if (!(mu > 0.0 && mu < 1.0) || dim < 1) {
    throw Error(ErrorKind::RejectedInput, "find_k needs 0 < mu < 1 and N >= 1");
  }
  if (t_grid.size() < 3) {
    throw Error(ErrorKind::RejectedInput, "find_k needs a grid of at least 3 points");
  }
  auto gap = [&](double t) {
    const double v = dim * nl.f(t) - nl.f(t / mu);
    return std::isnan(v) ? -kInf : v;
  };
  // Max of the gap = min of its negative.
  const auto m = kernels::grid_min(t_grid.size(), 1, [&](std::size_t i, std::size_t) {
    return -gap(t_grid[i]);
  });
  const std::size_t k_idx = m.i;
  if (k_idx + 1 == t_grid.size()) {
    throw Error(ErrorKind::SearchFailure, "N f(t) - f(t/mu) still growing at the grid end");
  }
  // Golden-section refinement on the bracketing cell pair.
  double a = t_grid[k_idx == 0 ? 0 : k_idx - 1];
  double b = t_grid[k_idx + 1];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double gc = gap(c);
  double gd = gap(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + std::abs(b)); ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - phi * (b - a);
      gc = gap(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + phi * (b - a);
      gd = gap(d);
    }
  }
  const double best = std::max({-m.value, gc, gd});
  const double k = std::max(0.0, best) + 1e-9;
  const bool ok = grid_all(t_grid.size(), [&](std::size_t i) {
    const double t = t_grid[i];
    const double rhs = nl.f(t / mu) + k;
    return !std::isfinite(rhs) || holds(rhs, dim * nl.f(t));
  });
  if (!ok) {
    throw Error(ErrorKind::InternalConsistency, "find_k result fails its verification grid");
  }
  return k;
}

double find_k(const Nonlinearity& nl, double mu, int dim) {
  double t_max = 1.0;
  while (t_max < 100.0 && std::isfinite(nl.f(2.0 * t_max / mu)) && std::isfinite(nl.f(2.0 * t_max))) {
    t_max *= 2.0;
  }
  const auto grid = hybrid_grid(t_max, 20001, 500);
  return find_k(nl, mu, dim, grid);
}

bool mu_s_inequality_holds(const Nonlinearity& nl, double mu, double eps,
                           std::span<const double> t_points) {
  for (double t : t_points) {
    const double lhs = mu * (nl.checked_f(t / mu) + eps);
    const double rhs = nl.checked_f(t) + 0.5 * eps;
    if (!holds(lhs, rhs)) return false;
  }
  return true;
}

double find_mu_s(const Nonlinearity& nl, double eps, std::size_t n_grid) {
  if (nl.class_tag() != NonlinearityClass::S) {
    throw Error(ErrorKind::WrongClass, "find_mu_s applies to class (S) only");
  }
  if (!(eps > 0.0) || n_grid < 2) {
    throw Error(ErrorKind::RejectedInput, "find_mu_s needs eps > 0 and a grid");
  }
  auto valid = [&](double mu) {
    std::vector<double> pts(n_grid);
    for (std::size_t j = 0; j < n_grid; ++j) pts[j] = mu * static_cast<double>(j) / n_grid;
    return mu_s_inequality_holds(nl, mu, eps, pts);
  };
  return bisect_mu(valid, nl.spec().c_str());
}

bool strict_convexity_check(const Nonlinearity& nl, std::span<const double> t_grid) {
  return grid_all(t_grid.size(), [&](std::size_t i) { return nl.fsecond(t_grid[i]) > 0.0; });
}

double common_mu_r(const Nonlinearity& f, const Nonlinearity& g, double eps,
                   std::span<const double> t_grid) {
  const double mu = std::max(find_mu_r(f, eps, t_grid), find_mu_r(g, eps, t_grid));
  if (first_mu_r_violation(f, mu, eps, t_grid) || first_mu_r_violation(g, mu, eps, t_grid)) {
    throw Error(ErrorKind::SearchFailure, "no common mu for " + f.spec() + " and " + g.spec());
  }
  return mu;
}

double common_k(const Nonlinearity& f, const Nonlinearity& g, double mu, int dim) {
  return std::max(find_k(f, mu, dim), find_k(g, mu, dim));
}

}  // namespace gelfand

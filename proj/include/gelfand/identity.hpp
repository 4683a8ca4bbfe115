#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gelfand/branch.hpp"
#include "gelfand/problem.hpp"
#include "gelfand/radial.hpp"
#include "gelfand/system.hpp"

namespace gelfand {

enum class Verdict { Pass, Fail, Informational };
const char* to_string(Verdict v);

/// One evaluated identity or inequality.
///
/// Equalities pass when |lhs - rhs| <= tolerance. Inequalities are always
/// stored in the orientation lhs <= rhs and pass when lhs - rhs <= tolerance.
/// The tolerance is C h^2 max(1, |lhs|, |rhs|) with C fixed per identity.
struct IdentityReport {
  std::string name;
  bool inequality = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // lhs - rhs
  double relative = 0.0;  // residual / max(1, |lhs|, |rhs|)
  double grid_h = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Informational;
};

/// Constants C in the C h^2 tolerances, set from the manufactured-solution runs
/// with roughly a factor of ten of headroom.
inline constexpr double kPohozaevTolC = 40.0;
inline constexpr double kCrossTolC = 40.0;
inline constexpr double kEnergyTolC = 10.0;

IdentityReport make_report(std::string name, bool inequality, double lhs, double rhs, double h,
                           double c);

struct ScanAxis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t samples = 0;
};

struct ScanReport {
  std::string name;
  double min_value = 0.0;
  double argmin_x = 0.0;  // r for the T/S scans, u_o for the quadrant scan
  double argmin_t = 0.0;  // t for the T/S scans, v_o for the quadrant scan
  std::size_t samples = 0;
  ScanAxis x_axis;
  ScanAxis t_axis;
  std::vector<std::string> warnings;
};

// Fourth-order Pohozaev identity for v = u - u_lambda.

/// Evaluates, on the unit ball with the boundary terms of `bc`,
///   int (-r v') D  =  (N-4)/2 int (Delta v)^2 + B          (equality)
///   (N-4)/2 int (Delta v)^2  <=  int (-r v') D             (inequality)
/// with D the field playing Delta^2 v. B = -omega v'(1) (Delta v)'(1) for
/// Navier and omega (Delta v(1))^2 / 2 for the clamped case.
std::vector<IdentityReport> pohozaev_fields(BoundaryCondition bc, const RadialField& v,
                                            const RadialField& bilap_v);

/// Same on a solution pair at one lambda: D = lambda (f(u) - f(u_lambda)).
std::vector<IdentityReport> pohozaev_fourth(const ProblemSpec& spec, const BranchPoint& point,
                                            const BranchPoint& minimal);

/// Sampled polynomial v with exact Delta^2 v: (1 - r^2)^2 for the clamped case,
/// (N+4)/N - 2(N+2)/N r^2 + r^4 (so v = Delta v = 0 at r = 1) for Navier.
std::vector<IdentityReport> manufactured_pohozaev(int dim, BoundaryCondition bc,
                                                  std::size_t interior);

// The T and S functionals of the small-lambda argument.

struct TScanOptions {
  double sigma_conv = 0.9;
  std::optional<double> c_sigma;  // default (N-4)(1-sigma)/2 times the first eigenvalue of Delta^2
  double t_lo = 0.0;
  double t_hi = 20.0;
  std::size_t t_samples = 401;
};

struct TScanResult {
  ScanReport t;
  ScanReport s;
  double epsilon = 0.0;           // max over nodes of |r u_lambda'|
  double c_sigma = 0.0;
  double domination_gap = 0.0;    // min over samples of T - S (>= 0 by convexity)
  std::size_t domination_violations = 0;
};

/// T(r, t) = (N-4) sigma / 2 (f(u+t) - f(u)) t + C_sigma / lambda t^2
///           - N (F(u+t) - F(u) - f(u) t) - r u' (f(u+t) - f(u) - f'(u) t)
/// and S(r, t), the same with -r u' replaced by -epsilon, over nodes x t-grid.
/// The t = 0 row vanishes identically and is left out of the minima.
TScanResult t_scan(const ProblemSpec& spec, const BranchPoint& minimal, const TScanOptions& opt = {});

struct ScanThreshold {
  double lambda = 0.0;   // largest lambda found with a positive minimum
  double failing = 0.0;  // smallest lambda found with a non-positive minimum (0 if none)
  int bisections = 0;
};

/// Bisects (in log lambda, on [lo, hi]) the largest lambda where the T-scan minimum stays positive.
ScanThreshold t_scan_threshold(const ProblemSpec& spec, const TScanOptions& opt, double lo,
                               double hi, double rel_tol = 1e-3);

// Energy identities for the system difference (u_o, v_o) = second - minimal.

/// Exp/Exp inputs for system_energy. source_u and source_v play -Delta u_o and -Delta v_o.
struct EnergyFields {
  RadialField u_o;
  RadialField v_o;
  RadialField source_u;
  RadialField source_v;
  RadialField u_min;
  RadialField v_min;
  double lambda = 0.0;
  double sigma = 0.0;
};

/// int grad a . grad b over the discrete faces.
double gradient_product(const RadialField& a, const RadialField& b);

/// Reports, in order:
///   cross-pohozaev    int Delta u_o (r v_o') + Delta v_o (r u_o') = (N-2) int grad u_o . grad v_o + omega u_o'(1) v_o'(1)
///   energy-balance-u  int source_u v_o = int grad u_o . grad v_o
///   energy-balance-v  int source_v u_o = int grad u_o . grad v_o
///   pohozaev-bound    (N-2) int grad u_o . grad v_o <= the four-term right side
///   coercivity-u      sigma lambda_1 int u_o^2 <= int grad u_o . grad v_o
///   coercivity-v      lambda_1 int v_o^2 <= int grad u_o . grad v_o
/// The last three are skipped when `with_inequalities` is false.
std::vector<IdentityReport> energy_fields(const EnergyFields& in, double lambda1,
                                          bool with_inequalities = true);

/// The same on a computed pair; requires f = g = exp and matching parameters.
std::vector<IdentityReport> system_energy(const SystemSpec& spec, const SystemPoint& second,
                                          const SystemPoint& minimal);

/// Polynomial u_o = 1 - r^2, v_o = 1 - r^4 with exact sources (equalities only).
std::vector<IdentityReport> manufactured_energy(int dim, std::size_t interior);

// Scans of the closing integrand and of the exponential scaling inequality.

/// 2N / (N - 2).
double default_quadrant_c(int dim);

/// sigma {a^2/lambda + (e^a - 1) a - C (e^a - a - 1)} + {b^2/lambda + (e^b - 1) b - C (e^b - b - 1)}
double quadrant_integrand(double a, double b, double lambda, double sigma, double c);

/// Minimum of the integrand over [0, extent]^2 without the origin.
ScanReport quadrant_scan(double c, double lambda, double sigma, double extent = 5.0,
                         std::size_t samples = 201);

/// Largest lambda (log bisection on [lo, hi]) with a positive quadrant-scan minimum.
ScanThreshold quadrant_threshold(double c, double sigma, double extent = 5.0,
                                 std::size_t samples = 201, double lo = 1e-8, double hi = 1e8,
                                 double rel_tol = 1e-6);

/// Largest t0 on a uniform grid over [0, t_max] with e^{s t} >= s e^t for every
/// s on the interior grid of (0, 1) and every grid t <= t0.
double exp_scaling_threshold(std::size_t t_samples = 2001, std::size_t s_samples = 2000,
                             double t_max = 2.0);
double exp_scaling_threshold_serial(std::size_t t_samples = 2001, std::size_t s_samples = 2000,
                                    double t_max = 2.0);

// Energy bound along a ray.

struct EnergyBoundEntry {
  double lambda = 0.0;
  double gamma = 0.0;
  double lhs = 0.0;  // int lambda (N-2)/2 f(v) v + gamma (N-2)/2 g(u) u
  double rhs = 0.0;  // int lambda N F(v) + gamma N G(u)
  double fv_v = 0.0;
  double gu_u = 0.0;
  bool before_fold = true;
};

struct EnergyBound {
  std::vector<EnergyBoundEntry> entries;
  bool holds = true;             // lhs <= rhs at every entry
  double worst_margin = 0.0;     // min of rhs - lhs
  bool increasing = true;        // int f(v) v increases up to the fold
  bool bounded = true;           // finite and largest at the fold
  double sup_fv_v = 0.0;
};

EnergyBound extremal_energy_bound(const SystemSpec& spec, const Ray& ray);

}  // namespace gelfand

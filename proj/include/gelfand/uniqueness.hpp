#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gelfand/branch.hpp"
#include "gelfand/newton.hpp"
#include "gelfand/problem.hpp"
#include "gelfand/system.hpp"

namespace gelfand {

struct SearchOptions {
  std::size_t starts = 20;     // K
  std::uint64_t seed = 1;
  double distinct = 1e-5;      // weighted-norm distance separating two solutions
  int max_roots_per_start = 4; // deflated re-searches from one start
  NewtonOptions newton{};
};

struct FoundSolution {
  FoundSolution(std::vector<double> x_, RadialField u_, std::optional<RadialField> v_ = std::nullopt)
      : x(std::move(x_)), u(std::move(u_)), v(std::move(v_)) {}

  std::vector<double> x;  // unknowns as the problem orders them
  RadialField u;
  std::optional<RadialField> v;  // system only
  double sup_u = 0.0;
  double sup_v = 0.0;
  double center = 0.0;           // u(0)
  std::optional<double> eta1;    // scalar problems only
  double residual = 0.0;         // scaled, after undeflated re-verification
  double weak_residual = 0.0;    // largest over the test bank
  bool verified = false;
  std::size_t start = 0;         // index of the start that produced it
};

/// Distinct solutions found at fixed parameters. "Unique" is never claimed:
/// a single member means no second solution was found from the given starts.
struct SolutionSet {
  double lambda = 0.0;
  std::optional<double> gamma;
  std::vector<FoundSolution> solutions;
  std::size_t starts = 0;
  std::size_t failed_runs = 0;  // Newton runs that did not converge
  double distinct = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  std::size_t count() const noexcept { return solutions.size(); }
  std::string summary() const;
};

/// Deflated Newton from K starts A (1 - r^2)^q, A log-spaced (with seeded
/// jitter) up to the grid resolution limit, or below 1 for class S, q in {1, 2}.
/// Starts run in order; after each new root the same start is searched again
/// with that root deflated. Candidates within ten times the distinct threshold
/// of a known root are re-compared on the doubled grid.
SolutionSet deflated_search(const ProblemSpec& spec, double lambda, const SearchOptions& opt = {});

/// System version; starts put v0 between min(sigma, 1/sigma) u0 and u0.
SolutionSet deflated_search(const SystemSpec& spec, double lambda, double gamma,
                            const SearchOptions& opt = {});

struct RegionEntry {
  double lambda = 0.0;
  std::size_t count = 0;
  std::string summary;
};

struct UniquenessRegion {
  std::vector<RegionEntry> entries;      // in grid order
  std::optional<double> unique_up_to;    // last lambda of the leading run with count 1
  std::optional<double> first_multiple;  // first lambda with count >= 2
};

/// One deflated search per grid lambda, run concurrently.
UniquenessRegion uniqueness_region(const ProblemSpec& spec, const std::vector<double>& lambda_grid,
                                   const SearchOptions& opt = {});
/// Along the ray gamma = sigma lambda.
UniquenessRegion uniqueness_region(const SystemSpec& spec, double sigma,
                                   const std::vector<double>& lambda_grid, const SearchOptions& opt = {});

struct CollapseOptions {
  double lambda_init = 0.0;     // <= 0: a small fraction of a rough lambda* bound
  int n_steps = 400;
  std::size_t fold_starts = 20;
  std::uint64_t seed = 1;
  double cluster_radius = 1e-3;
};

struct CollapseSample {
  double delta = 0.0;
  double lambda = 0.0;
  double lower_center = 0.0;
  double upper_center = 0.0;
  double gap_center = 0.0;  // u_upper(0) - u_lower(0)
  double gap_norm = 0.0;    // weighted norm of the difference
};

struct CollapseReport {
  double lambda_star = 0.0;
  std::vector<CollapseSample> samples;
  double exponent = 0.0;       // least-squares slope of log gap_center against log delta
  double exponent_norm = 0.0;  // same for gap_norm
  double fold_offset = 0.0;     // the fold starts run at lambda* (1 - fold_offset)
  std::size_t fold_converged = 0;
  std::size_t fold_clusters = 0;
  std::vector<std::string> diagnostics;
};

/// Lower (minimal) and upper solutions at lambda*(1 - delta), and perturbed
/// Newton starts at the fold itself grouped into clusters.
CollapseReport extremal_uniqueness_probe(const ProblemSpec& spec, const std::vector<double>& deltas,
                                         const CollapseOptions& opt = {});
CollapseReport extremal_uniqueness_probe(const SystemSpec& spec, double sigma,
                                         const std::vector<double>& deltas,
                                         const CollapseOptions& opt = {});

}  // namespace gelfand

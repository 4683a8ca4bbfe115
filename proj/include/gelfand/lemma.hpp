#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gelfand/nonlinearity.hpp"

namespace gelfand {

/// An inequality lhs >= rhs "holds" when lhs - rhs >= -kInequalitySlack.
inline constexpr double kInequalitySlack = 1e-12;

enum class Classification { R, S, Neither };

const char* to_string(Classification c);

/// Decides membership in class (R) or (S) from samples. Throws RejectedInput
/// when a sample lies outside the nominal domain.
Classification classify(const Nonlinearity& nl, std::span<const double> samples);

/// t f(t) / F(t) for class R, f(t) / F(t) for class S. Throws at t = 0.
double superlinearity_ratio(const Nonlinearity& nl, double t);

/// 2N / (N - 4).
double supercritical_threshold(int dim);

struct SupercriticalCheck {
  bool supercritical = false;
  double threshold = 0.0;
  double min_ratio = 0.0;
  double margin = 0.0;  // min_ratio - threshold
};

/// Whether liminf t f / F exceeds 2N/(N-4), judged on the tail samples.
SupercriticalCheck supercritical_check(const Nonlinearity& nl, int dim, std::span<const double> tail);

/// Geometric-plus-linear grid on [0, t_max]: dense near zero, uniform further out.
std::vector<double> hybrid_grid(double t_max, std::size_t n_linear = 20001,
                                std::size_t n_geometric = 2000);

/// Checks mu^2 (f(t/mu) + eps) >= f(t) + eps/2 at one point, in log space when f overflows.
bool mu_r_inequality_holds(const Nonlinearity& nl, double mu, double eps, double t);
/// Index of the first grid point violating the (R) scaling inequality, if any.
std::optional<std::size_t> first_mu_r_violation(const Nonlinearity& nl, double mu, double eps,
                                                std::span<const double> t_grid);

/// Finds 0 < mu < 1 with mu^2 (f(t/mu) + eps) >= f(t) + eps/2 on the whole grid.
double find_mu_r(const Nonlinearity& nl, double eps, std::span<const double> t_grid);

/// k = max(0, sup_t N f(t) - f(t/mu)) + 1e-9, verified on the grid.
double find_k(const Nonlinearity& nl, double mu, int dim, std::span<const double> t_grid);
/// find_k on a default grid [0, t_max] where f(t_max) is finite.
double find_k(const Nonlinearity& nl, double mu, int dim);

/// Checks mu (f(t/mu) + eps) >= f(t) + eps/2 at each t. Throws SingularEvaluation
/// when some t/mu reaches the pole at 1.
bool mu_s_inequality_holds(const Nonlinearity& nl, double mu, double eps,
                           std::span<const double> t_points);

/// Finds mu for the (S) scaling inequality, verified on `n_grid` points of [0, mu).
double find_mu_s(const Nonlinearity& nl, double eps, std::size_t n_grid = 512);

/// True iff f'' > 0 at every grid point.
bool strict_convexity_check(const Nonlinearity& nl, std::span<const double> t_grid);

/// A single mu serving two nonlinearities: the larger of the two, re-verified for both.
double common_mu_r(const Nonlinearity& f, const Nonlinearity& g, double eps,
                   std::span<const double> t_grid);
double common_k(const Nonlinearity& f, const Nonlinearity& g, double mu, int dim);

}  // namespace gelfand

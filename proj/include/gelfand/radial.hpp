#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gelfand/banded.hpp"

namespace gelfand {

enum class BoundaryCondition {
  Dirichlet2,  // u = 0 (second order)
  Navier,      // u = Delta u = 0
  Dirichlet4,  // u = du/dnu = 0
};

const char* to_string(BoundaryCondition bc);

/// Uniform radial mesh r_i = i h, i = 0..M+1, on the unit ball in R^N.
///
/// Node 0 is the center, node M+1 the boundary. Each node owns the cell
/// [r_i - h/2, r_i + h/2] clipped to [0, 1]; `cell_volume(i)` is the exact
/// r^(N-1)-weighted measure of that cell. Copies share the precomputed tables.
class RadialGrid {
public:
  RadialGrid(int dim, std::size_t interior);

  int dim() const noexcept { return data_->dim; }
  std::size_t interior() const noexcept { return data_->m; }
  std::size_t nodes() const noexcept { return data_->m + 2; }
  /// Unknowns for boundary-value problems: nodes 0..M.
  std::size_t unknowns() const noexcept { return data_->m + 1; }
  double h() const noexcept { return data_->h; }
  double r(std::size_t i) const noexcept { return static_cast<double>(i) * data_->h; }

  /// int over the cell of r^(N-1) dr.
  double cell_volume(std::size_t i) const noexcept { return data_->volume[i]; }
  /// r_{i+1/2}^(N-1), the face factor between nodes i and i+1.
  double face(std::size_t i) const noexcept { return data_->face[i]; }
  /// N * cell_volume(i); these sum to 1, so <1, 1> = 1 in the induced inner product.
  std::span<const double> weights() const noexcept { return data_->weight; }

  /// |S^(N-1)| = N pi^(N/2) / Gamma(N/2 + 1).
  double surface_measure() const noexcept { return data_->omega; }
  double ball_volume() const noexcept { return data_->omega / data_->dim; }

  bool same_as(const RadialGrid& other) const noexcept {
    return dim() == other.dim() && interior() == other.interior();
  }

private:
  struct Data {
    int dim = 0;
    std::size_t m = 0;
    double h = 0.0;
    double omega = 0.0;
    std::vector<double> volume;
    std::vector<double> face;
    std::vector<double> weight;
  };
  std::shared_ptr<const Data> data_;
};

/// Nodal values on every node r_0..r_{M+1}.
struct RadialField {
  RadialGrid grid;
  std::vector<double> values;

  explicit RadialField(const RadialGrid& g) : grid(g), values(g.nodes(), 0.0) {}
  RadialField(const RadialGrid& g, std::vector<double> v);

  template <class Fn>
  static RadialField sample(const RadialGrid& g, Fn&& fn) {
    RadialField out(g);
    for (std::size_t i = 0; i < g.nodes(); ++i) out.values[i] = fn(g.r(i));
    return out;
  }

  /// Interior unknowns (nodes 0..M).
  std::span<const double> unknowns() const { return {values.data(), grid.unknowns()}; }
  std::span<double> unknowns() { return {values.data(), grid.unknowns()}; }
  double sup() const;
  double sup_abs() const;
};

/// Builds a field from interior unknowns, with the boundary node set to zero.
RadialField field_from_unknowns(const RadialGrid& g, std::span<const double> x);

/// Discrete -Delta (order 2) or Delta^2 (order 4) over the unknowns 0..M.
///
/// -Delta uses the conservative radial form
///   -(1/r^(N-1)) (r^(N-1) u')'
/// on the node cells, which reduces to -N u''(0) at the center and is exact on
/// quadratics in r. The Navier Delta^2 is the square of the Dirichlet -Delta and
/// linear solves apply that factor twice; the clamped Delta^2 adds the ghost-node
/// closure u_{M+2} = u_M to the same square.
class OperatorMatrix {
public:
  OperatorMatrix(RadialGrid grid, BoundaryCondition bc, BandedMatrix matrix,
                 std::optional<BandedMatrix> factor);

  const RadialGrid& grid() const noexcept { return grid_; }
  BoundaryCondition bc() const noexcept { return bc_; }
  int order() const noexcept { return bc_ == BoundaryCondition::Dirichlet2 ? 2 : 4; }
  const BandedMatrix& matrix() const noexcept { return matrix_; }
  std::size_t size() const noexcept { return matrix_.size(); }

  void apply(std::span<const double> x, std::span<double> y) const { matrix_.apply(x, y); }
  std::vector<double> apply(std::span<const double> x) const { return matrix_.apply(x); }
  /// Solves L x = b (in place). Navier goes through two second-order solves.
  void solve_in_place(std::span<double> b) const;
  std::vector<double> solve(std::span<const double> b) const;

  /// Applies the operator to a full field (boundary entries are ignored) and
  /// returns the result as a field with zero boundary entry.
  RadialField apply(const RadialField& u) const;

private:
  RadialGrid grid_;
  BoundaryCondition bc_;
  BandedMatrix matrix_;
  std::shared_ptr<const BandedLU> lu_;         // factorization of matrix_
  std::shared_ptr<const BandedLU> factor_lu_;  // second-order factor (Navier)
};

OperatorMatrix laplacian(const RadialGrid& grid);
/// Throws RejectedInput for grids too small for the five-point stencil.
OperatorMatrix bilaplacian(const RadialGrid& grid, BoundaryCondition bc);
OperatorMatrix make_operator(const RadialGrid& grid, BoundaryCondition bc);

/// omega_{N-1} sum_i V_i w_i: the cell quadrature of int_Omega w dx.
double integrate(const RadialField& w);
/// Same quadrature for a raw nodal array on `grid`.
double integrate(const RadialGrid& grid, std::span<const double> w);

/// u'(r): central differences inside, second-order one-sided at both ends.
RadialField radial_derivative(const RadialField& u);
/// Second-order one-sided u'(1).
double boundary_derivative(const RadialField& u);
/// Delta u at every node using the field's own boundary value; the last node
/// uses one-sided second-order stencils.
RadialField laplacian_field(const RadialField& u);

/// Cubic interpolation onto the grid with 2M + 1 interior nodes (h -> h/2).
RadialField prolong(const RadialField& u);

/// <a, b> = sum_i w_i a_i b_i over the unknowns, with the normalized weights.
double weighted_dot(const RadialGrid& grid, std::span<const double> a, std::span<const double> b);
double weighted_norm(const RadialGrid& grid, std::span<const double> a);

/// order * log(1/h). Large solutions of the exponential problems concentrate in
/// a core of width about e^{-sup/order}; past this sup the core is below one cell.
double resolved_sup(const RadialGrid& grid, int order);

}  // namespace gelfand

#include "gelfand/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gelfand/error.hpp"

namespace gelfand {

const char* to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::Dirichlet2: return "dirichlet2";
    case BoundaryCondition::Navier: return "navier";
    case BoundaryCondition::Dirichlet4: return "dirichlet4";
  }
  return "?";
}

RadialGrid::RadialGrid(int dim, std::size_t interior) {
  if (dim < 1) throw Error(ErrorKind::RejectedInput, "dimension must be >= 1");
  if (interior < 16) throw Error(ErrorKind::RejectedInput, "grid needs at least 16 interior nodes");
  auto d = std::make_shared<Data>();
  d->dim = dim;
  d->m = interior;
  d->h = 1.0 / static_cast<double>(interior + 1);
  const double n = dim;
  d->omega = n * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);

  const std::size_t nodes = interior + 2;
  d->volume.resize(nodes);
  d->face.resize(nodes);
  d->weight.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double a = i == 0 ? 0.0 : (static_cast<double>(i) - 0.5) * d->h;
    const double b = std::min(1.0, (static_cast<double>(i) + 0.5) * d->h);
    d->volume[i] = (std::pow(b, n) - std::pow(a, n)) / n;
    d->face[i] = std::pow((static_cast<double>(i) + 0.5) * d->h, n - 1.0);
    d->weight[i] = n * d->volume[i];
  }
  data_ = std::move(d);
}

RadialField::RadialField(const RadialGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.nodes()) {
    throw Error(ErrorKind::RejectedInput, "field has " + std::to_string(values.size()) +
                                              " values, grid has " + std::to_string(g.nodes()) +
                                              " nodes");
  }
}

double RadialField::sup() const { return *std::max_element(values.begin(), values.end()); }

double RadialField::sup_abs() const {
  double s = 0.0;
  for (double x : values) s = std::max(s, std::abs(x));
  return s;
}

RadialField field_from_unknowns(const RadialGrid& g, std::span<const double> x) {
  RadialField out(g);
  std::copy_n(x.begin(), std::min(x.size(), g.unknowns()), out.values.begin());
  return out;
}

OperatorMatrix::OperatorMatrix(RadialGrid grid, BoundaryCondition bc, BandedMatrix matrix,
                               std::optional<BandedMatrix> factor)
    : grid_(std::move(grid)), bc_(bc), matrix_(std::move(matrix)) {
  if (factor) {
    factor_lu_ = std::make_shared<const BandedLU>(*factor);
  } else {
    lu_ = std::make_shared<const BandedLU>(matrix_);
  }
}

void OperatorMatrix::solve_in_place(std::span<double> b) const {
  if (factor_lu_) {
    factor_lu_->solve_in_place(b);
    factor_lu_->solve_in_place(b);
  } else {
    lu_->solve_in_place(b);
  }
}

std::vector<double> OperatorMatrix::solve(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

RadialField OperatorMatrix::apply(const RadialField& u) const {
  RadialField out(grid_);
  matrix_.apply(u.unknowns(), out.unknowns());
  return out;
}

namespace {

BandedMatrix dirichlet_laplacian(const RadialGrid& g) {
  const std::size_t n = g.unknowns();
  const double h = g.h();
  BandedMatrix a(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = 1.0 / (h * g.cell_volume(i));
    const double right = g.face(i) * scale;
    const double left = i == 0 ? 0.0 : g.face(i - 1) * scale;
    a.ref(i, i) = left + right;
    if (i > 0) a.ref(i, i - 1) = -left;
    if (i + 1 < n) a.ref(i, i + 1) = -right;
  }
  return a;
}

}  // namespace

OperatorMatrix laplacian(const RadialGrid& grid) {
  return OperatorMatrix(grid, BoundaryCondition::Dirichlet2, dirichlet_laplacian(grid), std::nullopt);
}

OperatorMatrix bilaplacian(const RadialGrid& grid, BoundaryCondition bc) {
  if (bc == BoundaryCondition::Dirichlet2) {
    throw Error(ErrorKind::RejectedInput, "bilaplacian needs a fourth-order boundary condition");
  }
  if (grid.interior() < 32) {
    throw Error(ErrorKind::RejectedInput, "fourth-order stencil needs at least 32 interior nodes");
  }
  BandedMatrix a = dirichlet_laplacian(grid);
  BandedMatrix b = a.multiply(a);
  if (bc == BoundaryCondition::Navier) {
    return OperatorMatrix(grid, bc, std::move(b), std::move(a));
  }
  // Ghost closure u_{M+2} = u_M gives -Delta u at r = 1 equal to -2 u_M / h^2;
  // feeding that into the last -Delta row adds one diagonal term.
  const std::size_t m = grid.interior();
  const double h = grid.h();
  b.ref(m, m) += 2.0 * grid.face(m) / (h * h * h * grid.cell_volume(m));
  return OperatorMatrix(grid, bc, std::move(b), std::nullopt);
}

OperatorMatrix make_operator(const RadialGrid& grid, BoundaryCondition bc) {
  return bc == BoundaryCondition::Dirichlet2 ? laplacian(grid) : bilaplacian(grid, bc);
}

double integrate(const RadialGrid& grid, std::span<const double> w) {
  if (w.size() != grid.nodes()) {
    throw Error(ErrorKind::RejectedInput, "quadrature input does not match the grid");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += grid.cell_volume(i) * w[i];
  return grid.surface_measure() * acc;
}

double integrate(const RadialField& w) { return integrate(w.grid, w.values); }

RadialField radial_derivative(const RadialField& u) {
  const auto& g = u.grid;
  const auto& x = u.values;
  const std::size_t last = g.nodes() - 1;
  const double h = g.h();
  RadialField out(g);
  out.values[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * h);
  for (std::size_t i = 1; i < last; ++i) out.values[i] = (x[i + 1] - x[i - 1]) / (2.0 * h);
  out.values[last] = boundary_derivative(u);
  return out;
}

double boundary_derivative(const RadialField& u) {
  const auto& x = u.values;
  const std::size_t last = x.size() - 1;
  return (3.0 * x[last] - 4.0 * x[last - 1] + x[last - 2]) / (2.0 * u.grid.h());
}

RadialField laplacian_field(const RadialField& u) {
  const auto& g = u.grid;
  const auto& x = u.values;
  const std::size_t last = g.nodes() - 1;
  const double h = g.h();
  RadialField out(g);
  for (std::size_t i = 0; i < last; ++i) {
    const double right = g.face(i) * (x[i + 1] - x[i]);
    const double left = i == 0 ? 0.0 : g.face(i - 1) * (x[i] - x[i - 1]);
    out.values[i] = (right - left) / (h * g.cell_volume(i));
  }
  const double upp =
      (2.0 * x[last] - 5.0 * x[last - 1] + 4.0 * x[last - 2] - x[last - 3]) / (h * h);
  out.values[last] = upp + (g.dim() - 1) * boundary_derivative(u);
  return out;
}

RadialField prolong(const RadialField& u) {
  const auto& g = u.grid;
  const RadialGrid fine(g.dim(), 2 * g.interior() + 1);
  const auto& x = u.values;
  const long last = static_cast<long>(g.nodes()) - 1;
  // Even reflection through the center; beyond the boundary, cubic extrapolation.
  auto value = [&](long i) {
    if (i < 0) return x[static_cast<std::size_t>(-i)];
    if (i > last) {
      const auto k = static_cast<std::size_t>(last);
      return 4.0 * x[k] - 6.0 * x[k - 1] + 4.0 * x[k - 2] - x[k - 3];
    }
    return x[static_cast<std::size_t>(i)];
  };
  RadialField out(fine);
  for (long i = 0; i <= last; ++i) out.values[static_cast<std::size_t>(2 * i)] = x[static_cast<std::size_t>(i)];
  for (long i = 0; i < last; ++i) {
    out.values[static_cast<std::size_t>(2 * i + 1)] =
        (-value(i - 1) + 9.0 * value(i) + 9.0 * value(i + 1) - value(i + 2)) / 16.0;
  }
  return out;
}

double weighted_dot(const RadialGrid& grid, std::span<const double> a, std::span<const double> b) {
  const auto w = grid.weights();
  const std::size_t n = std::min(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

double weighted_norm(const RadialGrid& grid, std::span<const double> a) {
  return std::sqrt(weighted_dot(grid, a, a));
}

double resolved_sup(const RadialGrid& grid, int order) { return -order * std::log(grid.h()); }

}  // namespace gelfand

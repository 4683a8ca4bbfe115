#include "gelfand/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <lapacke.h>

#include "gelfand/error.hpp"

namespace gelfand {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), data_(n * (kl + ku + 1), 0.0) {}

double BandedMatrix::at(std::size_t i, std::size_t j) const noexcept {
  if (i >= n_ || j >= n_ || !in_band(i, j)) return 0.0;
  return data_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

double& BandedMatrix::ref(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_ || !in_band(i, j)) {
    throw Error(ErrorKind::InternalConsistency,
                "banded access (" + std::to_string(i) + ", " + std::to_string(j) + ") outside band");
  }
  return data_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

void BandedMatrix::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t w = kl_ + ku_ + 1;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i >= kl_ ? i - kl_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + ku_);
    double acc = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) {
      acc += data_[i * w + (j + kl_ - i)] * x[j];
    }
    y[i] = acc;
  }
}

std::vector<double> BandedMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(n_);
  apply(x, y);
  return y;
}

void BandedMatrix::add_diagonal(std::span<const double> d) {
  for (std::size_t i = 0; i < n_; ++i) ref(i, i) += d[i];
}

void BandedMatrix::shift_diagonal(double s) {
  for (std::size_t i = 0; i < n_; ++i) ref(i, i) += s;
}

BandedMatrix BandedMatrix::multiply(const BandedMatrix& other) const {
  BandedMatrix out(n_, kl_ + other.kl_, ku_ + other.ku_);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t k0 = i >= kl_ ? i - kl_ : 0;
    const std::size_t k1 = std::min(n_ - 1, i + ku_);
    for (std::size_t k = k0; k <= k1; ++k) {
      const double a = at(i, k);
      if (a == 0.0) continue;
      const std::size_t j0 = k >= other.kl_ ? k - other.kl_ : 0;
      const std::size_t j1 = std::min(n_ - 1, k + other.ku_);
      for (std::size_t j = j0; j <= j1; ++j) {
        out.ref(i, j) += a * other.at(k, j);
      }
    }
  }
  return out;
}

BandedMatrix BandedMatrix::widened(std::size_t kl, std::size_t ku) const {
  BandedMatrix out(n_, std::max(kl, kl_), std::max(ku, ku_));
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i >= kl_ ? i - kl_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + ku_);
    for (std::size_t j = j0; j <= j1; ++j) out.ref(i, j) = at(i, j);
  }
  return out;
}

double BandedMatrix::max_row_sum() const {
  double best = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    const std::size_t j0 = i >= kl_ ? i - kl_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + ku_);
    for (std::size_t j = j0; j <= j1; ++j) s += std::abs(at(i, j));
    best = std::max(best, s);
  }
  return best;
}

BandedLU::BandedLU(const BandedMatrix& a)
    : n_(a.size()), kl_(a.lower()), ku_(a.upper()), ipiv_(a.size()) {
  const std::size_t ldab = 2 * kl_ + ku_ + 1;
  ab_.assign(ldab * n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t i0 = j >= ku_ ? j - ku_ : 0;
    const std::size_t i1 = std::min(n_ - 1, j + kl_);
    for (std::size_t i = i0; i <= i1; ++i) {
      ab_[j * ldab + (kl_ + ku_ + i - j)] = a.at(i, j);
    }
  }
  const auto n = static_cast<lapack_int>(n_);
  const lapack_int info =
      LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, static_cast<lapack_int>(kl_),
                     static_cast<lapack_int>(ku_), ab_.data(), static_cast<lapack_int>(ldab),
                     ipiv_.data());
  if (info != 0) {
    throw Error(ErrorKind::SingularEvaluation,
                "banded LU failed (info = " + std::to_string(info) + ")");
  }
}

void BandedLU::solve_in_place(std::span<double> rhs) const {
  const std::size_t ldab = 2 * kl_ + ku_ + 1;
  const auto n = static_cast<lapack_int>(n_);
  const lapack_int info = LAPACKE_dgbtrs(
      LAPACK_COL_MAJOR, 'N', n, static_cast<lapack_int>(kl_), static_cast<lapack_int>(ku_), 1,
      ab_.data(), static_cast<lapack_int>(ldab), ipiv_.data(), rhs.data(), n);
  if (info != 0) {
    throw Error(ErrorKind::InternalConsistency, "banded solve failed");
  }
}

std::vector<double> BandedLU::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

}  // namespace gelfand

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gelfand {

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
class BandedMatrix {
public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

  std::size_t size() const noexcept { return n_; }
  std::size_t lower() const noexcept { return kl_; }
  std::size_t upper() const noexcept { return ku_; }

  bool in_band(std::size_t i, std::size_t j) const noexcept {
    return j + kl_ >= i && j <= i + ku_;
  }
  /// Zero outside the band.
  double at(std::size_t i, std::size_t j) const noexcept;
  /// Mutable access; (i, j) must lie inside the band.
  double& ref(std::size_t i, std::size_t j);

  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;

  void add_diagonal(std::span<const double> d);
  void shift_diagonal(double s);

  /// Product this * other; the band widths add.
  BandedMatrix multiply(const BandedMatrix& other) const;
  /// Copy with band widths widened to (kl, ku) >= the current ones.
  BandedMatrix widened(std::size_t kl, std::size_t ku) const;

  double max_row_sum() const;

private:
  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::vector<double> data_;  // row-major: row i holds columns i-kl .. i+ku
};

/// LU factorization with partial pivoting (LAPACK gbtrf/gbtrs).
class BandedLU {
public:
  explicit BandedLU(const BandedMatrix& a);

  std::size_t size() const noexcept { return n_; }
  void solve_in_place(std::span<double> rhs) const;
  std::vector<double> solve(std::span<const double> rhs) const;

private:
  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::vector<double> ab_;  // LAPACK column-major band storage, ldab = 2 kl + ku + 1
  std::vector<int> ipiv_;
};

}  // namespace gelfand

#pragma once

// Data-parallel kernels used by the scans and parameter sweeps. Every kernel
// has a serial reference with identical semantics; the OpenMP variant is
// deterministic (ties broken by lowest flat index) so the two agree bitwise.

#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <vector>

#include <omp.h>

namespace gelfand::kernels {

struct GridMin {
  double value = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t count = 0;  // samples evaluated
};

namespace detail {

// NaN ranks below everything so a poisoned sample is never hidden.
inline bool precedes(double a, std::size_t flat_a, double b, std::size_t flat_b) {
  const bool na = std::isnan(a);
  const bool nb = std::isnan(b);
  if (na != nb) return na;
  if (!na && a != b) return a < b;
  return flat_a < flat_b;
}

}  // namespace detail

/// Minimum of fn(i, j) over [0, ni) x [0, nj), skipping samples where skip(i, j) holds.
template <class Fn, class Skip>
GridMin grid_min_serial(std::size_t ni, std::size_t nj, Fn&& fn, Skip&& skip) {
  GridMin best;
  std::size_t best_flat = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t j = 0; j < nj; ++j) {
      if (skip(i, j)) continue;
      const double v = fn(i, j);
      ++best.count;
      const std::size_t flat = i * nj + j;
      if (best_flat == std::numeric_limits<std::size_t>::max() ||
          detail::precedes(v, flat, best.value, best_flat)) {
        best.value = v;
        best.i = i;
        best.j = j;
        best_flat = flat;
      }
    }
  }
  return best;
}

template <class Fn, class Skip>
GridMin grid_min(std::size_t ni, std::size_t nj, Fn&& fn, Skip&& skip) {
  const auto none = std::numeric_limits<std::size_t>::max();
  GridMin best;
  std::size_t best_flat = none;
#pragma omp parallel
  {
    GridMin local;
    std::size_t local_flat = none;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(ni); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      for (std::size_t j = 0; j < nj; ++j) {
        if (skip(i, j)) continue;
        const double v = fn(i, j);
        ++local.count;
        const std::size_t flat = i * nj + j;
        if (local_flat == none || detail::precedes(v, flat, local.value, local_flat)) {
          local.value = v;
          local.i = i;
          local.j = j;
          local_flat = flat;
        }
      }
    }
#pragma omp critical(gelfand_grid_min)
    {
      best.count += local.count;
      if (local_flat != none &&
          (best_flat == none || detail::precedes(local.value, local_flat, best.value, best_flat))) {
        best.value = local.value;
        best.i = local.i;
        best.j = local.j;
        best_flat = local_flat;
      }
    }
  }
  return best;
}

template <class Fn>
GridMin grid_min_serial(std::size_t ni, std::size_t nj, Fn&& fn) {
  return grid_min_serial(ni, nj, fn, [](std::size_t, std::size_t) { return false; });
}

template <class Fn>
GridMin grid_min(std::size_t ni, std::size_t nj, Fn&& fn) {
  return grid_min(ni, nj, fn, [](std::size_t, std::size_t) { return false; });
}

/// Per-row minimum of fn(i, j) over j.
template <class Fn>
std::vector<double> row_min_serial(std::size_t ni, std::size_t nj, Fn&& fn) {
  std::vector<double> out(ni, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t j = 0; j < nj; ++j) {
      const double v = fn(i, j);
      if (detail::precedes(v, 0, out[i], 1)) out[i] = v;
    }
  }
  return out;
}

template <class Fn>
std::vector<double> row_min(std::size_t ni, std::size_t nj, Fn&& fn) {
  std::vector<double> out(ni, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(ni); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nj; ++j) {
      const double v = fn(i, j);
      if (detail::precedes(v, 0, m, 1)) m = v;
    }
    out[i] = m;
  }
  return out;
}

/// Runs independent tasks fn(k), k in [0, n), with dynamic scheduling. The
/// first exception (by task index) is rethrown after all tasks finish.
template <class Fn>
void parallel_tasks(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(n); ++kk) {
    try {
      fn(static_cast<std::size_t>(kk));
    } catch (...) {
      errors[static_cast<std::size_t>(kk)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class Fn>
void serial_tasks(std::size_t n, Fn&& fn) {
  for (std::size_t k = 0; k < n; ++k) fn(k);
}

}  // namespace gelfand::kernels

#include "gelfand/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <lapacke.h>

#include "gelfand/error.hpp"

namespace gelfand {

namespace {

// Upper band of a symmetric matrix in LAPACK column-major storage (ldab = kd + 1).
struct SymBand {
  std::size_t n = 0;
  std::size_t kd = 0;
  std::vector<double> ab;

  double& at(std::size_t i, std::size_t j) { return ab[j * (kd + 1) + (kd + i - j)]; }  // i <= j
};

SymBand symmetrize(const BandedMatrix& a, std::span<const double> w) {
  SymBand s;
  s.n = a.size();
  s.kd = std::max(a.lower(), a.upper());
  s.ab.assign((s.kd + 1) * s.n, 0.0);
  for (std::size_t j = 0; j < s.n; ++j) {
    const std::size_t i0 = j >= s.kd ? j - s.kd : 0;
    for (std::size_t i = i0; i <= j; ++i) {
      const double upper = std::sqrt(w[i] / w[j]) * a.at(i, j);
      const double lower = std::sqrt(w[j] / w[i]) * a.at(j, i);
      s.at(i, j) = 0.5 * (upper + lower);
    }
  }
  return s;
}

double gershgorin_lower(SymBand& s) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.n; ++i) {
    double off = 0.0;
    const std::size_t j0 = i >= s.kd ? i - s.kd : 0;
    const std::size_t j1 = std::min(s.n - 1, i + s.kd);
    for (std::size_t j = j0; j <= j1; ++j) {
      if (j == i) continue;
      off += std::abs(j > i ? s.at(i, j) : s.at(j, i));
    }
    lo = std::min(lo, s.at(i, i) - off);
  }
  return lo;
}

double gershgorin_upper(SymBand& s) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.n; ++i) {
    double off = 0.0;
    const std::size_t j0 = i >= s.kd ? i - s.kd : 0;
    const std::size_t j1 = std::min(s.n - 1, i + s.kd);
    for (std::size_t j = j0; j <= j1; ++j) {
      if (j == i) continue;
      off += std::abs(j > i ? s.at(i, j) : s.at(j, i));
    }
    hi = std::max(hi, s.at(i, i) + off);
  }
  return hi;
}

// Cholesky of S - sigma I in place of `work`; succeeds iff S - sigma I is positive definite.
bool factor_shifted(const SymBand& s, double sigma, std::vector<double>& work) {
  work = s.ab;
  for (std::size_t j = 0; j < s.n; ++j) work[j * (s.kd + 1) + s.kd] -= sigma;
  const lapack_int info =
      LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'U', static_cast<lapack_int>(s.n), static_cast<lapack_int>(s.kd),
                     work.data(), static_cast<lapack_int>(s.kd + 1));
  return info == 0;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

EigenResult smallest_eigenvalue(const BandedMatrix& a, std::span<const double> weights,
                                const EigenOptions& opt) {
  const std::size_t n = a.size();
  if (weights.size() < n) throw Error(ErrorKind::RejectedInput, "eigen weights too short");
  SymBand s = symmetrize(a, weights);

  // Bracket the bottom of the spectrum by definiteness tests, then let inverse
  // iteration with the lower end as shift finish in a few steps.
  double lo = gershgorin_lower(s);
  double hi = gershgorin_upper(s);
  const double span = std::max(hi - lo, 1e-300);
  lo -= 1e-3 * span;
  std::vector<double> chol;
  if (!factor_shifted(s, lo, chol)) {
    throw Error(ErrorKind::Eigensolver, "shift below the Gershgorin bound is not definite");
  }
  for (int k = 0; k < 200 && hi - lo > 1e-10 * span; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (factor_shifted(s, mid, chol)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Keep the shift strictly below the eigenvalue so the factor stays definite.
  double shift = lo - 1e-9 * span;
  if (!factor_shifted(s, shift, chol)) {
    throw Error(ErrorKind::Eigensolver, "shifted factorization lost definiteness");
  }

  std::vector<double> y(n, 1.0), sy(n);
  auto normalize = [&] {
    const double nrm = std::sqrt(dot(y, y));
    for (double& v : y) v /= nrm;
  };
  auto apply_s = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const std::size_t j0 = i >= s.kd ? i - s.kd : 0;
      const std::size_t j1 = std::min(n - 1, i + s.kd);
      for (std::size_t j = j0; j <= j1; ++j) acc += (j >= i ? s.at(i, j) : s.at(j, i)) * in[j];
      out[i] = acc;
    }
  };
  normalize();

  EigenResult out;
  double rho = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= opt.max_iters; ++it) {
    const lapack_int info = LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'U', static_cast<lapack_int>(n),
                                           static_cast<lapack_int>(s.kd), 1, chol.data(),
                                           static_cast<lapack_int>(s.kd + 1), y.data(),
                                           static_cast<lapack_int>(n));
    if (info != 0) throw Error(ErrorKind::Eigensolver, "shifted solve failed");
    normalize();
    apply_s(y, sy);
    const double next = dot(y, sy);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(sy[i] - next * y[i]));
    // Changes below the rounding level of S itself count as settled.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * span;
    const bool settled = std::abs(next - rho) <= opt.tol * (1.0 + std::abs(next)) + noise;
    rho = next;
    if (settled && res <= 1e-6 * span) {
      out.iterations = it;
      out.value = rho;
      out.vector.resize(n);
      for (std::size_t i = 0; i < n; ++i) out.vector[i] = y[i] / std::sqrt(weights[i]);
      if (out.vector[0] < 0.0) {
        for (double& v : out.vector) v = -v;
      }
      return out;
    }
  }
  throw Error(ErrorKind::Eigensolver,
              "inverse iteration stagnated after " + std::to_string(opt.max_iters) + " iterations");
}

}  // namespace gelfand

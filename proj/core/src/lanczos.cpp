#include "spac/lanczos.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "spac/errors.hpp"

namespace spac {

namespace {

struct RitzRange {
  Vector values;
  Matrix vectors;  // in the Krylov basis
};

RitzRange tridiagonal_eigs(const Vector& alpha, const Vector& beta, int m, int il, int iu) {
  RitzRange out;
  const int count = iu - il + 1;
  if (count <= 0) {
    out.values.resize(0);
    out.vectors.resize(m, 0);
    return out;
  }
  Vector d = alpha.head(m);
  Vector e = Vector::Zero(m);
  if (m > 1) e.head(m - 1) = beta.head(m - 1);
  Vector w(m);
  out.vectors.resize(m, count);
  lapack_int found = 0;
  lapack_int tryrac = 1;
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
  const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', m, d.data(), e.data(), 0.0,
                                         0.0, il, iu, &found, w.data(), out.vectors.data(), m,
                                         count, isuppz.data(), &tryrac);
  if (info != 0 || found != count) {
    throw ConvergenceFailure("tridiagonal eigensolve failed: info=" + std::to_string(info));
  }
  out.values = w.head(count);
  return out;
}

Vector random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v.normalized();
}

}  // namespace

LanczosResult lanczos_extremes(const Matrix& a, int k_low, int k_high,
                               const LanczosOptions& options) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw ShapeMismatch("Lanczos needs a square matrix");
  if (k_low < 0 || k_high < 0 || k_low + k_high > n) {
    throw InvalidArgument("invalid Lanczos selection");
  }
  LanczosResult result;
  if (k_low + k_high == 0) {
    result.eigenvalues.resize(0);
    result.eigenvectors.resize(n, 0);
    return result;
  }
  const int max_dim = options.max_dim > 0 ? std::min(options.max_dim, n) : n;
  const double anorm = std::max(a.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const double breakdown = 1e-12 * anorm;
  const int check_every = std::max(1, options.check_every);

  std::mt19937_64 rng(options.seed);
  Matrix q(n, max_dim);
  Vector alpha(max_dim);
  Vector beta = Vector::Zero(max_dim);
  Vector v = random_unit(n, rng);
  int last_restart = 0;

  for (int j = 0; j < max_dim; ++j) {
    q.col(j) = v;
    Vector w = a * v;
    alpha(j) = v.dot(w);
    w -= alpha(j) * v;
    if (j > 0) w -= beta(j - 1) * q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector h = q.leftCols(j + 1).transpose() * w;
      w -= q.leftCols(j + 1) * h;
    }
    beta(j) = w.norm();
    const int m = j + 1;

    const bool exhausted = m == n;
    const bool due = m >= k_low + k_high && m - last_restart >= check_every &&
                     (m % check_every == 0 || m == max_dim);
    if (exhausted || due) {
      RitzRange low = tridiagonal_eigs(alpha, beta, m, 1, k_low);
      RitzRange high = tridiagonal_eigs(alpha, beta, m, m - k_high + 1, m);
      bool converged = exhausted;
      if (!converged) {
        const double limit = options.tol * anorm;
        converged = true;
        for (Eigen::Index c = 0; c < low.vectors.cols() && converged; ++c) {
          converged = std::abs(beta(j) * low.vectors(m - 1, c)) <= limit;
        }
        for (Eigen::Index c = 0; c < high.vectors.cols() && converged; ++c) {
          converged = std::abs(beta(j) * high.vectors(m - 1, c)) <= limit;
        }
      }
      if (converged) {
        result.krylov_dim = m;
        result.eigenvalues.resize(k_low + k_high);
        result.eigenvalues.head(k_low) = low.values;
        result.eigenvalues.tail(k_high) = high.values;
        result.eigenvectors.resize(n, k_low + k_high);
        result.eigenvectors.leftCols(k_low) = q.leftCols(m) * low.vectors;
        result.eigenvectors.rightCols(k_high) = q.leftCols(m) * high.vectors;
        for (Eigen::Index c = 0; c < result.eigenvectors.cols(); ++c) {
          result.eigenvectors.col(c).normalize();
        }
        return result;
      }
    }
    if (m == max_dim) break;

    if (beta(j) <= breakdown) {
      // Invariant subspace: continue in its orthogonal complement.
      beta(j) = 0.0;
      Vector fresh;
      do {
        fresh = random_unit(n, rng);
        for (int pass = 0; pass < 2; ++pass) {
          fresh -= q.leftCols(m) * (q.leftCols(m).transpose() * fresh);
        }
      } while (fresh.norm() < 1e-8);
      v = fresh.normalized();
      last_restart = m;
    } else {
      v = w / beta(j);
    }
  }
  throw ConvergenceFailure("Lanczos did not converge within " + std::to_string(max_dim) +
                           " vectors (n=" + std::to_string(n) + ")");
}

}  // namespace spac

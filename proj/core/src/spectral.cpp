#include "spac/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "spac/errors.hpp"

namespace spac {

namespace {

void require_symmetric(const Matrix& l) {
  if (l.rows() != l.cols()) throw ShapeMismatch("matrix must be square");
  const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
  if ((l - l.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("matrix is not symmetric within 1e-10");
  }
}

void fix_signs(Matrix& u) {
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index arg = 0;
    u.col(k).cwiseAbs().maxCoeff(&arg);
    if (u(arg, k) < 0.0) u.col(k) = -u.col(k);
  }
}

std::string condition_diagnostics(const Matrix& l) {
  return "n=" + std::to_string(l.rows()) +
         ", max|entry|=" + std::to_string(l.cwiseAbs().maxCoeff()) +
         ", finite=" + (l.allFinite() ? "yes" : "no");
}

std::vector<int> selection_indices(int n, int k1, int k2) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(k1 + k2));
  for (int i = 0; i < k1; ++i) idx.push_back(i);
  for (int i = n - k2; i < n; ++i) idx.push_back(i);
  return idx;
}

void validate_selection(const Matrix& l, int k1, int k2) {
  if (k1 < 0 || k2 < 0) throw InvalidArgument("k1 and k2 must be non-negative");
  if (k1 + k2 > l.rows()) {
    throw InvalidArgument("k1 + k2 = " + std::to_string(k1 + k2) + " exceeds n = " +
                          std::to_string(l.rows()));
  }
}

constexpr double kBoundaryTie = 1e-8;

// Tridiagonal reduction shared by the range solver.
struct Tridiagonal {
  Matrix reflectors;
  Vector diag;
  Vector offdiag;
  Vector tau;
};

Tridiagonal reduce(const Matrix& l) {
  const lapack_int n = static_cast<lapack_int>(l.rows());
  Tridiagonal t{l, Vector(n), Vector(std::max<lapack_int>(n - 1, 1)),
                Vector(std::max<lapack_int>(n - 1, 1))};
  const lapack_int info = LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, t.reflectors.data(), n,
                                         t.diag.data(), t.offdiag.data(), t.tau.data());
  if (info != 0) throw ConvergenceFailure("dsytrd failed: info=" + std::to_string(info));
  return t;
}

// Eigenpairs il..iu (1-based, inclusive) of the tridiagonal; vectors in the
// tridiagonal basis when `vectors` is non-null.
Vector tridiagonal_range(const Tridiagonal& t, lapack_int il, lapack_int iu, Matrix* vectors) {
  const lapack_int n = static_cast<lapack_int>(t.diag.size());
  Vector d = t.diag;
  Vector e(n);
  e.setZero();
  if (n > 1) e.head(n - 1) = t.offdiag.head(n - 1);
  const lapack_int count = iu - il + 1;
  Vector w(n);
  lapack_int m = 0;
  lapack_int tryrac = 1;
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(std::max<lapack_int>(count, 1)));
  Matrix z;
  lapack_int info = 0;
  if (vectors != nullptr) {
    z.resize(n, count);
    info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, il, iu,
                          &m, w.data(), z.data(), n, count, isuppz.data(), &tryrac);
  } else {
    double dummy = 0.0;
    info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'N', 'I', n, d.data(), e.data(), 0.0, 0.0, il, iu,
                          &m, w.data(), &dummy, 1, count, isuppz.data(), &tryrac);
  }
  if (info != 0 || m != count) {
    throw ConvergenceFailure("dstemr failed: info=" + std::to_string(info) +
                             ", found=" + std::to_string(m) + "/" + std::to_string(count));
  }
  if (vectors != nullptr) *vectors = std::move(z);
  return w.head(count);
}

void back_transform(const Tridiagonal& t, Matrix& z) {
  const lapack_int n = static_cast<lapack_int>(t.diag.size());
  if (z.cols() == 0 || n < 2) return;
  const lapack_int info =
      LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, static_cast<lapack_int>(z.cols()),
                     t.reflectors.data(), n, t.tau.data(), z.data(), n);
  if (info != 0) throw ConvergenceFailure("dormtr failed: info=" + std::to_string(info));
}

SpectralBasis selective_from_full(const Matrix& l, int k1, int k2) {
  SpectralBasis full = eig_full(l);
  const int n = full.size();
  SpectralBasis out;
  out.selection = Selection::kSelective;
  out.k1 = k1;
  out.k2 = k2;
  out.indices = selection_indices(n, k1, k2);
  out.eigenvalues.resize(k1 + k2);
  out.eigenvectors.resize(n, k1 + k2);
  for (int c = 0; c < k1 + k2; ++c) {
    out.eigenvalues(c) = full.eigenvalues(out.indices[c]);
    out.eigenvectors.col(c) = full.eigenvectors.col(out.indices[c]);
  }
  if (k1 > 0 && k1 < n - k2 &&
      std::abs(full.eigenvalues(k1) - full.eigenvalues(k1 - 1)) < kBoundaryTie) {
    out.degenerate_boundary = true;
  }
  if (k2 > 0 && n - k2 - 1 >= k1 &&
      std::abs(full.eigenvalues(n - k2) - full.eigenvalues(n - k2 - 1)) < kBoundaryTie) {
    out.degenerate_boundary = true;
  }
  return out;
}

SelectiveSolver resolve(const SelectiveOptions& options, Eigen::Index n) {
  if (options.solver != SelectiveSolver::kAuto) return options.solver;
  return n <= options.dense_cutoff ? SelectiveSolver::kDense : SelectiveSolver::kRange;
}

}  // namespace

SpectralBasis eig_full(const Matrix& l) {
  require_symmetric(l);
  const lapack_int n = static_cast<lapack_int>(l.rows());
  SpectralBasis basis;
  basis.eigenvectors = l;
  basis.eigenvalues.resize(n);
  if (n > 0) {
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                           basis.eigenvectors.data(), n,
                                           basis.eigenvalues.data());
    if (info != 0) {
      throw ConvergenceFailure("dsyevd failed (info=" + std::to_string(info) + "): " +
                               condition_diagnostics(l));
    }
  }
  fix_signs(basis.eigenvectors);
  basis.selection = Selection::kFull;
  basis.indices.resize(static_cast<std::size_t>(n));
  for (lapack_int i = 0; i < n; ++i) basis.indices[static_cast<std::size_t>(i)] = i;
  return basis;
}

Vector eigenvalues_full(const Matrix& l) {
  require_symmetric(l);
  const lapack_int n = static_cast<lapack_int>(l.rows());
  Matrix work = l;
  Vector w(n);
  if (n > 0) {
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n,
                                           w.data());
    if (info != 0) {
      throw ConvergenceFailure("dsyevd failed (info=" + std::to_string(info) + "): " +
                               condition_diagnostics(l));
    }
  }
  return w;
}

SpectralBasis eig_selective(const Matrix& l, int k1, int k2, const SelectiveOptions& options) {
  require_symmetric(l);
  validate_selection(l, k1, k2);
  const int n = static_cast<int>(l.rows());
  const SelectiveSolver solver = resolve(options, n);
  if (solver == SelectiveSolver::kDense || k1 + k2 == n) return selective_from_full(l, k1, k2);

  SpectralBasis out;
  out.selection = Selection::kSelective;
  out.k1 = k1;
  out.k2 = k2;
  out.indices = selection_indices(n, k1, k2);

  if (solver == SelectiveSolver::kLanczos) {
    LanczosResult r = lanczos_extremes(l, k1, k2, options.lanczos);
    out.eigenvalues = std::move(r.eigenvalues);
    out.eigenvectors = std::move(r.eigenvectors);
    fix_signs(out.eigenvectors);
    return out;
  }

  // Range solver: one reduction, the two index ranges plus one neighbour
  // on each side for the boundary-tie check.
  const Tridiagonal t = reduce(l);
  out.eigenvalues.resize(k1 + k2);
  out.eigenvectors.resize(n, k1 + k2);
  if (k1 > 0) {
    Matrix z;
    Vector w = tridiagonal_range(t, 1, k1, &z);
    back_transform(t, z);
    out.eigenvalues.head(k1) = w;
    out.eigenvectors.leftCols(k1) = z;
  }
  if (k2 > 0) {
    Matrix z;
    Vector w = tridiagonal_range(t, n - k2 + 1, n, &z);
    back_transform(t, z);
    out.eigenvalues.tail(k2) = w;
    out.eigenvectors.rightCols(k2) = z;
  }
  if (k1 > 0) {
    const Vector next = tridiagonal_range(t, k1 + 1, k1 + 1, nullptr);
    if (std::abs(next(0) - out.eigenvalues(k1 - 1)) < kBoundaryTie) out.degenerate_boundary = true;
  }
  if (k2 > 0) {
    const Vector prev = tridiagonal_range(t, n - k2, n - k2, nullptr);
    if (std::abs(prev(0) - out.eigenvalues(k1)) < kBoundaryTie) out.degenerate_boundary = true;
  }
  fix_signs(out.eigenvectors);
  return out;
}

Vector eigenvalues_selective(const Matrix& l, int k1, int k2, const SelectiveOptions& options) {
  require_symmetric(l);
  validate_selection(l, k1, k2);
  const int n = static_cast<int>(l.rows());
  const SelectiveSolver solver = resolve(options, n);
  if (solver == SelectiveSolver::kLanczos) return eig_selective(l, k1, k2, options).eigenvalues;
  if (solver == SelectiveSolver::kDense || k1 + k2 == n) {
    const Vector all = eigenvalues_full(l);
    Vector out(k1 + k2);
    out.head(k1) = all.head(k1);
    out.tail(k2) = all.tail(k2);
    return out;
  }
  const Tridiagonal t = reduce(l);
  Vector out(k1 + k2);
  if (k1 > 0) out.head(k1) = tridiagonal_range(t, 1, k1, nullptr);
  if (k2 > 0) out.tail(k2) = tridiagonal_range(t, n - k2 + 1, n, nullptr);
  return out;
}

double spectral_distance(const Vector& ref, const Vector& cur) {
  if (ref.size() != cur.size()) {
    throw LengthMismatch("eigenvalue vectors differ in length: " + std::to_string(ref.size()) +
                         " vs " + std::to_string(cur.size()));
  }
  return (ref - cur).norm();
}

double spectral_distance_approx(const SpectralBasis& ref, const Vector& cur) {
  if (ref.size() != cur.size()) {
    throw LengthMismatch("selection has " + std::to_string(ref.size()) +
                         " eigenvalues, current vector has " + std::to_string(cur.size()));
  }
  return (ref.eigenvalues - cur).norm();
}

double eigenvalue_shift_estimate(const Matrix& grad_l, double lambda, const Vector& u,
                                 ShiftFormula formula) {
  if (grad_l.rows() != u.size() || grad_l.cols() != u.size()) {
    throw ShapeMismatch("perturbation and eigenvector sizes differ");
  }
  const double first = u.dot(grad_l * u);
  if (formula == ShiftFormula::kStandard) return first;
  const Vector row_sums = grad_l.rowwise().sum();
  return first - lambda * u.cwiseAbs2().dot(row_sums);
}

Matrix weighted_projector(const SpectralBasis& basis, const Vector& weights,
                          DegeneracyPolicy policy, double gap) {
  const int k = basis.size();
  if (weights.size() != k) throw LengthMismatch("one weight per eigenpair is required");
  Vector w = weights;
  int start = 0;
  while (start < k) {
    int end = start + 1;
    while (end < k &&
           (basis.indices.size() != static_cast<std::size_t>(k) ||
            basis.indices[end] == basis.indices[end - 1] + 1) &&
           basis.eigenvalues(end) - basis.eigenvalues(end - 1) < gap) {
      ++end;
    }
    if (end - start > 1) {
      if (policy == DegeneracyPolicy::kThrow) {
        throw DegenerateEigenvalues("eigenvalue " + std::to_string(basis.eigenvalues(start)) +
                                    " has multiplicity " + std::to_string(end - start));
      }
      w.segment(start, end - start).setConstant(w.segment(start, end - start).mean());
    }
    start = end;
  }
  const Matrix& u = basis.eigenvectors;
  return u * w.asDiagonal() * u.transpose();
}

Matrix normalized_adjacency_pullback(const Matrix& legal, const Matrix& adjacency,
                                     const Matrix& dn) {
  const Eigen::Index n = adjacency.rows();
  if (legal.rows() != n || dn.rows() != n || legal.cols() != n || dn.cols() != n) {
    throw ShapeMismatch("pullback operands must share the node count");
  }
  const Vector d = adjacency.rowwise().sum();
  Vector s(n);
  Vector inv_d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i) = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 0.0;
    inv_d(i) = d(i) > 0.0 ? 1.0 / d(i) : 0.0;
  }
  const Matrix g = 0.5 * (dn + dn.transpose());
  // r_p = sum_q g_pq N_pq / d_p with N = S A S.
  Vector r(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    r(p) = s(p) * g.col(p).cwiseProduct(adjacency.col(p)).dot(s) * inv_d(p);
  }
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i, j) = legal(i, j) * (2.0 * g(i, j) * s(i) * s(j) - r(i) - r(j));
    }
  }
  out.diagonal().setZero();
  return out;
}

Vector restrict_to_selection(const Vector& full_or_restricted, const SpectralBasis& basis) {
  if (full_or_restricted.size() == basis.size()) return full_or_restricted;
  Vector out(basis.size());
  for (int c = 0; c < basis.size(); ++c) {
    const int idx = basis.indices.at(static_cast<std::size_t>(c));
    if (idx >= full_or_restricted.size()) throw LengthMismatch("reference spectrum too short");
    out(c) = full_or_restricted(idx);
  }
  return out;
}

Matrix grad_spectral_distance(const Matrix& legal, const Matrix& perturbed_adjacency,
                              const Vector& reference, const SpectralBasis& basis,
                              DegeneracyPolicy policy) {
  const Vector ref = restrict_to_selection(reference, basis);
  const Vector diff = basis.eigenvalues - ref;
  const double dist = diff.norm();
  if (dist < 1e-12) throw ZeroDistance("spectral distance is zero; gradient undefined");
  const Matrix dl = weighted_projector(basis, diff / dist, policy);
  // L' = I - N, so dF/dN = -dF/dL'.
  return normalized_adjacency_pullback(legal, perturbed_adjacency, -dl);
}

Matrix grad_spectral_distance(const Graph& g, const Matrix& delta, const SpectralBasis& basis,
                              DegeneracyPolicy policy) {
  const Matrix legal = legal_ops(g);
  const Matrix perturbed = apply_perturbation(g.adjacency(), legal, delta);
  const Vector reference = eigenvalues_full(normalized_laplacian(g));
  return grad_spectral_distance(legal, perturbed, reference, basis, policy);
}

}  // namespace spac

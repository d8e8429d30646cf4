#pragma once

#include <vector>

#include "spac/graph.hpp"
#include "spac/lanczos.hpp"

namespace spac {

enum class Selection { kFull, kSelective };

/// Ascending eigenvalues with paired orthonormal eigenvectors (columns).
///
/// For a selective basis, `indices` holds the 0-based positions of the
/// returned pairs within the full ascending spectrum: the k1 lowest followed
/// by the k2 highest.
struct SpectralBasis {
  Vector eigenvalues;
  Matrix eigenvectors;
  Selection selection = Selection::kFull;
  int k1 = 0;
  int k2 = 0;
  std::vector<int> indices;
  /// A requested boundary eigenvalue is repeated just outside the selection;
  /// the returned vectors are then an arbitrary basis of that eigenspace.
  bool degenerate_boundary = false;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

enum class SelectiveSolver {
  kAuto,     ///< kDense for n <= dense_cutoff, kRange otherwise
  kDense,    ///< full decomposition, then slice
  kRange,    ///< one tridiagonal reduction + MRRR on the two index ranges
  kLanczos,  ///< lanczos_extremes
};

struct SelectiveOptions {
  SelectiveSolver solver = SelectiveSolver::kAuto;
  int dense_cutoff = 512;
  LanczosOptions lanczos;
};

/// Full symmetric eigendecomposition. Eigenvector signs are fixed so the
/// entry of largest magnitude is positive.
SpectralBasis eig_full(const Matrix& l);

/// Eigenvalues only (ascending); cheaper than eig_full.
Vector eigenvalues_full(const Matrix& l);

/// The k1 smallest and k2 largest eigenpairs.
SpectralBasis eig_selective(const Matrix& l, int k1, int k2, const SelectiveOptions& options = {});

/// Eigenvalues of the k1 smallest and k2 largest, without vectors.
Vector eigenvalues_selective(const Matrix& l, int k1, int k2,
                             const SelectiveOptions& options = {});

/// ||ref - cur||_2 with rank pairing.
double spectral_distance(const Vector& ref, const Vector& cur);

/// Distance restricted to the selection of `ref`; `cur` holds the matching
/// eigenvalues over the same index set.
double spectral_distance_approx(const SpectralBasis& ref, const Vector& cur);

enum class ShiftFormula {
  /// u^T dL u: first-order shift of a standard eigenpair.
  kStandard,
  /// u^T (dL - lambda diag(dL 1)) u: generalized problem with mass matrix
  /// M = diag(L 1), taken literally.
  kRowSumMass,
};

/// First-order estimate of lambda' - lambda for L' = L + grad_l.
double eigenvalue_shift_estimate(const Matrix& grad_l, double lambda, const Vector& u,
                                 ShiftFormula formula = ShiftFormula::kStandard);

enum class DegeneracyPolicy {
  kThrow,           ///< DegenerateEigenvalues on any repeated eigenvalue
  kAverageCluster,  ///< average weights over each cluster's eigenspace
};

/// sum_k w_k u_k u_k^T. Eigenvalues closer than `gap` form one cluster; under
/// kAverageCluster the cluster contributes mean(w) * (its projector).
Matrix weighted_projector(const SpectralBasis& basis, const Vector& weights,
                          DegeneracyPolicy policy, double gap = 1e-10);

/// Pulls dF/dN back to dF/dDelta for N = S A S, S = diag(rowsum(A)^{-1/2}),
/// A = A0 + C o Delta (+ anything constant in Delta). Each entry (i,j) of the
/// result is the derivative with respect to the unordered-pair variable
/// Delta_ij = Delta_ji. `dn` is symmetrized first.
Matrix normalized_adjacency_pullback(const Matrix& legal, const Matrix& adjacency,
                                     const Matrix& dn);

/// Gradient of ||Lambda_ref - eig(Laplacian(A'))||_2 with respect to Delta.
///
/// `basis` must be the full (or selective) decomposition of
/// Laplacian(perturbed_adjacency); `reference` is the clean spectrum, either
/// full length or already restricted to the basis selection.
/// Throws ZeroDistance when the distance is below 1e-12.
Matrix grad_spectral_distance(const Matrix& legal, const Matrix& perturbed_adjacency,
                              const Vector& reference, const SpectralBasis& basis,
                              DegeneracyPolicy policy = DegeneracyPolicy::kThrow);

Matrix grad_spectral_distance(const Graph& g, const Matrix& delta, const SpectralBasis& basis,
                              DegeneracyPolicy policy = DegeneracyPolicy::kThrow);

/// Reference eigenvalues restricted to the basis selection (identity for a
/// full basis).
Vector restrict_to_selection(const Vector& full_or_restricted, const SpectralBasis& basis);

}  // namespace spac

#pragma once

#include <cstdint>

#include "spac/graph.hpp"

namespace spac {

struct LanczosOptions {
  /// Residual tolerance relative to ||A||_inf.
  double tol = 1e-10;
  /// Krylov dimension cap; 0 means n.
  int max_dim = 0;
  /// Ritz values are tested for convergence every `check_every` steps.
  int check_every = 16;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

struct LanczosResult {
  Vector eigenvalues;  ///< k_low lowest then k_high highest, ascending overall
  Matrix eigenvectors;
  int krylov_dim = 0;
};

/// Extreme eigenpairs of a dense symmetric matrix by Lanczos with full
/// reorthogonalization. A breakdown restarts from a fresh random vector
/// orthogonal to the current basis.
///
/// A single start vector only sees one direction of each eigenspace, so
/// repeated eigenvalues can be under-counted until the Krylov space is
/// exhausted. Use the dense-range solver when multiplicities are expected
/// (e.g. disconnected graphs at eigenvalue 0).
///
/// Throws ConvergenceFailure when max_dim < n is reached unconverged.
LanczosResult lanczos_extremes(const Matrix& a, int k_low, int k_high,
                               const LanczosOptions& options = {});

}  // namespace spac

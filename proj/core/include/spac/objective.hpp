#pragma once

#include "spac/graph.hpp"
#include "spac/spectral.hpp"

namespace spac {

struct ApproxParams {
  int k1 = 128;
  int k2 = 64;
  /// Exact selective eigenpairs are recomputed every m steps.
  int m = 10;
};

enum class ObjectiveMode { kExact, kSelectiveApprox };

/// Spectral-distance objective against a fixed clean spectrum.
///
/// In kSelectiveApprox mode, step() recomputes the selected eigenpairs of the
/// current Laplacian every m calls and, in between, estimates each selected
/// eigenvalue by a first-order shift from the last refresh (eigenvalues,
/// eigenvectors and Laplacian all held at that refresh).
class SpectralObjective {
 public:
  static SpectralObjective exact(const Graph& g);
  static SpectralObjective selective_approx(const Graph& g, ApproxParams params,
                                            SelectiveOptions solver = {});

  ObjectiveMode mode() const { return mode_; }
  const ApproxParams& approx() const { return params_; }
  /// Clean eigenvalues: full spectrum, or the selection in approx mode.
  const Vector& reference_eigs() const { return reference_; }
  int refresh_counter() const { return refresh_counter_; }

  /// Distance of an arbitrary (possibly binary-perturbed) adjacency; exact
  /// over the objective's index set, no state change.
  double value(const Matrix& perturbed_adjacency) const;

  struct Step {
    double objective = 0.0;
    /// dObjective/dDelta; zero when the distance vanished.
    Matrix gradient;
    bool refreshed = false;
    bool zero_distance = false;
  };

  /// One attack iteration at A' = A + C o Delta. `noisy_adjacency` (may be
  /// null) is A' plus symmetry noise and is used only for the exact-mode
  /// gradient decomposition.
  Step step(const Matrix& legal, const Matrix& perturbed_adjacency,
            const Matrix* noisy_adjacency);

  void reset();

 private:
  SpectralObjective() = default;

  Step exact_step(const Matrix& legal, const Matrix& perturbed, const Matrix* noisy) const;
  Step approx_step(const Matrix& legal, const Matrix& perturbed);

  ObjectiveMode mode_ = ObjectiveMode::kExact;
  ApproxParams params_;
  SelectiveOptions solver_;
  Vector reference_;

  SpectralBasis anchor_;
  Matrix anchor_laplacian_;
  int refresh_counter_ = 0;
};

}  // namespace spac

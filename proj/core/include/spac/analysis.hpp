#pragma once

#include <optional>
#include <vector>

#include "spac/graph.hpp"

namespace spac {

struct Band {
  enum class Side { kLowest, kHighest };
  Side side = Side::kLowest;
  int k = 0;

  static Band lowest(int k) { return {Side::kLowest, k}; }
  static Band highest(int k) { return {Side::kHighest, k}; }
};

struct EdgeValue {
  NodePair edge;
  double value = 0.0;
};

/// R = sum over the band of (1 - lambda_i) u_i u_i^T for the normalized
/// Laplacian of g.
Matrix band_reconstruction_matrix(const Graph& g, Band band);

/// R_uv for every existing edge (u < v), in edge order.
std::vector<EdgeValue> frequency_band_reconstruction(const Graph& g, Band band);

struct FlipCounts {
  int added_inter = 0;
  int added_intra = 0;
  int removed_inter = 0;
  int removed_intra = 0;

  int total() const { return added_inter + added_intra + removed_inter + removed_intra; }
  int net_inter_additions() const { return added_inter - removed_inter; }
  friend bool operator==(const FlipCounts&, const FlipCounts&) = default;
};

/// Classifies the flips of a binary perturbation by action and label agreement.
FlipCounts count_flips(const Graph& g, const Matrix& binary);

struct SpectrumShiftReport {
  Vector clean_eigenvalues;  ///< x-axis
  Vector difference;         ///< lambda(A + C o b1) - lambda(A + C o b2), by rank
  std::optional<FlipCounts> counts1;
  std::optional<FlipCounts> counts2;
};

/// Flip counts are omitted when g has no labels.
SpectrumShiftReport spectrum_shift_report(const Graph& g, const Matrix& b1, const Matrix& b2);

}  // namespace spac

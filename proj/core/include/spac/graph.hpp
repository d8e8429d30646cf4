#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace spac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Unordered node pair, always stored with first < second.
struct NodePair {
  int first = 0;
  int second = 0;
  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

/// Undirected, unweighted graph with optional node attributes.
///
/// The adjacency is dense (n x n), symmetric, binary with a zero diagonal.
/// A Graph is immutable once constructed; derived graphs are built with
/// with_adjacency().
class Graph {
 public:
  Graph() = default;
  explicit Graph(Matrix adjacency, std::optional<Matrix> features = std::nullopt,
                 std::optional<std::vector<int>> labels = std::nullopt,
                 std::optional<Split> split = std::nullopt);

  static Graph from_edges(int n, std::span<const NodePair> edges);

  int num_nodes() const { return static_cast<int>(adjacency_.rows()); }
  /// Number of undirected edges.
  int num_edges() const { return num_edges_; }
  double density() const;

  const Matrix& adjacency() const { return adjacency_; }
  Vector degrees() const { return adjacency_.rowwise().sum(); }

  bool has_features() const { return features_.has_value(); }
  bool has_labels() const { return labels_.has_value(); }
  bool has_split() const { return split_.has_value(); }
  const Matrix& features() const;
  const std::vector<int>& labels() const;
  const Split& split() const;
  int num_classes() const { return num_classes_; }

  std::vector<NodePair> edges() const;

  /// Same attributes, different structure. `adjacency` must be binary.
  Graph with_adjacency(Matrix adjacency) const;
  Graph with_split(Split split) const;

 private:
  Matrix adjacency_;
  std::optional<Matrix> features_;
  std::optional<std::vector<int>> labels_;
  std::optional<Split> split_;
  int num_edges_ = 0;
  int num_classes_ = 0;
};

/// C = complement(A) - A: +1 where an edge may be added, -1 where one may be
/// removed, 0 on the diagonal.
Matrix legal_ops(const Matrix& adjacency);
inline Matrix legal_ops(const Graph& g) { return legal_ops(g.adjacency()); }

enum class IsolatedPolicy {
  kThrow,        ///< zero degree raises IsolatedNode
  kUnitDiagonal  ///< zero degree contributes a row of I (trace stays n)
};

/// L = I - D^{-1/2} A D^{-1/2}. Works on weighted (relaxed) adjacencies too.
Matrix normalized_laplacian(const Matrix& adjacency,
                            IsolatedPolicy policy = IsolatedPolicy::kThrow);
inline Matrix normalized_laplacian(const Graph& g) {
  return normalized_laplacian(g.adjacency(), IsolatedPolicy::kThrow);
}

/// D~^{-1/2} (A + I) D~^{-1/2} with D~ = D + I.
Matrix self_loop_propagator(const Matrix& adjacency);
inline Matrix self_loop_propagator(const Graph& g) {
  return self_loop_propagator(g.adjacency());
}

/// A' = A + C o p. `p` may be a relaxed perturbation in [0,1] or binary.
Matrix apply_perturbation(const Graph& g, const Matrix& p);
Matrix apply_perturbation(const Matrix& adjacency, const Matrix& legal, const Matrix& p);

/// a + scale * (N + N^T) / 2 with N_ij ~ U(0,1).
Matrix add_symmetry_noise(const Matrix& a, double noise_scale, std::uint64_t seed);

/// Pairs (i<j) with p_ij > threshold.
std::vector<NodePair> support_pairs(const Matrix& p, double threshold = 0.5);

/// Symmetric binary matrix with ones on the given pairs.
Matrix pairs_to_matrix(int n, std::span<const NodePair> pairs);

/// Sum over unordered pairs of |p_ij| (upper triangle).
double pair_mass(const Matrix& p);

}  // namespace spac

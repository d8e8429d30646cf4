#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spac/graph.hpp"

namespace spac {

struct DatasetPaths {
  std::string edges;  ///< "u<TAB>v" per line, 0-indexed, undirected
  std::optional<std::string> features;  ///< CSV, row i = node i
  std::optional<std::string> labels;    ///< CSV "node_id,label", optional header
  std::optional<std::string> split;     ///< JSON {"train": [...], "test": [...]}
};

struct LoadedGraph {
  Graph graph;
  std::vector<std::string> warnings;
};

/// Reads and validates a dataset. Duplicate edges and self-loops are dropped
/// with a warning. Labeled graphs without a split file get make_split(seed 0).
LoadedGraph load_dataset(const DatasetPaths& paths);

struct SbmParams {
  std::vector<int> sizes;
  double p_in = 0.0;
  double p_out = 0.0;
  int feature_dim = 16;
  /// Mean shift of feature coordinate (label mod feature_dim); noise is N(0,1).
  double signal = 1.0;
};

struct GeometricParams {
  int n = 0;
  double radius = 0.0;
  int clusters = 2;
};

struct KarateParams {};

using SyntheticKind = std::variant<SbmParams, GeometricParams, KarateParams>;

/// Reproducible synthetic graph with features, labels and a split.
/// Geometric graphs label nodes by k-means on positions and connect isolated
/// nodes to their nearest neighbour (reported as a warning).
LoadedGraph generate_synthetic(const SyntheticKind& kind, std::uint64_t seed);

/// Parses "sbm:200,200:0.05:0.005[:dim[:signal]]", "geometric:n:radius[:clusters]"
/// or "karate".
SyntheticKind parse_synthetic_spec(const std::string& spec);

/// Up to `per_class` training nodes per class (never more than half of the
/// class), then up to `max_test` of the remaining nodes for testing.
Split make_split(const std::vector<int>& labels, int per_class, int max_test, std::uint64_t seed);

/// The 34-node, 78-edge Zachary karate club edge list.
std::vector<NodePair> karate_edges();
/// Club membership (0 = instructor, 1 = administrator) per karate node.
std::vector<int> karate_labels();

}  // namespace spac

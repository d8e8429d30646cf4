#include "spac/graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "spac/errors.hpp"

namespace spac {

namespace {

void validate_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw ShapeMismatch("adjacency must be square, got " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
  }
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i, i) != 0.0) throw DomainError("adjacency has a self-loop at node " + std::to_string(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = a(i, j);
      if (v != 0.0 && v != 1.0) throw DomainError("adjacency entries must be 0 or 1");
      if (v != a(j, i)) throw DomainError("adjacency must be symmetric");
    }
  }
}

}  // namespace

Graph::Graph(Matrix adjacency, std::optional<Matrix> features,
             std::optional<std::vector<int>> labels, std::optional<Split> split)
    : adjacency_(std::move(adjacency)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      split_(std::move(split)) {
  validate_adjacency(adjacency_);
  const int n = num_nodes();
  num_edges_ = static_cast<int>(std::lround(adjacency_.sum() / 2.0));

  if (features_ && features_->rows() != n) {
    throw InconsistentDims("feature rows (" + std::to_string(features_->rows()) +
                           ") != node count (" + std::to_string(n) + ")");
  }
  if (labels_) {
    if (static_cast<int>(labels_->size()) != n) {
      throw InconsistentDims("label count != node count");
    }
    int max_label = -1;
    for (int y : *labels_) {
      if (y < 0) throw DomainError("labels must be non-negative");
      max_label = std::max(max_label, y);
    }
    num_classes_ = max_label + 1;
  }
  if (split_) {
    std::set<int> train(split_->train.begin(), split_->train.end());
    for (int v : split_->train) {
      if (v < 0 || v >= n) throw DomainError("train id out of range: " + std::to_string(v));
    }
    for (int v : split_->test) {
      if (v < 0 || v >= n) throw DomainError("test id out of range: " + std::to_string(v));
      if (train.contains(v)) throw DomainError("train and test overlap at node " + std::to_string(v));
    }
  }
}

Graph Graph::from_edges(int n, std::span<const NodePair> edges) {
  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : edges) {
    if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n) {
      throw DomainError("edge endpoint out of range");
    }
    if (e.first == e.second) throw DomainError("self-loops are not allowed");
    a(e.first, e.second) = 1.0;
    a(e.second, e.first) = 1.0;
  }
  return Graph(std::move(a));
}

double Graph::density() const {
  const double n = num_nodes();
  return n < 2 ? 0.0 : 2.0 * num_edges_ / (n * (n - 1.0));
}

const Matrix& Graph::features() const {
  if (!features_) throw MissingFeatures("graph has no node features");
  return *features_;
}

const std::vector<int>& Graph::labels() const {
  if (!labels_) throw MissingLabels("graph has no node labels");
  return *labels_;
}

const Split& Graph::split() const {
  if (!split_) throw InvalidArgument("graph has no train/test split");
  return *split_;
}

std::vector<NodePair> Graph::edges() const { return support_pairs(adjacency_, 0.5); }

Graph Graph::with_adjacency(Matrix adjacency) const {
  return Graph(std::move(adjacency), features_, labels_, split_);
}

Graph Graph::with_split(Split split) const {
  return Graph(adjacency_, features_, labels_, std::move(split));
}

Matrix legal_ops(const Matrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  Matrix c = Matrix::Ones(n, n) - 2.0 * adjacency;
  c.diagonal().setZero();
  return c;
}

Matrix normalized_laplacian(const Matrix& adjacency, IsolatedPolicy policy) {
  const Eigen::Index n = adjacency.rows();
  const Vector d = adjacency.rowwise().sum();
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) > 0.0) {
      s(i) = 1.0 / std::sqrt(d(i));
    } else if (policy == IsolatedPolicy::kThrow) {
      throw IsolatedNode(static_cast<int>(i));
    } else {
      s(i) = 0.0;
    }
  }
  Matrix l = -(s.asDiagonal() * adjacency * s.asDiagonal());
  l.diagonal().array() += 1.0;
  return l;
}

Matrix self_loop_propagator(const Matrix& adjacency) {
  Matrix a_tilde = adjacency;
  a_tilde.diagonal().array() += 1.0;
  const Vector s = a_tilde.rowwise().sum().cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * a_tilde * s.asDiagonal();
}

Matrix apply_perturbation(const Matrix& adjacency, const Matrix& legal, const Matrix& p) {
  if (p.rows() != adjacency.rows() || p.cols() != adjacency.cols()) {
    throw ShapeMismatch("perturbation is " + std::to_string(p.rows()) + "x" +
                        std::to_string(p.cols()) + ", graph has " +
                        std::to_string(adjacency.rows()) + " nodes");
  }
  if (p.size() > 0 && (p.minCoeff() < 0.0 || p.maxCoeff() > 1.0)) {
    throw DomainError("perturbation entries must lie in [0,1]");
  }
  return adjacency + legal.cwiseProduct(p);
}

Matrix apply_perturbation(const Graph& g, const Matrix& p) {
  return apply_perturbation(g.adjacency(), legal_ops(g), p);
}

Matrix add_symmetry_noise(const Matrix& a, double noise_scale, std::uint64_t seed) {
  const Eigen::Index n = a.rows();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix noise(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) noise(i, j) = unif(rng);
  }
  Matrix out = a;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i, j) += noise_scale * 0.5 * (noise(i, j) + noise(j, i));
    }
  }
  return out;
}

std::vector<NodePair> support_pairs(const Matrix& p, double threshold) {
  std::vector<NodePair> out;
  const Eigen::Index n = p.rows();
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (p(i, j) > threshold) out.push_back({static_cast<int>(i), static_cast<int>(j)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Matrix pairs_to_matrix(int n, std::span<const NodePair> pairs) {
  Matrix b = Matrix::Zero(n, n);
  for (const auto& e : pairs) {
    b(e.first, e.second) = 1.0;
    b(e.second, e.first) = 1.0;
  }
  return b;
}

double pair_mass(const Matrix& p) {
  double total = 0.0;
  for (Eigen::Index j = 1; j < p.cols(); ++j) total += p.col(j).head(j).cwiseAbs().sum();
  return total;
}

}  // namespace spac

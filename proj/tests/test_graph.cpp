#include <gtest/gtest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "spac/errors.hpp"
#include "spac/graph.hpp"
#include "spac/spectral.hpp"

using spac::Graph;
using spac::Matrix;
using spac::NodePair;

namespace {

Graph single_edge() {
  const std::vector<NodePair> e = {{0, 1}};
  return Graph::from_edges(2, e);
}

Matrix random_binary_flips(const Graph& g, int flips, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, g.num_nodes() - 1);
  Matrix b = Matrix::Zero(g.num_nodes(), g.num_nodes());
  int placed = 0;
  while (placed < flips) {
    const int i = pick(rng);
    const int j = pick(rng);
    if (i == j || b(i, j) != 0.0) continue;
    b(i, j) = b(j, i) = 1.0;
    ++placed;
  }
  return b;
}

}  // namespace

TEST(Graph, RejectsAsymmetricAdjacency) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = 1.0;
  EXPECT_THROW(Graph{a}, spac::DomainError);
}

TEST(Graph, RejectsSelfLoopsAndNonBinary) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  EXPECT_THROW(Graph{a}, spac::DomainError);
  Matrix w = Matrix::Zero(2, 2);
  w(0, 1) = w(1, 0) = 0.5;
  EXPECT_THROW(Graph{w}, spac::DomainError);
}

TEST(Graph, ValidatesAttributes) {
  const Matrix a = single_edge().adjacency();
  EXPECT_THROW(Graph(a, Matrix::Zero(3, 2)), spac::InconsistentDims);
  EXPECT_THROW(Graph(a, std::nullopt, std::vector<int>{0}), spac::InconsistentDims);
  EXPECT_THROW(Graph(a, std::nullopt, std::vector<int>{0, 1}, spac::Split{{0}, {0}}),
               spac::DomainError);
  EXPECT_THROW(Graph(a, std::nullopt, std::vector<int>{0, 1}, spac::Split{{0}, {5}}),
               spac::DomainError);
  const Graph g(a, std::nullopt, std::vector<int>{0, 2}, spac::Split{{0}, {1}});
  EXPECT_EQ(g.num_classes(), 3);
  EXPECT_THROW(g.features(), spac::MissingFeatures);
  EXPECT_THROW(single_edge().labels(), spac::MissingLabels);
}

TEST(Graph, CountsUndirectedEdgesOnce) {
  const std::vector<NodePair> e = {{0, 1}, {1, 2}, {0, 2}};
  const Graph g = Graph::from_edges(4, e);
  EXPECT_EQ(g.num_edges(), 3);
  EXPECT_EQ(g.edges(), std::vector<NodePair>({{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_DOUBLE_EQ(g.density(), 3.0 / 6.0);
}

TEST(LegalOps, MarksAdditionsAndRemovals) {
  const Graph g = single_edge();
  const Matrix c = spac::legal_ops(g.adjacency());
  EXPECT_EQ(c(0, 1), -1.0);
  EXPECT_EQ(c(0, 0), 0.0);
  const std::vector<NodePair> e = {{0, 1}};
  const Matrix c3 = spac::legal_ops(Graph::from_edges(3, e).adjacency());
  EXPECT_EQ(c3(0, 2), 1.0);
  EXPECT_EQ(c3(1, 2), 1.0);
  EXPECT_EQ(c3(2, 2), 0.0);
}

TEST(NormalizedLaplacian, CompleteGraphK4) {
  const Matrix a = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
  const Matrix l = spac::normalized_laplacian(Graph(a));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(l(i, j), i == j ? 1.0 : -1.0 / 3.0, 1e-15);
  }
}

TEST(NormalizedLaplacian, SingleEdge) {
  const Matrix l = spac::normalized_laplacian(single_edge());
  EXPECT_DOUBLE_EQ(l(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(l(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(l(1, 0), -1.0);
  EXPECT_DOUBLE_EQ(l(1, 1), 1.0);
}

TEST(NormalizedLaplacian, MatchesDenseOracle) {
  const Matrix a = oracle::random_connected_adjacency(10, 0.3, 7);
  const Matrix l = spac::normalized_laplacian(Graph(a));
  EXPECT_LE((l - oracle::dense_laplacian(a)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((l - l.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(NormalizedLaplacian, IsolatedNodePolicies) {
  const std::vector<NodePair> e = {{0, 1}};
  const Graph g = Graph::from_edges(3, e);
  try {
    spac::normalized_laplacian(g);
    FAIL() << "expected IsolatedNode";
  } catch (const spac::IsolatedNode& err) {
    EXPECT_EQ(err.node(), 2);
  }
  const Matrix l = spac::normalized_laplacian(g.adjacency(), spac::IsolatedPolicy::kUnitDiagonal);
  EXPECT_DOUBLE_EQ(l(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(l.trace(), 3.0);
}

TEST(SelfLoopPropagator, TrivialCases) {
  const Matrix one = spac::self_loop_propagator(Matrix::Zero(1, 1));
  EXPECT_DOUBLE_EQ(one(0, 0), 1.0);
  const Matrix p = spac::self_loop_propagator(single_edge());
  EXPECT_TRUE(p.isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));
}

TEST(SelfLoopPropagator, MatchesDenseOracleAndRowBound) {
  const Matrix a = oracle::random_connected_adjacency(30, 0.15, 3);
  const Matrix p = spac::self_loop_propagator(Graph(a));
  EXPECT_LE((p - oracle::dense_self_loop_propagator(a)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((p - p.transpose()).cwiseAbs().maxCoeff(), 0.0);
  const double dmax = (a.rowwise().sum().array() + 1.0).maxCoeff();
  for (int i = 0; i < 30; ++i) EXPECT_LE(p.row(i).sum(), std::sqrt(dmax) + 1e-12);
}

TEST(ApplyPerturbation, IdentityAndRemoval) {
  const Graph g = single_edge();
  EXPECT_EQ(spac::apply_perturbation(g, Matrix::Zero(2, 2)), g.adjacency());
  Matrix p = Matrix::Zero(2, 2);
  p(0, 1) = p(1, 0) = 1.0;
  EXPECT_EQ(spac::apply_perturbation(g, p), Matrix::Zero(2, 2));
}

TEST(ApplyPerturbation, BinaryFlipsMatchXorOracle) {
  const Graph g(oracle::random_connected_adjacency(15, 0.2, 11));
  const Matrix b = random_binary_flips(g, 5, 5);
  const Matrix out = spac::apply_perturbation(g, b);
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) {
      const bool edge = g.adjacency()(i, j) != 0.0;
      const bool flip = b(i, j) != 0.0;
      EXPECT_EQ(out(i, j), (edge != flip) ? 1.0 : 0.0);
    }
  }
  EXPECT_NO_THROW(Graph{out});
}

TEST(ApplyPerturbation, IsAnInvolutionForBinaryFlips) {
  const Graph g(oracle::random_connected_adjacency(12, 0.3, 2));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix b = random_binary_flips(g, 6, seed);
    const Graph once(spac::apply_perturbation(g, b));
    EXPECT_EQ(spac::apply_perturbation(once, b), g.adjacency());
  }
}

TEST(ApplyPerturbation, Errors) {
  const Graph g = single_edge();
  EXPECT_THROW(spac::apply_perturbation(g, Matrix::Zero(3, 3)), spac::ShapeMismatch);
  Matrix p = Matrix::Zero(2, 2);
  p(0, 1) = p(1, 0) = 1.5;
  EXPECT_THROW(spac::apply_perturbation(g, p), spac::DomainError);
  p(0, 1) = p(1, 0) = -0.1;
  EXPECT_THROW(spac::apply_perturbation(g, p), spac::DomainError);
}

TEST(SymmetryNoise, SymmetricAndBounded) {
  const Matrix a = oracle::random_connected_adjacency(20, 0.2, 1);
  const double scale = 1e-5;
  const Matrix noisy = spac::add_symmetry_noise(a, scale, 42);
  EXPECT_EQ((noisy - noisy.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((noisy - a).cwiseAbs().maxCoeff(), scale);
  EXPECT_EQ(noisy, spac::add_symmetry_noise(a, scale, 42));
  EXPECT_NE(noisy, spac::add_symmetry_noise(a, scale, 43));
  EXPECT_EQ(spac::add_symmetry_noise(a, 0.0, 42), a);
}

TEST(SymmetryNoise, BreaksTriangleMultiplicity) {
  const Matrix k3 = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  const double scale = 1e-5;
  const spac::Vector clean = spac::eigenvalues_full(spac::normalized_laplacian(k3));
  EXPECT_NEAR(clean(1), clean(2), 1e-12);
  const spac::Vector eig =
      spac::eigenvalues_full(spac::normalized_laplacian(spac::add_symmetry_noise(k3, scale, 9)));
  for (int i = 0; i + 1 < 3; ++i) EXPECT_GT(eig(i + 1) - eig(i), scale / 10);
}

TEST(PairHelpers, SupportMassAndMatrix) {
  Matrix p = Matrix::Zero(4, 4);
  p(0, 1) = p(1, 0) = 0.7;
  p(2, 3) = p(3, 2) = 0.2;
  EXPECT_DOUBLE_EQ(spac::pair_mass(p), 0.9);
  EXPECT_EQ(spac::support_pairs(p), std::vector<NodePair>({{0, 1}}));
  const std::vector<NodePair> pairs = {{0, 1}, {2, 3}};
  const Matrix b = spac::pairs_to_matrix(4, pairs);
  EXPECT_EQ(b.sum(), 4.0);
  EXPECT_EQ(b(3, 2), 1.0);
}

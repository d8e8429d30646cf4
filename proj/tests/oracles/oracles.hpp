#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// L = I - D^{-1/2} A D^{-1/2} entry by entry.
Matrix dense_laplacian(const Matrix& a);

/// D~^{-1/2} (A + I) D~^{-1/2} entry by entry.
Matrix dense_self_loop_propagator(const Matrix& a);

/// Central difference of f along the symmetric pair direction e_ij + e_ji.
double central_difference_pair(const std::function<double(const Matrix&)>& f, const Matrix& x,
                               int i, int j, double h);

/// Euclidean projection of v onto {0 <= x <= 1, sum x <= budget} by
/// enumerating every lower/free/upper active set (3^n candidates).
Vector project_by_active_sets(const Vector& v, double budget);

/// Same projection by locating the multiplier on the piecewise-linear mass
/// curve exactly between consecutive breakpoints.
Vector project_by_breakpoints(const Vector& v, double budget);

/// Z = P relu(P X W0) W1 with explicit loops.
Matrix gcn_forward_loops(const Matrix& p, const Matrix& x, const Matrix& w0, const Matrix& w1);

/// Exact distribution of the number of successes of independent Bernoulli(p_k)
/// draws (Poisson-binomial), by dynamic programming.
Vector poisson_binomial(const std::vector<double>& p);

struct BestFlip {
  int i = -1;
  int j = -1;
  double distance = 0.0;
};

/// Best single flip of a binary symmetric adjacency under `distance`, by
/// trying every unordered pair.
BestFlip exhaustive_single_flip(const Matrix& a,
                                const std::function<double(const Matrix&)>& distance);

/// Random symmetric binary adjacency with a Hamiltonian path (so no isolated
/// node) plus Bernoulli(p) extra edges.
Matrix random_connected_adjacency(int n, double p, std::uint64_t seed);

}  // namespace oracle

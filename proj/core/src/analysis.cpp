#include "spac/analysis.hpp"

#include "spac/errors.hpp"
#include "spac/spectral.hpp"

namespace spac {

namespace {

void require_binary_legal(const Graph& g, const Matrix& b) {
  const int n = g.num_nodes();
  if (b.rows() != n || b.cols() != n) throw ShapeMismatch("perturbation shape mismatch");
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double v = b(i, j);
      if ((v != 0.0 && v != 1.0) || v != b(j, i) || (i == j && v != 0.0)) {
        throw DomainError("perturbation must be symmetric, binary, zero-diagonal");
      }
    }
  }
}

}  // namespace

Matrix band_reconstruction_matrix(const Graph& g, Band band) {
  const int n = g.num_nodes();
  if (band.k < 0 || band.k > n) throw InvalidArgument("band size must lie in [0, n]");
  const SpectralBasis basis = eig_full(normalized_laplacian(g.adjacency(), IsolatedPolicy::kUnitDiagonal));
  const int first = band.side == Band::Side::kLowest ? 0 : n - band.k;
  Matrix r = Matrix::Zero(n, n);
  for (int i = first; i < first + band.k; ++i) {
    const auto u = basis.eigenvectors.col(i);
    r.noalias() += (1.0 - basis.eigenvalues(i)) * u * u.transpose();
  }
  return r;
}

std::vector<EdgeValue> frequency_band_reconstruction(const Graph& g, Band band) {
  const Matrix r = band_reconstruction_matrix(g, band);
  std::vector<EdgeValue> out;
  for (const auto& e : g.edges()) out.push_back({e, r(e.first, e.second)});
  return out;
}

FlipCounts count_flips(const Graph& g, const Matrix& binary) {
  require_binary_legal(g, binary);
  const auto& labels = g.labels();
  const Matrix& a = g.adjacency();
  FlipCounts c;
  const int n = g.num_nodes();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      if (binary(i, j) == 0.0) continue;
      const bool intra =
          labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
      if (a(i, j) == 0.0) {
        ++(intra ? c.added_intra : c.added_inter);
      } else {
        ++(intra ? c.removed_intra : c.removed_inter);
      }
    }
  }
  return c;
}

SpectrumShiftReport spectrum_shift_report(const Graph& g, const Matrix& b1, const Matrix& b2) {
  require_binary_legal(g, b1);
  require_binary_legal(g, b2);
  const Matrix legal = legal_ops(g);
  const auto spectrum = [&](const Matrix& b) {
    return eigenvalues_full(normalized_laplacian(apply_perturbation(g.adjacency(), legal, b),
                                                 IsolatedPolicy::kUnitDiagonal));
  };
  SpectrumShiftReport report;
  report.clean_eigenvalues =
      eigenvalues_full(normalized_laplacian(g.adjacency(), IsolatedPolicy::kUnitDiagonal));
  report.difference = b1 == b2 ? Vector::Zero(g.num_nodes()) : Vector(spectrum(b1) - spectrum(b2));
  if (g.has_labels()) {
    report.counts1 = count_flips(g, b1);
    report.counts2 = count_flips(g, b2);
  }
  return report;
}

}  // namespace spac

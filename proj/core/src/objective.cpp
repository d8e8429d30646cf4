#include "spac/objective.hpp"

#include "spac/errors.hpp"

namespace spac {

namespace {

Matrix perturbed_laplacian(const Matrix& adjacency) {
  return normalized_laplacian(adjacency, IsolatedPolicy::kUnitDiagonal);
}

}  // namespace

SpectralObjective SpectralObjective::exact(const Graph& g) {
  SpectralObjective obj;
  obj.mode_ = ObjectiveMode::kExact;
  obj.reference_ = eigenvalues_full(normalized_laplacian(g));
  return obj;
}

SpectralObjective SpectralObjective::selective_approx(const Graph& g, ApproxParams params,
                                                      SelectiveOptions solver) {
  if (params.m < 1) throw InvalidArgument("approximation refresh period m must be >= 1");
  if (params.k1 < 0 || params.k2 < 0 || params.k1 + params.k2 > g.num_nodes()) {
    throw InvalidArgument("k1 + k2 must not exceed the node count");
  }
  SpectralObjective obj;
  obj.mode_ = ObjectiveMode::kSelectiveApprox;
  obj.params_ = params;
  obj.solver_ = solver;
  obj.reference_ = eigenvalues_selective(normalized_laplacian(g), params.k1, params.k2, solver);
  return obj;
}

double SpectralObjective::value(const Matrix& perturbed_adjacency) const {
  const Matrix l = perturbed_laplacian(perturbed_adjacency);
  if (mode_ == ObjectiveMode::kExact) return spectral_distance(reference_, eigenvalues_full(l));
  return spectral_distance(reference_, eigenvalues_selective(l, params_.k1, params_.k2, solver_));
}

void SpectralObjective::reset() {
  refresh_counter_ = 0;
  anchor_ = SpectralBasis{};
  anchor_laplacian_.resize(0, 0);
}

SpectralObjective::Step SpectralObjective::step(const Matrix& legal,
                                                const Matrix& perturbed_adjacency,
                                                const Matrix* noisy_adjacency) {
  if (mode_ == ObjectiveMode::kExact) return exact_step(legal, perturbed_adjacency, noisy_adjacency);
  return approx_step(legal, perturbed_adjacency);
}

SpectralObjective::Step SpectralObjective::exact_step(const Matrix& legal, const Matrix& perturbed,
                                                      const Matrix* noisy) const {
  Step out;
  out.refreshed = true;
  const Matrix& working = noisy != nullptr ? *noisy : perturbed;
  const SpectralBasis basis = eig_full(perturbed_laplacian(working));
  out.objective = noisy != nullptr
                      ? spectral_distance(reference_, eigenvalues_full(perturbed_laplacian(perturbed)))
                      : spectral_distance(reference_, basis.eigenvalues);
  try {
    out.gradient = grad_spectral_distance(legal, working, reference_, basis,
                                          DegeneracyPolicy::kAverageCluster);
  } catch (const ZeroDistance&) {
    out.zero_distance = true;
    out.gradient = Matrix::Zero(perturbed.rows(), perturbed.cols());
  }
  return out;
}

SpectralObjective::Step SpectralObjective::approx_step(const Matrix& legal,
                                                       const Matrix& perturbed) {
  Step out;
  const Matrix l = perturbed_laplacian(perturbed);
  Vector estimate;
  if (refresh_counter_ == 0) {
    anchor_ = eig_selective(l, params_.k1, params_.k2, solver_);
    anchor_laplacian_ = l;
    estimate = anchor_.eigenvalues;
    out.refreshed = true;
  } else {
    const Matrix shift = l - anchor_laplacian_;
    const Matrix projected = shift * anchor_.eigenvectors;
    estimate = anchor_.eigenvalues +
               anchor_.eigenvectors.cwiseProduct(projected).colwise().sum().transpose();
  }
  refresh_counter_ = (refresh_counter_ + 1) % params_.m;

  const Vector diff = estimate - reference_;
  out.objective = diff.norm();
  if (out.objective < 1e-12) {
    out.zero_distance = true;
    out.gradient = Matrix::Zero(perturbed.rows(), perturbed.cols());
    return out;
  }
  const Matrix dl =
      weighted_projector(anchor_, diff / out.objective, DegeneracyPolicy::kAverageCluster);
  out.gradient = normalized_adjacency_pullback(legal, perturbed, -dl);
  return out;
}

}  // namespace spac

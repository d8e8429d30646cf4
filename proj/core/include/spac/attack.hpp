#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "spac/graph.hpp"
#include "spac/objective.hpp"

namespace spac {

enum class StepSchedule {
  kAdaptive,  ///< eta_t = T * epsilon / sqrt(t)
  kConstant,  ///< eta_t = constant_step
};

struct AttackConfig {
  double budget_ratio = 0.05;
  int steps = 100;
  StepSchedule schedule = StepSchedule::kAdaptive;
  double constant_step = 0.0;
  /// Weight of the spectral term when a task loss is present.
  double beta = 1.0;
  std::optional<ApproxParams> approx;
  /// Scale of the tie-breaking symmetric noise; 0 disables it.
  double noise_scale = 1e-5;
  int sample_trials = 20;
  std::uint64_t rng_seed = 0;
  /// Initial value of Delta on every legal pair (projected onto the budget).
  double init_value = 1e-3;

  void validate(const Graph& g) const;
};

/// Real-valued L1 budget epsilon * |E|.
double continuous_budget(const Graph& g, double budget_ratio);
/// floor(epsilon * |E|): the flip budget for the binary perturbation.
int flip_budget(const Graph& g, double budget_ratio);

struct AttackResult {
  Matrix binary_perturbation;
  Matrix perturbed_adjacency;
  std::vector<NodePair> flips;
  /// Objective at Delta_0 .. Delta_{T-1}.
  std::vector<double> objective_trace;
  /// L1 pair mass of Delta after each projection.
  std::vector<double> mass_trace;
  Matrix final_delta;
  int flips_used = 0;
  double wall_time = 0.0;
};

/// Differentiable task loss plugged into the PGD loop next to the spectral
/// term (white-box attacks).
struct ExtraLoss {
  struct Value {
    double loss = 0.0;
    Matrix gradient;
  };
  /// Loss and dLoss/dDelta at A' = A + C o Delta for step t (1-based).
  std::function<Value(const Matrix& delta, const Matrix& perturbed_adjacency, int step)>
      loss_and_grad;
  /// Loss at an arbitrary (binary) perturbed adjacency; used for rounding.
  std::function<double(const Matrix& perturbed_adjacency)> value;
};

/// Projected gradient ascent on Delta maximizing the spectral distance (plus
/// `extra` with weight beta on the spectral term), then randomized rounding.
AttackResult pgd_spectral_attack(const Graph& g, const AttackConfig& cfg,
                                 SpectralObjective objective, const ExtraLoss* extra = nullptr);

/// Euclidean projection of a symmetric matrix onto
/// { 0 <= Delta <= 1, zero diagonal, sum over pairs <= budget }.
Matrix project_feasible(const Matrix& delta, double budget);

/// Step size for iteration t (1-based).
double step_size(int t, const AttackConfig& cfg);

struct RoundingResult {
  Matrix binary;
  std::vector<NodePair> flips;
  double score = 0.0;
  /// Flip counts of draws within the budget, in draw order.
  std::vector<int> accepted_flip_counts;
  bool truncated = false;
};

using RoundingScore = std::function<double(const Matrix& binary)>;

/// Draws `trials` binary matrices with P[B_ij = 1] = Delta_ij per pair and
/// keeps the best-scoring one within `budget` flips. If every draw exceeds the
/// budget, the smallest draw is truncated by dropping its lowest-Delta flips.
RoundingResult sample_binary(const Matrix& delta, int budget, int trials,
                             const RoundingScore& score, std::uint64_t seed);

/// Stream-separated seed derivation used for noise and sampling draws.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

inline constexpr std::uint64_t kNoiseStream = 1;
inline constexpr std::uint64_t kRoundingStream = 2;

/// AttackResult for an explicit list of flips (baselines, CLI replays).
AttackResult make_result(const Graph& g, std::vector<NodePair> flips, double wall_time);

}  // namespace spac

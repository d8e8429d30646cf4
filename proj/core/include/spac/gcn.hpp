#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spac/attack.hpp"
#include "spac/graph.hpp"

namespace spac {

struct GcnHyper {
  int hidden = 64;
  int epochs = 200;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
};

/// Two-layer GCN: Z = P relu(P X W0) W1 for a propagator P.
struct GcnModel {
  Matrix theta0;      ///< d x hidden
  Matrix theta1;      ///< hidden x K
  Matrix propagator;  ///< self-loop propagator of the training graph
};

Matrix gcn_forward(const GcnModel& model, const Matrix& propagator, const Matrix& features);
Matrix softmax_rows(const Matrix& logits);

/// Glorot-uniform initialization, deterministic in hyper.seed.
GcnModel init_gcn(int feature_dim, int num_classes, const GcnHyper& hyper);

struct WeightGradients {
  double loss = 0.0;  ///< mean cross-entropy over `nodes` plus L2 term
  Matrix theta0;
  Matrix theta1;
};

/// Training loss and its gradient with respect to the weights.
WeightGradients training_loss_and_grad(const GcnModel& model, const Matrix& propagator,
                                       const Matrix& features, std::span<const int> labels,
                                       std::span<const int> nodes, double weight_decay);

/// Full-batch Adam on the mean training cross-entropy over g.split().train.
GcnModel train_gcn(const Graph& g, const GcnHyper& hyper);
/// Same, on an arbitrary (possibly relaxed) symmetric adjacency.
GcnModel train_gcn(const Graph& g, const Matrix& adjacency, const GcnHyper& hyper);

/// Mean cross-entropy of `model` on `nodes` of `g` (no L2 term).
double cross_entropy(const GcnModel& model, const Matrix& propagator, const Matrix& features,
                     std::span<const int> labels, std::span<const int> nodes);

/// Fraction of `nodes` whose argmax logit (lowest class on ties) is wrong.
double evaluate_misclassification(const GcnModel& model, const Matrix& propagator,
                                  const Matrix& features, std::span<const int> labels,
                                  std::span<const int> nodes);
double evaluate_misclassification(const GcnModel& model, const Graph& g,
                                  std::span<const int> nodes);

enum class AttackLossKind { kCrossEntropyTest, kNegativeCW, kCrossEntropyTrain };
enum class AttackStage { kEvasion, kPoison };

struct AttackObjectiveSpec {
  AttackLossKind kind = AttackLossKind::kCrossEntropyTest;
  double kappa = 0.0;
  AttackStage stage = AttackStage::kEvasion;
};

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;  ///< dLoss/dDelta, pair convention
};

/// Attack loss on A' = A + C o Delta and its gradient through the propagator
/// of A' (degrees included) back to Delta.
LossAndGrad attack_loss_and_grad(const GcnModel& model, const Graph& g, const Matrix& delta,
                                 const AttackObjectiveSpec& spec);
LossAndGrad attack_loss_and_grad_at(const GcnModel& model, const Graph& g, const Matrix& legal,
                                    const Matrix& perturbed_adjacency,
                                    const AttackObjectiveSpec& spec);
double attack_loss_at(const GcnModel& model, const Graph& g, const Matrix& perturbed_adjacency,
                      const AttackObjectiveSpec& spec);

struct WhiteBoxOptions {
  /// Surrogate training for the poisoning objective.
  GcnHyper surrogate = {};
  /// Surrogate retraining period in PGD steps.
  int retrain_every = 20;
};

/// PGD on L_attack + beta * L_spectral. Evasion objectives use `victim` as a
/// fixed model; kCrossEntropyTrain retrains a surrogate on the current relaxed
/// graph every `retrain_every` steps.
AttackResult run_white_box_attack(const Graph& g, const AttackConfig& cfg,
                                  const AttackObjectiveSpec& spec, const GcnModel& victim,
                                  const WhiteBoxOptions& options = {});

/// Binary weight dump with a shape header; round-trips bit-exactly.
void save_model(const GcnModel& model, std::ostream& out);
GcnModel load_model(std::istream& in);
void save_model(const GcnModel& model, const std::string& path);
GcnModel load_model(const std::string& path);

}  // namespace spac

#include "spac/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <random>

#include "spac/errors.hpp"
#include "spac/spectral.hpp"

namespace spac {

namespace {

constexpr char kModelMagic[8] = {'S', 'P', 'A', 'C', 'G', 'C', 'N', '1'};

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

void require_shapes(const GcnModel& model, const Matrix& propagator, const Matrix& features) {
  if (propagator.rows() != propagator.cols() || propagator.rows() != features.rows()) {
    throw ShapeMismatch("propagator and feature rows disagree");
  }
  if (features.cols() != model.theta0.rows()) {
    throw ShapeMismatch("feature dimension " + std::to_string(features.cols()) +
                        " != model input dimension " + std::to_string(model.theta0.rows()));
  }
  if (model.theta0.cols() != model.theta1.rows()) throw ShapeMismatch("hidden widths disagree");
}

// dLoss/dZ for the mean cross-entropy over `nodes`; returns the loss.
double cross_entropy_grad(const Matrix& logits, std::span<const int> labels,
                          std::span<const int> nodes, Matrix* dz) {
  if (nodes.empty()) throw InvalidArgument("empty node set");
  const Matrix probs = softmax_rows(logits);
  const double scale = 1.0 / static_cast<double>(nodes.size());
  double loss = 0.0;
  if (dz != nullptr) *dz = Matrix::Zero(logits.rows(), logits.cols());
  for (int v : nodes) {
    const int y = labels[static_cast<std::size_t>(v)];
    loss -= std::log(std::max(probs(v, y), 1e-300));
    if (dz != nullptr) {
      dz->row(v) = probs.row(v) * scale;
      (*dz)(v, y) -= scale;
    }
  }
  return loss * scale;
}

// Negated mean C&W hinge max(Z_y - max_{c != y} Z_c - kappa, 0).
double negative_cw_grad(const Matrix& logits, std::span<const int> labels,
                        std::span<const int> nodes, double kappa, Matrix* dz) {
  if (nodes.empty()) throw InvalidArgument("empty node set");
  const double scale = 1.0 / static_cast<double>(nodes.size());
  double hinge_sum = 0.0;
  if (dz != nullptr) *dz = Matrix::Zero(logits.rows(), logits.cols());
  for (int v : nodes) {
    const int y = labels[static_cast<std::size_t>(v)];
    int best = -1;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      if (c == y) continue;
      if (best < 0 || logits(v, c) > logits(v, best)) best = static_cast<int>(c);
    }
    if (best < 0) continue;
    const double hinge = logits(v, y) - logits(v, best) - kappa;
    if (hinge > 0.0) {
      hinge_sum += hinge;
      if (dz != nullptr) {
        (*dz)(v, y) -= scale;
        (*dz)(v, best) += scale;
      }
    }
  }
  return -hinge_sum * scale;
}

std::span<const int> target_nodes(const Graph& g, const AttackObjectiveSpec& spec) {
  if (!g.has_labels()) throw UnlabeledTarget("attack objective needs node labels");
  const Split& split = g.split();
  return spec.kind == AttackLossKind::kCrossEntropyTrain ? std::span<const int>(split.train)
                                                          : std::span<const int>(split.test);
}

double loss_from_logits(const Matrix& logits, const Graph& g, const AttackObjectiveSpec& spec,
                        Matrix* dz) {
  const auto nodes = target_nodes(g, spec);
  if (spec.kind == AttackLossKind::kNegativeCW) {
    if (spec.kappa < 0.0) throw InvalidArgument("C&W confidence kappa must be >= 0");
    return negative_cw_grad(logits, g.labels(), nodes, spec.kappa, dz);
  }
  return cross_entropy_grad(logits, g.labels(), nodes, dz);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  const std::int64_t shape[2] = {m.rows(), m.cols()};
  out.write(reinterpret_cast<const char*>(shape), sizeof(shape));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

Matrix read_matrix(std::istream& in) {
  std::int64_t shape[2] = {0, 0};
  in.read(reinterpret_cast<char*>(shape), sizeof(shape));
  if (!in || shape[0] < 0 || shape[1] < 0) throw Error("corrupt model header");
  Matrix m(shape[0], shape[1]);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  if (!in) throw Error("truncated model file");
  return m;
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix gcn_forward(const GcnModel& model, const Matrix& propagator, const Matrix& features) {
  require_shapes(model, propagator, features);
  const Matrix hidden = relu(propagator * (features * model.theta0));
  return propagator * (hidden * model.theta1);
}

GcnModel init_gcn(int feature_dim, int num_classes, const GcnHyper& hyper) {
  std::mt19937_64 rng(hyper.seed);
  const auto glorot = [&](int rows, int cols) {
    const double r = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> unif(-r, r);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = unif(rng);
    }
    return m;
  };
  GcnModel model;
  model.theta0 = glorot(feature_dim, hyper.hidden);
  model.theta1 = glorot(hyper.hidden, num_classes);
  return model;
}

WeightGradients training_loss_and_grad(const GcnModel& model, const Matrix& propagator,
                                       const Matrix& features, std::span<const int> labels,
                                       std::span<const int> nodes, double weight_decay) {
  require_shapes(model, propagator, features);
  const Matrix px = propagator * features;
  const Matrix pre = px * model.theta0;
  const Matrix hidden = relu(pre);
  const Matrix logits = propagator * (hidden * model.theta1);
  Matrix dz;
  WeightGradients out;
  out.loss = cross_entropy_grad(logits, labels, nodes, &dz) +
             0.5 * weight_decay *
                 (model.theta0.squaredNorm() + model.theta1.squaredNorm());
  const Matrix d_hw = propagator.transpose() * dz;
  out.theta1 = hidden.transpose() * d_hw + weight_decay * model.theta1;
  const Matrix d_pre = (d_hw * model.theta1.transpose()).cwiseProduct(
      (pre.array() > 0.0).cast<double>().matrix());
  out.theta0 = px.transpose() * d_pre + weight_decay * model.theta0;
  return out;
}

GcnModel train_gcn(const Graph& g, const GcnHyper& hyper) {
  return train_gcn(g, g.adjacency(), hyper);
}

GcnModel train_gcn(const Graph& g, const Matrix& adjacency, const GcnHyper& hyper) {
  const Matrix& x = g.features();
  const std::vector<int>& y = g.labels();
  const std::vector<int>& train = g.split().train;
  if (train.empty()) throw MissingLabels("no training nodes");
  if (adjacency.rows() != g.num_nodes() || adjacency.cols() != g.num_nodes()) {
    throw ShapeMismatch("adjacency does not match the graph");
  }

  GcnModel model = init_gcn(static_cast<int>(x.cols()), g.num_classes(), hyper);
  model.propagator = self_loop_propagator(adjacency);
  const Matrix& p = model.propagator;
  const Matrix px = p * x;

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  Matrix m0 = Matrix::Zero(model.theta0.rows(), model.theta0.cols());
  Matrix v0 = m0;
  Matrix m1 = Matrix::Zero(model.theta1.rows(), model.theta1.cols());
  Matrix v1 = m1;
  Matrix dz;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const Matrix pre = px * model.theta0;
    const Matrix hidden = relu(pre);
    const Matrix logits = p * (hidden * model.theta1);
    cross_entropy_grad(logits, y, train, &dz);
    const Matrix d_hw = p.transpose() * dz;
    const Matrix g1 = hidden.transpose() * d_hw + hyper.weight_decay * model.theta1;
    const Matrix d_pre = (d_hw * model.theta1.transpose())
                             .cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    const Matrix g0 = px.transpose() * d_pre + hyper.weight_decay * model.theta0;

    const double c1 = 1.0 - std::pow(kBeta1, epoch);
    const double c2 = 1.0 - std::pow(kBeta2, epoch);
    m0 = kBeta1 * m0 + (1.0 - kBeta1) * g0;
    v0 = kBeta2 * v0 + (1.0 - kBeta2) * g0.cwiseAbs2();
    m1 = kBeta1 * m1 + (1.0 - kBeta1) * g1;
    v1 = kBeta2 * v1 + (1.0 - kBeta2) * g1.cwiseAbs2();
    model.theta0.array() -= hyper.learning_rate * (m0.array() / c1) /
                            ((v0.array() / c2).sqrt() + kEps);
    model.theta1.array() -= hyper.learning_rate * (m1.array() / c1) /
                            ((v1.array() / c2).sqrt() + kEps);
  }
  return model;
}

double cross_entropy(const GcnModel& model, const Matrix& propagator, const Matrix& features,
                     std::span<const int> labels, std::span<const int> nodes) {
  return cross_entropy_grad(gcn_forward(model, propagator, features), labels, nodes, nullptr);
}

double evaluate_misclassification(const GcnModel& model, const Matrix& propagator,
                                  const Matrix& features, std::span<const int> labels,
                                  std::span<const int> nodes) {
  if (nodes.empty()) return 0.0;
  const Matrix logits = gcn_forward(model, propagator, features);
  int wrong = 0;
  for (int v : nodes) {
    Eigen::Index pred = 0;
    logits.row(v).maxCoeff(&pred);  // first maximum: lowest class id on ties
    if (pred != labels[static_cast<std::size_t>(v)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(nodes.size());
}

double evaluate_misclassification(const GcnModel& model, const Graph& g,
                                  std::span<const int> nodes) {
  return evaluate_misclassification(model, self_loop_propagator(g), g.features(), g.labels(),
                                    nodes);
}

LossAndGrad attack_loss_and_grad_at(const GcnModel& model, const Graph& g, const Matrix& legal,
                                    const Matrix& perturbed_adjacency,
                                    const AttackObjectiveSpec& spec) {
  const Matrix& x = g.features();
  const Matrix p = self_loop_propagator(perturbed_adjacency);
  require_shapes(model, p, x);
  const Matrix xw = x * model.theta0;
  const Matrix pre = p * xw;
  const Matrix hidden = relu(pre);
  const Matrix hw = hidden * model.theta1;
  const Matrix logits = p * hw;

  Matrix dz;
  LossAndGrad out;
  out.loss = loss_from_logits(logits, g, spec, &dz);

  // Z = P H W1 and H = relu(P X W0): both products depend on P.
  const Matrix d_pre = (p.transpose() * dz * model.theta1.transpose())
                           .cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  const Matrix dp = dz * hw.transpose() + d_pre * xw.transpose();

  Matrix with_loops = perturbed_adjacency;
  with_loops.diagonal().array() += 1.0;
  out.grad = normalized_adjacency_pullback(legal, with_loops, dp);
  return out;
}

LossAndGrad attack_loss_and_grad(const GcnModel& model, const Graph& g, const Matrix& delta,
                                 const AttackObjectiveSpec& spec) {
  const Matrix legal = legal_ops(g);
  return attack_loss_and_grad_at(model, g, legal, apply_perturbation(g.adjacency(), legal, delta),
                                 spec);
}

double attack_loss_at(const GcnModel& model, const Graph& g, const Matrix& perturbed_adjacency,
                      const AttackObjectiveSpec& spec) {
  const Matrix logits = gcn_forward(model, self_loop_propagator(perturbed_adjacency), g.features());
  return loss_from_logits(logits, g, spec, nullptr);
}

AttackResult run_white_box_attack(const Graph& g, const AttackConfig& cfg,
                                  const AttackObjectiveSpec& spec, const GcnModel& victim,
                                  const WhiteBoxOptions& options) {
  if (options.retrain_every < 1) throw InvalidArgument("retrain_every must be >= 1");
  target_nodes(g, spec);
  SpectralObjective objective = cfg.approx ? SpectralObjective::selective_approx(g, *cfg.approx)
                                           : SpectralObjective::exact(g);
  const Matrix legal = legal_ops(g);

  ExtraLoss extra;
  if (spec.kind == AttackLossKind::kCrossEntropyTrain) {
    auto surrogate = std::make_shared<GcnModel>(victim);
    extra.loss_and_grad = [&, surrogate](const Matrix&, const Matrix& perturbed, int step) {
      if ((step - 1) % options.retrain_every == 0) {
        *surrogate = train_gcn(g, perturbed, options.surrogate);
      }
      LossAndGrad lg = attack_loss_and_grad_at(*surrogate, g, legal, perturbed, spec);
      return ExtraLoss::Value{lg.loss, std::move(lg.grad)};
    };
    extra.value = [&, surrogate](const Matrix& perturbed) {
      return attack_loss_at(*surrogate, g, perturbed, spec);
    };
  } else {
    extra.loss_and_grad = [&](const Matrix&, const Matrix& perturbed, int) {
      LossAndGrad lg = attack_loss_and_grad_at(victim, g, legal, perturbed, spec);
      return ExtraLoss::Value{lg.loss, std::move(lg.grad)};
    };
    extra.value = [&](const Matrix& perturbed) {
      return attack_loss_at(victim, g, perturbed, spec);
    };
  }
  return pgd_spectral_attack(g, cfg, std::move(objective), &extra);
}

void save_model(const GcnModel& model, std::ostream& out) {
  out.write(kModelMagic, sizeof(kModelMagic));
  write_matrix(out, model.theta0);
  write_matrix(out, model.theta1);
  write_matrix(out, model.propagator);
  if (!out) throw Error("failed to write model");
}

GcnModel load_model(std::istream& in) {
  char magic[sizeof(kModelMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw Error("not a GCN model file");
  }
  GcnModel model;
  model.theta0 = read_matrix(in);
  model.theta1 = read_matrix(in);
  model.propagator = read_matrix(in);
  return model;
}

void save_model(const GcnModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  save_model(model, out);
}

GcnModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return load_model(in);
}

}  // namespace spac

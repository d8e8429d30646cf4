#include "spac/attack.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "spac/errors.hpp"

namespace spac {

namespace {

constexpr int kBisectionIterations = 60;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct PairValue {
  Eigen::Index i;
  Eigen::Index j;
  double value;
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

void AttackConfig::validate(const Graph& g) const {
  if (!(budget_ratio > 0.0 && budget_ratio <= 1.0)) {
    throw InvalidArgument("budget ratio must lie in (0, 1]");
  }
  if (steps < 1) throw InvalidArgument("steps must be >= 1");
  if (beta < 0.0) throw InvalidArgument("beta must be >= 0");
  if (noise_scale < 0.0) throw InvalidArgument("noise scale must be >= 0");
  if (sample_trials < 1) throw InvalidArgument("sample_trials must be >= 1");
  if (init_value < 0.0 || init_value > 1.0) throw InvalidArgument("init_value must lie in [0,1]");
  if (approx) {
    if (approx->m < 1) throw InvalidArgument("approximation refresh period m must be >= 1");
    if (approx->k1 < 0 || approx->k2 < 0 || approx->k1 + approx->k2 > g.num_nodes()) {
      throw InvalidArgument("k1 + k2 must not exceed the node count");
    }
  }
  if (flip_budget(g, budget_ratio) == 0) {
    throw BudgetTooSmall("floor(epsilon * |E|) = 0 for epsilon = " + std::to_string(budget_ratio) +
                         ", |E| = " + std::to_string(g.num_edges()));
  }
}

double continuous_budget(const Graph& g, double budget_ratio) {
  return budget_ratio * g.num_edges();
}

int flip_budget(const Graph& g, double budget_ratio) {
  return static_cast<int>(std::floor(budget_ratio * g.num_edges() + 1e-9));
}

double step_size(int t, const AttackConfig& cfg) {
  if (cfg.schedule == StepSchedule::kConstant) return cfg.constant_step;
  return cfg.steps * cfg.budget_ratio / std::sqrt(static_cast<double>(t));
}

Matrix project_feasible(const Matrix& delta, double budget) {
  const Eigen::Index n = delta.rows();
  if (delta.cols() != n) throw ShapeMismatch("perturbation must be square");
  Matrix out = Matrix::Zero(n, n);
  std::vector<PairValue> positive;
  double clipped_mass = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double v = 0.5 * (delta(i, j) + delta(j, i));
      if (v > 0.0) {
        positive.push_back({i, j, v});
        clipped_mass += std::min(v, 1.0);
      }
    }
  }
  double shift = 0.0;
  if (clipped_mass > budget) {
    const auto mass_at = [&](double mu) {
      double s = 0.0;
      for (const auto& p : positive) s += std::clamp(p.value - mu, 0.0, 1.0);
      return s;
    };
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& p : positive) hi = std::max(hi, p.value);
    for (int it = 0; it < kBisectionIterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mass_at(mid) > budget) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    shift = hi;
  }
  for (const auto& p : positive) {
    const double v = std::clamp(p.value - shift, 0.0, 1.0);
    out(p.i, p.j) = v;
    out(p.j, p.i) = v;
  }
  return out;
}

RoundingResult sample_binary(const Matrix& delta, int budget, int trials,
                             const RoundingScore& score, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("at least one rounding trial is required");
  const Eigen::Index n = delta.rows();
  std::vector<PairValue> support;
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (delta(i, j) > 0.0) support.push_back({i, j, delta(i, j)});
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RoundingResult best;
  bool have_best = false;
  std::vector<std::size_t> smallest_draw;
  bool have_smallest = false;
  std::map<std::vector<std::size_t>, double> scored;

  for (int t = 0; t < trials; ++t) {
    std::vector<std::size_t> draw;
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (unif(rng) < support[k].value) draw.push_back(k);
    }
    if (static_cast<int>(draw.size()) > budget) {
      if (!have_smallest || draw.size() < smallest_draw.size()) {
        smallest_draw = draw;
        have_smallest = true;
      }
      continue;
    }
    best.accepted_flip_counts.push_back(static_cast<int>(draw.size()));
    auto it = scored.find(draw);
    if (it == scored.end()) {
      std::vector<NodePair> pairs;
      for (std::size_t k : draw) {
        pairs.push_back({static_cast<int>(support[k].i), static_cast<int>(support[k].j)});
      }
      Matrix b = pairs_to_matrix(static_cast<int>(n), pairs);
      const double s = score(b);
      it = scored.emplace(draw, s).first;
      if (!have_best || s > best.score) {
        best.score = s;
        best.binary = std::move(b);
        best.flips = std::move(pairs);
        have_best = true;
      }
    }
  }

  if (!have_best) {
    std::stable_sort(smallest_draw.begin(), smallest_draw.end(),
                     [&](std::size_t a, std::size_t b) { return support[a].value > support[b].value; });
    smallest_draw.resize(static_cast<std::size_t>(std::max(budget, 0)));
    std::vector<NodePair> pairs;
    for (std::size_t k : smallest_draw) {
      pairs.push_back({static_cast<int>(support[k].i), static_cast<int>(support[k].j)});
    }
    std::sort(pairs.begin(), pairs.end());
    best.binary = pairs_to_matrix(static_cast<int>(n), pairs);
    best.flips = std::move(pairs);
    best.score = score(best.binary);
    best.truncated = true;
  }
  std::sort(best.flips.begin(), best.flips.end());
  return best;
}

AttackResult make_result(const Graph& g, std::vector<NodePair> flips, double wall_time) {
  AttackResult r;
  std::sort(flips.begin(), flips.end());
  r.binary_perturbation = pairs_to_matrix(g.num_nodes(), flips);
  r.perturbed_adjacency = apply_perturbation(g, r.binary_perturbation);
  r.flips = std::move(flips);
  r.flips_used = static_cast<int>(r.flips.size());
  r.wall_time = wall_time;
  return r;
}

AttackResult pgd_spectral_attack(const Graph& g, const AttackConfig& cfg,
                                 SpectralObjective objective, const ExtraLoss* extra) {
  cfg.validate(g);
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = g.num_nodes();
  const Matrix legal = legal_ops(g);
  const double budget = continuous_budget(g, cfg.budget_ratio);
  const bool use_spectral = extra == nullptr || cfg.beta != 0.0;
  const double spectral_weight = extra == nullptr ? 1.0 : cfg.beta;
  objective.reset();

  Matrix init = Matrix::Constant(n, n, cfg.init_value);
  init.diagonal().setZero();
  Matrix delta = project_feasible(init, budget);

  AttackResult result;
  result.objective_trace.reserve(static_cast<std::size_t>(cfg.steps));
  result.mass_trace.reserve(static_cast<std::size_t>(cfg.steps));

  for (int t = 1; t <= cfg.steps; ++t) {
    const Matrix perturbed = g.adjacency() + legal.cwiseProduct(delta);
    double value = 0.0;
    Matrix grad = Matrix::Zero(n, n);
    if (use_spectral) {
      SpectralObjective::Step s;
      if (cfg.noise_scale > 0.0 && objective.mode() == ObjectiveMode::kExact) {
        const Matrix noisy = add_symmetry_noise(perturbed, cfg.noise_scale,
                                                derive_seed(cfg.rng_seed, kNoiseStream, t));
        s = objective.step(legal, perturbed, &noisy);
      } else {
        s = objective.step(legal, perturbed, nullptr);
      }
      value += spectral_weight * s.objective;
      grad += spectral_weight * s.gradient;
    }
    if (extra != nullptr) {
      ExtraLoss::Value v = extra->loss_and_grad(delta, perturbed, t);
      value += v.loss;
      grad += v.gradient;
    }
    result.objective_trace.push_back(value);
    delta = project_feasible(delta + step_size(t, cfg) * grad, budget);
    result.mass_trace.push_back(pair_mass(delta));
  }

  const RoundingScore score = [&](const Matrix& b) {
    const Matrix perturbed = g.adjacency() + legal.cwiseProduct(b);
    double s = 0.0;
    if (use_spectral) s += spectral_weight * objective.value(perturbed);
    if (extra != nullptr) s += extra->value(perturbed);
    return s;
  };
  RoundingResult rounded =
      sample_binary(delta, flip_budget(g, cfg.budget_ratio), cfg.sample_trials, score,
                    derive_seed(cfg.rng_seed, kRoundingStream, 0));

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  AttackResult out = make_result(g, std::move(rounded.flips), elapsed);
  out.objective_trace = std::move(result.objective_trace);
  out.mass_trace = std::move(result.mass_trace);
  out.final_delta = std::move(delta);
  return out;
}

}  // namespace spac

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles/oracles.hpp"
#include "spac/analysis.hpp"
#include "spac/attack.hpp"
#include "spac/datasets.hpp"
#include "spac/experiment.hpp"
#include "spac/gcn.hpp"
#include "spac/spectral.hpp"

namespace fs = std::filesystem;
using spac::Graph;
using spac::Matrix;
using spac::Vector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

Vector laplacian_eigs(const Matrix& adjacency) {
  return spac::eigenvalues_full(
      spac::normalized_laplacian(adjacency, spac::IsolatedPolicy::kUnitDiagonal));
}

Graph random_task(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix a = oracle::random_connected_adjacency(n, 0.3, seed);
  Matrix x(n, 4);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = normal(rng);
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  spac::Split split;
  for (int i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(i)] = i % 3;
    (i % 2 == 0 ? split.train : split.test).push_back(i);
  }
  return Graph(a, x, labels, split);
}

Matrix random_delta(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(0.05, 0.35);
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = val(rng);
  }
  return d;
}

// Largest violation of |analytic - fd| <= max(1e-8, 1e-3 * scale), as a
// multiple of the allowed error (<= 1 passes).
double gradient_violation(const Matrix& analytic, const std::function<double(const Matrix&)>& f,
                          const Matrix& at) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < at.cols(); ++j) {
      const double fd = oracle::central_difference_pair(f, at, static_cast<int>(i),
                                                        static_cast<int>(j), 1e-5);
      const double allowed =
          std::max(1e-8, 1e-3 * std::max(std::abs(fd), std::abs(analytic(i, j))));
      worst = std::max(worst, std::abs(analytic(i, j) - fd) / allowed);
    }
  }
  return worst;
}

Outcome criterion_gradients() {
  double worst_spectral = 0.0;
  double worst_task = 0.0;
  for (int s = 0; s < 20; ++s) {
    const int n = 8 + (s * 7) % 17;
    const Graph g = random_task(n, 1000 + static_cast<std::uint64_t>(s));
    const Matrix legal = spac::legal_ops(g);
    const Matrix delta = random_delta(n, 2000 + static_cast<std::uint64_t>(s));
    const Matrix perturbed = spac::apply_perturbation(g, delta);

    const Vector reference = laplacian_eigs(g.adjacency());
    const auto basis = spac::eig_full(spac::normalized_laplacian(perturbed));
    const Matrix grad = spac::grad_spectral_distance(g, delta, basis);
    const auto distance = [&](const Matrix& d) {
      const Eigen::SelfAdjointEigenSolver<Matrix> es(
          oracle::dense_laplacian(g.adjacency() + legal.cwiseProduct(d)), Eigen::EigenvaluesOnly);
      return (es.eigenvalues() - reference).norm();
    };
    worst_spectral = std::max(worst_spectral, gradient_violation(grad, distance, delta));

    spac::GcnHyper h;
    h.hidden = 8;
    h.epochs = 40;
    h.seed = static_cast<std::uint64_t>(s);
    const auto model = spac::train_gcn(g, h);
    for (auto kind : {spac::AttackLossKind::kCrossEntropyTest, spac::AttackLossKind::kNegativeCW,
                      spac::AttackLossKind::kCrossEntropyTrain}) {
      spac::AttackObjectiveSpec spec;
      spec.kind = kind;
      const auto lg = spac::attack_loss_and_grad(model, g, delta, spec);
      const auto loss = [&](const Matrix& d) {
        return spac::attack_loss_at(model, g, g.adjacency() + legal.cwiseProduct(d), spec);
      };
      worst_task = std::max(worst_task, gradient_violation(lg.grad, loss, delta));
    }
  }
  return {worst_spectral <= 1.0 && worst_task <= 1.0,
          "worst error / tolerance: spectral " + fmt("%.3g", worst_spectral) + ", task loss " +
              fmt("%.3g", worst_task)};
}

Outcome criterion_shift_estimate() {
  const std::vector<double> hs = {1e-2, 5e-3, 2.5e-3};
  double min_ratio = 1e300;
  double max_ratio = 0.0;
  double worst_rel = 0.0;
  for (int s = 0; s < 5; ++s) {
    const Matrix a = oracle::random_connected_adjacency(50, 0.1, 300 + static_cast<std::uint64_t>(s));
    const Matrix legal = spac::legal_ops(a);
    const Matrix l = spac::normalized_laplacian(a);
    const auto basis = spac::eig_full(l);
    std::mt19937_64 rng(400 + static_cast<std::uint64_t>(s));
    std::uniform_int_distribution<int> node(0, 49);
    for (int trial = 0; trial < 4; ++trial) {
      int i = node(rng);
      int j = node(rng);
      while (j == i) j = node(rng);
      const auto errors_at = [&](double h, int idx) {
        Matrix ap = a;
        ap(i, j) += legal(i, j) * h;
        ap(j, i) = ap(i, j);
        const Matrix dl = spac::normalized_laplacian(ap) - l;
        const double est = spac::eigenvalue_shift_estimate(dl, basis.eigenvalues(idx),
                                                            basis.eigenvectors.col(idx));
        const double exact = laplacian_eigs(ap)(idx) - basis.eigenvalues(idx);
        return std::pair{std::abs(est - exact), exact};
      };
      for (int idx : {1, 49}) {
        std::vector<double> errs;
        for (double h : hs) errs.push_back(errors_at(h, idx).first);
        for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
          const double ratio = errs[k] / errs[k + 1];
          min_ratio = std::min(min_ratio, ratio);
          max_ratio = std::max(max_ratio, ratio);
        }
        const auto [err, exact] = errors_at(1e-3, idx);
        worst_rel = std::max(worst_rel, err / std::abs(exact));
      }
    }
  }
  const bool pass = min_ratio >= 2.0 && max_ratio <= 8.0 && worst_rel <= 0.05;
  return {pass, "error ratios per halving in [" + fmt("%.3f", min_ratio) + ", " +
                    fmt("%.3f", max_ratio) + "], worst relative error at h=1e-3 " +
                    fmt("%.3g", worst_rel)};
}

Outcome criterion_spectral_invariants() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(4, 64);
  std::uniform_real_distribution<double> density(0.02, 0.6);
  std::bernoulli_distribution weighted(0.5);
  double worst_trace = 0.0;
  double lo = 1e300;
  double hi = -1e300;
  double worst_ends = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = size(rng);
    Matrix a = oracle::random_connected_adjacency(n, density(rng), rng());
    if (weighted(rng)) {
      // Fractional perturbation of every legal pair, as during an attack.
      std::uniform_real_distribution<double> frac(0.0, 1.0);
      const Matrix legal = spac::legal_ops(a);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = a(i, j) + legal(i, j) * frac(rng);
      }
    }
    const Matrix l = spac::normalized_laplacian(a, spac::IsolatedPolicy::kUnitDiagonal);
    worst_trace = std::max(worst_trace, std::abs(l.trace() - n) / n);
    const auto full = spac::eig_full(l);
    lo = std::min(lo, full.eigenvalues.minCoeff());
    hi = std::max(hi, full.eigenvalues.maxCoeff());
    const int k1 = std::max(1, n / 4);
    const int k2 = std::max(1, n / 8);
    spac::SelectiveOptions opts;
    opts.solver = spac::SelectiveSolver::kRange;
    const auto sel = spac::eig_selective(l, k1, k2, opts);
    for (int k = 0; k < k1; ++k) {
      worst_ends = std::max(worst_ends, std::abs(sel.eigenvalues(k) - full.eigenvalues(k)));
    }
    for (int k = 0; k < k2; ++k) {
      worst_ends = std::max(worst_ends, std::abs(sel.eigenvalues(k1 + k) -
                                                 full.eigenvalues(n - k2 + k)));
    }
  }
  const bool pass =
      worst_trace <= 1e-6 && lo >= -1e-8 && hi <= 2.0 + 1e-8 && worst_ends <= 1e-6;
  return {pass, "trace error/n " + fmt("%.3g", worst_trace) + ", eigenvalue range [" +
                    fmt("%.3g", lo) + ", " + fmt("%.12g", hi) + "], selective vs full " +
                    fmt("%.3g", worst_ends)};
}

Outcome criterion_projection() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> nodes(2, 10);
  std::uniform_real_distribution<double> value(-0.5, 1.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int max_entries = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = nodes(rng);
    const int m = n * (n - 1) / 2;
    max_entries = std::max(max_entries, m);
    Matrix delta = Matrix::Zero(n, n);
    Vector v(m);
    int k = 0;
    for (int j = 1; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        v(k++) = delta(i, j) = delta(j, i) = value(rng);
      }
    }
    const double budget = unit(rng) * m;
    const Matrix p = spac::project_feasible(delta, budget);
    const Vector ref = m <= 10 ? oracle::project_by_active_sets(v, budget)
                               : oracle::project_by_breakpoints(v, budget);
    k = 0;
    for (int j = 1; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        worst = std::max(worst, std::abs(p(i, j) - ref(k)));
        worst = std::max(worst, std::abs(p(j, i) - ref(k)));
        ++k;
      }
    }
  }
  return {worst <= 1e-6, "max deviation from QP oracle " + fmt("%.3g", worst) +
                             " (up to " + std::to_string(max_entries) + " entries)"};
}

Outcome criterion_exhaustive_flip() {
  const Graph g = spac::generate_synthetic(spac::KarateParams{}, 0).graph;
  const Vector clean = laplacian_eigs(g.adjacency());
  const auto distance = [&](const Matrix& a) { return spac::spectral_distance(clean, laplacian_eigs(a)); };
  const auto best = oracle::exhaustive_single_flip(g.adjacency(), distance);
  int wins = 0;
  std::string found;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spac::AttackConfig cfg;
    cfg.budget_ratio = 1.0 / g.num_edges();
    cfg.rng_seed = seed;
    const auto r = spac::pgd_spectral_attack(g, cfg, spac::SpectralObjective::exact(g));
    const double d = distance(r.perturbed_adjacency);
    if (r.flips_used == 1 && d >= best.distance - 1e-12) ++wins;
    found += (seed ? ", " : "") + fmt("%.6f", d);
  }
  return {wins >= 4, std::to_string(wins) + "/5 seeds reach the exhaustive best " +
                         fmt("%.6f", best.distance) + " (found " + found + ")"};
}

double mean_rate(const spac::Report& report, spac::AttackKind kind, double eps) {
  double sum = 0.0;
  int count = 0;
  for (const auto& c : report.cells) {
    if (c.attack == kind && c.epsilon == eps) {
      sum += c.misclassification;
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

std::optional<fs::path> cora_dir() {
  if (const char* env = std::getenv("SPAC_CORA_DIR")) return fs::path(env);
  const fs::path bundled = fs::path(SPAC_SOURCE_DIR) / "data" / "cora";
  if (fs::exists(bundled / "edges.tsv")) return bundled;
  return std::nullopt;
}

Outcome criterion_reproduction_cora(const fs::path& dir) {
  spac::ExperimentSpec spec;
  spec.dataset.name = "cora";
  spac::DatasetPaths paths;
  paths.edges = (dir / "edges.tsv").string();
  paths.features = (dir / "features.csv").string();
  paths.labels = (dir / "labels.csv").string();
  if (fs::exists(dir / "split.json")) paths.split = (dir / "split.json").string();
  spec.dataset.paths = paths;
  spec.attacks = {spac::AttackKind::kSpac, spac::AttackKind::kRandom, spac::AttackKind::kSpacCE,
                  spac::AttackKind::kPgdCE};
  spec.budgets = {0.05};
  spec.seeds = {0, 1, 2, 3, 4};
  const auto report = spac::run_experiment(spec);
  double clean = 0.0;
  for (const auto& c : report.clean) clean += c.misclassification / report.clean.size();
  const double spac_rate = mean_rate(report, spac::AttackKind::kSpac, 0.05);
  const double random_rate = mean_rate(report, spac::AttackKind::kRandom, 0.05);
  const double ce = mean_rate(report, spac::AttackKind::kSpacCE, 0.05);
  const double pgd = mean_rate(report, spac::AttackKind::kPgdCE, 0.05);
  const bool pass = std::abs(clean - 0.184) <= 0.03 && std::abs(spac_rate - 0.220) <= 0.05 &&
                    spac_rate > random_rate && std::abs(ce - 0.255) <= 0.05 && ce > pgd - 0.005;
  return {pass, "cora: clean " + fmt("%.4f", clean) + ", SPAC " + fmt("%.4f", spac_rate) +
                    ", Random " + fmt("%.4f", random_rate) + ", SPAC-CE " + fmt("%.4f", ce) +
                    ", PGD-CE " + fmt("%.4f", pgd)};
}

Outcome criterion_reproduction() {
  if (const auto dir = cora_dir()) return criterion_reproduction_cora(*dir);
  spac::ExperimentSpec spec;
  spec.dataset.name = "sbm-400";
  spec.dataset.synthetic = spac::parse_synthetic_spec("sbm:100,100,100,100:0.032:0.0025:16:1.0");
  spec.dataset.graph_seed = 11;
  spec.attacks = {spac::AttackKind::kSpac, spac::AttackKind::kRandom};
  spec.budgets = {0.05, 0.1};
  spec.seeds = {0, 1, 2, 3, 4};
  const auto report = spac::run_experiment(spec);
  double clean = 0.0;
  for (const auto& c : report.clean) clean += c.misclassification / report.clean.size();
  bool pass = true;
  std::string detail = "cora absent, 400-node SBM substitute: clean " + fmt("%.4f", clean);
  for (double eps : spec.budgets) {
    const double s = mean_rate(report, spac::AttackKind::kSpac, eps);
    const double r = mean_rate(report, spac::AttackKind::kRandom, eps);
    pass = pass && s > r;
    detail += "; eps " + fmt("%.2f", eps) + " SPAC " + fmt("%.4f", s) + " vs Random " +
              fmt("%.4f", r);
  }
  return {pass, detail};
}

Outcome criterion_approx_speedup() {
  const Graph g =
      spac::generate_synthetic(spac::parse_synthetic_spec("sbm:1000,1000:0.006:0.0008"), 21).graph;
  const Vector clean = laplacian_eigs(g.adjacency());
  spac::AttackConfig cfg;
  cfg.budget_ratio = 0.05;
  cfg.rng_seed = 1;

  const auto exact = spac::pgd_spectral_attack(g, cfg, spac::SpectralObjective::exact(g));
  spac::ApproxParams params;
  params.k1 = 128;
  params.k2 = 64;
  params.m = 10;
  cfg.approx = params;
  const auto approx = spac::pgd_spectral_attack(g, cfg, spac::SpectralObjective::selective_approx(g, params));

  const double d_exact = spac::spectral_distance(clean, laplacian_eigs(exact.perturbed_adjacency));
  const double d_approx = spac::spectral_distance(clean, laplacian_eigs(approx.perturbed_adjacency));
  const double time_ratio = approx.wall_time / exact.wall_time;
  const double dist_ratio = d_approx / d_exact;
  return {time_ratio <= 0.5 && dist_ratio >= 0.8,
          "n=" + std::to_string(g.num_nodes()) + ", exact " + fmt("%.1f", exact.wall_time) +
              " s, approx " + fmt("%.1f", approx.wall_time) + " s (ratio " +
              fmt("%.3f", time_ratio) + "); distance exact " + fmt("%.4f", d_exact) +
              ", approx " + fmt("%.4f", d_approx) + " (ratio " + fmt("%.3f", dist_ratio) + ")"};
}

Outcome criterion_inter_cluster() {
  const auto loaded =
      spac::generate_synthetic(spac::parse_synthetic_spec("sbm:100,100:0.032:0.0074"), 8);
  const Graph& g = loaded.graph;
  spac::AttackOptions options;
  const double beta = spac::default_beta("sbm", g.density());
  int majority = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spac::GcnHyper hyper = options.victim;
    hyper.seed = seed;
    const auto victim = spac::train_gcn(g, hyper);
    const auto spac_ce =
        spac::run_attack(g, spac::AttackKind::kSpacCE, 0.2, seed, options, beta, &victim);
    const auto pgd_ce =
        spac::run_attack(g, spac::AttackKind::kPgdCE, 0.2, seed, options, beta, &victim);
    const int a = spac::count_flips(g, spac_ce.binary_perturbation).net_inter_additions();
    const int b = spac::count_flips(g, pgd_ce.binary_perturbation).net_inter_additions();
    if (a > b) ++majority;
    detail += (seed ? ", " : "") + std::to_string(a) + " vs " + std::to_string(b);
  }
  return {majority >= 3, std::to_string(majority) +
                             "/5 seeds with more net inter-cluster additions (SPAC-CE vs PGD-CE: " +
                             detail + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "spac_acceptance_determinism";
  fs::remove_all(root);
  bool pass = true;
  std::string detail;
  for (auto stage : {spac::AttackStage::kEvasion, spac::AttackStage::kPoison}) {
    spac::ExperimentSpec spec;
    spec.dataset.name = "sbm-det";
    spec.dataset.synthetic = spac::parse_synthetic_spec("sbm:30,30:0.25:0.03");
    spec.dataset.graph_seed = 4;
    spec.stage = stage;
    spec.attacks = stage == spac::AttackStage::kEvasion
                       ? std::vector{spac::AttackKind::kSpac, spac::AttackKind::kSpacApprox,
                                     spac::AttackKind::kSpacCE, spac::AttackKind::kSpacCW,
                                     spac::AttackKind::kRandom, spac::AttackKind::kDice}
                       : std::vector{spac::AttackKind::kSpacMin, spac::AttackKind::kMaxMin};
    spec.budgets = {0.05, 0.1};
    spec.seeds = {0, 1};
    spec.options.steps = 20;
    spec.options.victim.epochs = 60;
    const std::string name = spac::to_string(stage);
    for (const char* run : {"a", "b"}) {
      spec.output_dir = (root / name / run).string();
      spac::run_experiment(spec);
    }
    for (const char* file : {"report.json", "table3.csv", "sweep.csv", "flip_counts.csv",
                             "spectrum_diff.csv"}) {
      const std::string a = slurp(root / name / "a" / file);
      const bool same = !a.empty() && a == slurp(root / name / "b" / file);
      pass = pass && same;
      if (!same) detail += name + "/" + file + " differs; ";
    }
  }
  fs::remove_all(root);
  if (detail.empty()) detail = "evasion and poison reports byte-identical across runs";
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "gradient oracles", criterion_gradients},
      {2, "eigenvalue shift estimate", criterion_shift_estimate},
      {3, "spectral invariants", criterion_spectral_invariants},
      {4, "projection optimality", criterion_projection},
      {5, "exhaustive single-flip dominance", criterion_exhaustive_flip},
      {6, "misclassification vs random", criterion_reproduction},
      {7, "approximation speedup", criterion_approx_speedup},
      {8, "inter-cluster additions", criterion_inter_cluster},
      {9, "determinism", criterion_determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << c.id << " (" << c.name << "): " << (o.pass ? "PASS" : "FAIL")
              << " - " << o.detail << " [" << fmt("%.1f", secs) << " s]" << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

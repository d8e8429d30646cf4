#include "spac/experiment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <utility>

#include "spac/baselines.hpp"
#include "spac/errors.hpp"
#include "spac/spectral.hpp"

namespace spac {

namespace {

constexpr std::array<std::pair<AttackKind, const char*>, 10> kAttackNames = {{
    {AttackKind::kSpac, "SPAC"},
    {AttackKind::kSpacApprox, "SPAC-approx"},
    {AttackKind::kSpacCE, "SPAC-CE"},
    {AttackKind::kSpacCW, "SPAC-C&W"},
    {AttackKind::kSpacMin, "SPAC-Min"},
    {AttackKind::kPgdCE, "PGD-CE"},
    {AttackKind::kPgdCW, "PGD-C&W"},
    {AttackKind::kMaxMin, "Max-Min"},
    {AttackKind::kRandom, "Random"},
    {AttackKind::kDice, "DICE"},
}};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

ApproxParams fit_approx(ApproxParams p, int n) {
  // Small graphs cannot hold k1 + k2 distinct eigenpairs.
  if (p.k1 + p.k2 > n) {
    const double scale = static_cast<double>(n) / static_cast<double>(p.k1 + p.k2);
    p.k1 = static_cast<int>(p.k1 * scale);
    p.k2 = n - p.k1;
  }
  return p;
}

double spectral_distance_to_clean(const Vector& clean, const Matrix& perturbed,
                                  Vector* perturbed_eigs) {
  *perturbed_eigs =
      eigenvalues_full(normalized_laplacian(perturbed, IsolatedPolicy::kUnitDiagonal));
  return spectral_distance(clean, *perturbed_eigs);
}

}  // namespace

std::string to_string(AttackKind kind) {
  for (const auto& [k, name] : kAttackNames) {
    if (k == kind) return name;
  }
  throw InvalidArgument("unknown attack kind");
}

AttackKind parse_attack_kind(const std::string& name) {
  const std::string key = lower(name);
  for (const auto& [k, n] : kAttackNames) {
    if (lower(n) == key) return k;
  }
  if (key == "spac-cw") return AttackKind::kSpacCW;
  if (key == "pgd-cw") return AttackKind::kPgdCW;
  throw InvalidArgument("unknown attack '" + name + "'");
}

std::string to_string(AttackStage stage) {
  return stage == AttackStage::kEvasion ? "evasion" : "poison";
}

AttackStage parse_stage(const std::string& name) {
  const std::string key = lower(name);
  if (key == "evasion") return AttackStage::kEvasion;
  if (key == "poison" || key == "poisoning") return AttackStage::kPoison;
  throw InvalidArgument("unknown stage '" + name + "'");
}

bool is_white_box(AttackKind kind) {
  switch (kind) {
    case AttackKind::kSpacCE:
    case AttackKind::kSpacCW:
    case AttackKind::kSpacMin:
    case AttackKind::kPgdCE:
    case AttackKind::kPgdCW:
    case AttackKind::kMaxMin:
      return true;
    default:
      return false;
  }
}

double default_beta(const std::string& dataset_name, double density) {
  static const std::map<std::string, double> kKnown = {
      {"cora", 1.4}, {"citeseer", 0.8}, {"blogcatalog", 13.0}, {"polblogs", 15.0}};
  const auto it = kKnown.find(lower(dataset_name));
  return it != kKnown.end() ? it->second : 100.0 * density;
}

LoadedGraph load_source(const DatasetSource& source) {
  if (source.paths && source.synthetic) {
    throw InvalidArgument("dataset source must be either files or a synthetic generator");
  }
  if (source.paths) return load_dataset(*source.paths);
  if (source.synthetic) return generate_synthetic(*source.synthetic, source.graph_seed);
  throw InvalidArgument("dataset source is empty");
}

AttackResult run_attack(const Graph& g, AttackKind kind, double epsilon, std::uint64_t seed,
                        const AttackOptions& options, double beta, const GcnModel* victim) {
  AttackConfig cfg;
  cfg.budget_ratio = epsilon;
  cfg.steps = options.steps;
  cfg.noise_scale = options.noise_scale;
  cfg.sample_trials = options.sample_trials;
  cfg.rng_seed = seed;
  cfg.beta = beta;

  if (kind == AttackKind::kRandom) return random_attack(g, flip_budget(g, epsilon), seed);
  if (kind == AttackKind::kDice) return dice_attack(g, flip_budget(g, epsilon), seed);
  if (kind == AttackKind::kSpac) return pgd_spectral_attack(g, cfg, SpectralObjective::exact(g));
  if (kind == AttackKind::kSpacApprox) {
    cfg.approx = fit_approx(options.approx, g.num_nodes());
    return pgd_spectral_attack(g, cfg, SpectralObjective::selective_approx(g, *cfg.approx));
  }

  if (victim == nullptr) throw InvalidArgument(to_string(kind) + " needs a trained victim");
  AttackObjectiveSpec spec;
  spec.kappa = options.kappa;
  switch (kind) {
    case AttackKind::kSpacCE:
    case AttackKind::kPgdCE:
      spec.kind = AttackLossKind::kCrossEntropyTest;
      break;
    case AttackKind::kSpacCW:
    case AttackKind::kPgdCW:
      spec.kind = AttackLossKind::kNegativeCW;
      break;
    default:
      spec.kind = AttackLossKind::kCrossEntropyTrain;
      spec.stage = AttackStage::kPoison;
      break;
  }
  if (kind == AttackKind::kPgdCE || kind == AttackKind::kPgdCW || kind == AttackKind::kMaxMin) {
    cfg.beta = 0.0;
  }
  WhiteBoxOptions wb;
  wb.surrogate = options.victim;
  wb.surrogate.seed = seed;
  wb.retrain_every = options.retrain_every;
  return run_white_box_attack(g, cfg, spec, *victim, wb);
}

void ExperimentSpec::validate() const {
  if (attacks.empty()) throw InvalidArgument("no attacks requested");
  if (budgets.empty()) throw InvalidArgument("no budgets requested");
  for (double eps : budgets) {
    if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("budgets must lie in (0, 1]");
  }
  if (seeds.empty()) throw InvalidArgument("seed list must not be empty");
  if (options.steps < 1) throw InvalidArgument("steps must be >= 1");
}

std::vector<TimingRow> Report::compute_timing() const {
  std::map<std::pair<int, double>, TimingRow> acc;
  for (const auto& c : cells) {
    auto& row = acc[{static_cast<int>(c.attack), c.epsilon}];
    row.attack = c.attack;
    row.epsilon = c.epsilon;
    row.mean_seconds += c.wall_time;
    ++row.runs;
  }
  std::vector<TimingRow> out;
  for (auto& [key, row] : acc) {
    row.mean_seconds /= row.runs;
    out.push_back(row);
  }
  return out;
}

Report run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const LoadedGraph loaded = load_source(spec.dataset);
  const Graph& g = loaded.graph;
  if (!g.has_labels() || !g.has_features() || !g.has_split()) {
    throw MissingLabels("experiments need features, labels and a split");
  }
  const double beta = spec.options.beta.value_or(default_beta(spec.dataset.name, g.density()));
  const Vector clean_eigs =
      eigenvalues_full(normalized_laplacian(g.adjacency(), IsolatedPolicy::kUnitDiagonal));
  const Matrix clean_propagator = self_loop_propagator(g);
  const auto& test = g.split().test;

  Report report;
  report.dataset = spec.dataset.name;
  report.stage = spec.stage;
  report.num_nodes = g.num_nodes();
  report.num_edges = g.num_edges();
  report.clean_eigenvalues.assign(clean_eigs.data(), clean_eigs.data() + clean_eigs.size());

  const auto flush = [&] {
    report.timing = report.compute_timing();
    if (!spec.output_dir.empty()) write_report_files(report, spec.output_dir);
  };

  try {
    for (std::uint64_t seed : spec.seeds) {
      GcnHyper hyper = spec.options.victim;
      hyper.seed = seed;
      const GcnModel victim = train_gcn(g, hyper);
      report.clean.push_back(
          {seed, evaluate_misclassification(victim, clean_propagator, g.features(), g.labels(),
                                            test)});

      for (AttackKind kind : spec.attacks) {
        for (double eps : spec.budgets) {
          const AttackResult result = run_attack(g, kind, eps, seed, spec.options, beta, &victim);
          Cell cell;
          cell.attack = kind;
          cell.epsilon = eps;
          cell.seed = seed;
          cell.flips = result.flips;
          cell.flips_used = result.flips_used;
          cell.wall_time = result.wall_time;
          cell.counts = count_flips(g, result.binary_perturbation);

          Vector shifted;
          cell.spectral_distance =
              spectral_distance_to_clean(clean_eigs, result.perturbed_adjacency, &shifted);
          const Vector diff = shifted - clean_eigs;
          cell.eigenvalue_shift.assign(diff.data(), diff.data() + diff.size());

          if (spec.stage == AttackStage::kEvasion) {
            cell.misclassification = evaluate_misclassification(
                victim, self_loop_propagator(result.perturbed_adjacency), g.features(),
                g.labels(), test);
          } else {
            const Graph poisoned = g.with_adjacency(result.perturbed_adjacency);
            const GcnModel retrained = train_gcn(poisoned, hyper);
            cell.misclassification = evaluate_misclassification(
                retrained, clean_propagator, g.features(), g.labels(), test);
          }
          report.cells.push_back(std::move(cell));
          flush();
        }
      }
    }
  } catch (const std::exception& e) {
    report.error = e.what();
    flush();
    throw;
  }
  report.complete = true;
  flush();
  return report;
}

}  // namespace spac

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spac/analysis.hpp"
#include "spac/attack.hpp"
#include "spac/datasets.hpp"
#include "spac/gcn.hpp"

namespace spac {

enum class AttackKind {
  kSpac,
  kSpacApprox,
  kSpacCE,
  kSpacCW,
  kSpacMin,
  kPgdCE,
  kPgdCW,
  kMaxMin,
  kRandom,
  kDice,
};

/// "SPAC", "SPAC-approx", "SPAC-CE", "SPAC-C&W", "SPAC-Min", "PGD-CE",
/// "PGD-C&W", "Max-Min", "Random", "DICE".
std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& name);
std::string to_string(AttackStage stage);
AttackStage parse_stage(const std::string& name);

/// Whether the attack needs a trained GCN (white-box objectives).
bool is_white_box(AttackKind kind);

/// Default spectral weight: the per-dataset value for the four benchmark
/// graphs, otherwise 100 x density.
double default_beta(const std::string& dataset_name, double density);

struct DatasetSource {
  std::string name;
  std::optional<DatasetPaths> paths;
  std::optional<SyntheticKind> synthetic;
  std::uint64_t graph_seed = 0;
};

LoadedGraph load_source(const DatasetSource& source);

struct AttackOptions {
  int steps = 100;
  /// Spectral weight for the SPAC white-box variants; default_beta if unset.
  std::optional<double> beta;
  ApproxParams approx = {};
  double kappa = 0.0;
  double noise_scale = 1e-5;
  int sample_trials = 20;
  GcnHyper victim = {};
  int retrain_every = 20;
};

/// Runs one attack. `victim` is required for the white-box kinds.
AttackResult run_attack(const Graph& g, AttackKind kind, double epsilon, std::uint64_t seed,
                        const AttackOptions& options, double beta,
                        const GcnModel* victim = nullptr);

struct ExperimentSpec {
  DatasetSource dataset;
  std::vector<AttackKind> attacks;
  AttackStage stage = AttackStage::kEvasion;
  std::vector<double> budgets;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;  ///< empty: no files written
  AttackOptions options = {};

  void validate() const;
};

struct CleanRow {
  std::uint64_t seed = 0;
  double misclassification = 0.0;
  friend bool operator==(const CleanRow&, const CleanRow&) = default;
};

struct Cell {
  AttackKind attack = AttackKind::kSpac;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double misclassification = 0.0;
  int flips_used = 0;
  double spectral_distance = 0.0;
  std::vector<NodePair> flips;
  std::optional<FlipCounts> counts;
  /// lambda(perturbed) - lambda(clean), by rank.
  std::vector<double> eigenvalue_shift;
  /// Attack wall time in seconds; reported separately from report.json.
  double wall_time = 0.0;
};

struct TimingRow {
  AttackKind attack = AttackKind::kSpac;
  double epsilon = 0.0;
  double mean_seconds = 0.0;
  int runs = 0;
};

struct Report {
  std::string dataset;
  AttackStage stage = AttackStage::kEvasion;
  int num_nodes = 0;
  int num_edges = 0;
  std::vector<double> clean_eigenvalues;
  std::vector<CleanRow> clean;
  std::vector<Cell> cells;
  std::vector<TimingRow> timing;
  bool complete = false;
  std::string error;

  std::vector<TimingRow> compute_timing() const;
};

/// Evasion: train on the clean graph, attack, evaluate on the perturbed graph.
/// Poison: attack, train a fresh victim on the poisoned graph, evaluate on the
/// clean graph. Writes outputs into spec.output_dir after every cell; on
/// failure the partial report is flushed and the error rethrown.
Report run_experiment(const ExperimentSpec& spec);

/// Floats rounded to 6 significant digits.
double round6(double x);

nlohmann::json to_json(const AttackResult& result);
/// Deterministic report content; wall times are excluded.
nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

void write_report_files(const Report& report, const std::string& dir);
void write_edge_bands(const Graph& g, int k, const std::string& path);
void write_spectrum_diff(const SpectrumShiftReport& report, const std::string& path);

}  // namespace spac

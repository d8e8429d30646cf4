#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spac/analysis.hpp"
#include "spac/errors.hpp"
#include "spac/experiment.hpp"
#include "spac/spectral.hpp"

namespace fs = std::filesystem;

namespace {

struct SourceFlags {
  std::string dataset;
  std::string synthetic;
  std::uint64_t graph_seed = 0;

  void add(CLI::App* app) {
    auto* d = app->add_option("--dataset", dataset,
                              "Directory with edges.tsv (or edges.txt) and optional "
                              "features.csv, labels.csv, split.json");
    auto* s = app->add_option("--synthetic", synthetic,
                              "Generator: karate | sbm:SIZES:P_IN:P_OUT[:DIM[:SIGNAL]] | "
                              "geometric:N:RADIUS[:CLUSTERS]");
    d->excludes(s);
    app->add_option("--graph-seed", graph_seed, "Seed of the synthetic generator");
  }

  spac::DatasetSource source() const {
    spac::DatasetSource src;
    src.graph_seed = graph_seed;
    if (!dataset.empty()) {
      const fs::path dir(dataset);
      spac::DatasetPaths paths;
      for (const char* name : {"edges.tsv", "edges.txt"}) {
        if (fs::exists(dir / name)) {
          paths.edges = (dir / name).string();
          break;
        }
      }
      if (paths.edges.empty()) throw spac::Error("no edges.tsv or edges.txt in " + dataset);
      if (fs::exists(dir / "features.csv")) paths.features = (dir / "features.csv").string();
      if (fs::exists(dir / "labels.csv")) paths.labels = (dir / "labels.csv").string();
      if (fs::exists(dir / "split.json")) paths.split = (dir / "split.json").string();
      src.paths = paths;
      src.name = fs::absolute(dir).lexically_normal().filename().string();
      if (src.name.empty()) src.name = fs::absolute(dir).parent_path().filename().string();
    } else if (!synthetic.empty()) {
      src.synthetic = spac::parse_synthetic_spec(synthetic);
      src.name = synthetic;
    } else {
      throw spac::Error("one of --dataset or --synthetic is required");
    }
    return src;
  }
};

struct KnobFlags {
  int steps = 100;
  std::optional<double> beta;
  int k1 = 128;
  int k2 = 64;
  int m = 10;
  double kappa = 0.0;
  int epochs = 200;

  void add(CLI::App* app) {
    app->add_option("--steps", steps, "PGD iterations")->check(CLI::PositiveNumber);
    app->add_option("--beta", beta, "Spectral weight for white-box variants");
    app->add_option("--k1", k1, "Lowest eigenvalues kept by SPAC-approx");
    app->add_option("--k2", k2, "Highest eigenvalues kept by SPAC-approx");
    app->add_option("--m", m, "SPAC-approx refresh period")->check(CLI::PositiveNumber);
    app->add_option("--kappa", kappa, "C&W confidence");
    app->add_option("--epochs", epochs, "GCN training epochs");
  }

  spac::AttackOptions options() const {
    spac::AttackOptions o;
    o.steps = steps;
    o.beta = beta;
    o.approx = {k1, k2, m};
    o.kappa = kappa;
    o.victim.epochs = epochs;
    return o;
  }
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_attack(const SourceFlags& src_flags, const KnobFlags& knobs, const std::string& attack,
               const std::string& stage, double epsilon, std::uint64_t seed,
               const std::string& out) {
  const spac::DatasetSource src = src_flags.source();
  const spac::LoadedGraph loaded = spac::load_source(src);
  print_warnings(loaded.warnings);
  const spac::Graph& g = loaded.graph;
  const spac::AttackKind kind = spac::parse_attack_kind(attack);
  spac::parse_stage(stage);
  const spac::AttackOptions options = knobs.options();

  std::optional<spac::GcnModel> victim;
  if (spac::is_white_box(kind)) {
    spac::GcnHyper hyper = options.victim;
    hyper.seed = seed;
    victim = spac::train_gcn(g, hyper);
  }
  const double beta = options.beta.value_or(spac::default_beta(src.name, g.density()));
  const spac::AttackResult result = spac::run_attack(g, kind, epsilon, seed, options, beta,
                                                     victim ? &*victim : nullptr);
  nlohmann::json j = spac::to_json(result);
  j["attack"] = spac::to_string(kind);
  j["epsilon"] = epsilon;
  j["seed"] = seed;
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream f(out);
    if (!f) throw spac::Error("cannot write " + out);
    f << j.dump(2) << '\n';
  }
  std::cerr << spac::to_string(kind) << ": " << result.flips_used << " flips in "
            << result.wall_time << " s\n";
  return 0;
}

int cmd_experiment(const SourceFlags& src_flags, const KnobFlags& knobs,
                   const std::vector<std::string>& attacks, const std::string& stage,
                   const std::vector<double>& budgets, const std::vector<std::uint64_t>& seeds,
                   const std::string& out) {
  spac::ExperimentSpec spec;
  spec.dataset = src_flags.source();
  for (const auto& a : attacks) spec.attacks.push_back(spac::parse_attack_kind(a));
  spec.stage = spac::parse_stage(stage);
  spec.budgets = budgets;
  spec.seeds = seeds;
  spec.output_dir = out;
  spec.options = knobs.options();
  const spac::Report report = spac::run_experiment(spec);
  for (const auto& row : report.clean) {
    std::cout << "clean seed=" << row.seed << " misclassification=" << row.misclassification
              << '\n';
  }
  for (const auto& c : report.cells) {
    std::cout << spac::to_string(c.attack) << " eps=" << c.epsilon << " seed=" << c.seed
              << " misclassification=" << c.misclassification << " flips=" << c.flips_used
              << " time=" << c.wall_time << "s\n";
  }
  return 0;
}

int cmd_spectra(const SourceFlags& src_flags, int band_k, const std::string& out) {
  const spac::LoadedGraph loaded = spac::load_source(src_flags.source());
  print_warnings(loaded.warnings);
  const spac::Graph& g = loaded.graph;
  const int k = band_k > 0 ? std::min(band_k, g.num_nodes()) : std::max(1, g.num_nodes() / 10);
  fs::create_directories(out);
  spac::write_edge_bands(g, k, (fs::path(out) / "edge_bands.csv").string());
  const spac::Vector eigs = spac::eigenvalues_full(
      spac::normalized_laplacian(g.adjacency(), spac::IsolatedPolicy::kUnitDiagonal));
  std::ofstream f(fs::path(out) / "eigenvalues.csv");
  f << "rank,eigenvalue\n";
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    f << i << ',' << spac::round6(eigs(i)) << '\n';
  }
  std::cout << "n=" << g.num_nodes() << " edges=" << g.num_edges() << " band k=" << k << '\n';
  return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
  std::ifstream f(in);
  if (!f) throw spac::Error("cannot open " + in);
  const spac::Report report = spac::report_from_json(nlohmann::json::parse(f));
  spac::write_report_files(report, out);
  std::cout << report.cells.size() << " cells written to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral graph structure attacks and evaluation"};
  app.require_subcommand(1);

  SourceFlags src;
  KnobFlags knobs;

  std::string attack = "SPAC";
  std::vector<std::string> attacks = {"SPAC"};
  std::string stage = "evasion";
  double epsilon = 0.05;
  std::vector<double> budgets = {0.05};
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0};
  std::string out;
  std::string in;
  int band_k = 0;

  auto* attack_cmd = app.add_subcommand("attack", "Run one attack and print the flips as JSON");
  src.add(attack_cmd);
  knobs.add(attack_cmd);
  attack_cmd->add_option("--attack", attack, "Attack name");
  attack_cmd->add_option("--stage", stage, "evasion | poison");
  attack_cmd->add_option("--epsilon", epsilon, "Budget ratio")->check(CLI::Range(0.0, 1.0));
  attack_cmd->add_option("--seed", seed, "Random seed");
  attack_cmd->add_option("--out", out, "Output JSON file (default stdout)");

  auto* exp_cmd = app.add_subcommand("experiment", "Run an attack x budget x seed grid");
  src.add(exp_cmd);
  knobs.add(exp_cmd);
  exp_cmd->add_option("--attack", attacks, "Attack names")->delimiter(',');
  exp_cmd->add_option("--stage", stage, "evasion | poison");
  exp_cmd->add_option("--epsilon", budgets, "Budget ratios")->delimiter(',');
  exp_cmd->add_option("--seed", seeds, "Seeds")->delimiter(',');
  exp_cmd->add_option("--out", out, "Output directory")->required();

  auto* spectra_cmd = app.add_subcommand("spectra", "Write eigenvalues and band reconstructions");
  src.add(spectra_cmd);
  spectra_cmd->add_option("--band-k", band_k, "Band size (default n/10)");
  spectra_cmd->add_option("--out", out, "Output directory")->required();

  auto* report_cmd = app.add_subcommand("report", "Regenerate CSV tables from report.json");
  report_cmd->add_option("--in", in, "report.json")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*attack_cmd) return cmd_attack(src, knobs, attack, stage, epsilon, seed, out);
    if (*exp_cmd) return cmd_experiment(src, knobs, attacks, stage, budgets, seeds, out);
    if (*spectra_cmd) return cmd_spectra(src, band_k, out);
    if (*report_cmd) return cmd_report(in, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

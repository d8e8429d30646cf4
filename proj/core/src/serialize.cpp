#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "spac/errors.hpp"
#include "spac/experiment.hpp"
#include "spac/spectral.hpp"

namespace spac {

namespace {

std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

nlohmann::json rounded(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(round6(x));
  return out;
}

nlohmann::json pairs_json(const std::vector<NodePair>& pairs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : pairs) out.push_back({p.first, p.second});
  return out;
}

nlohmann::json counts_json(const FlipCounts& c) {
  return {{"added_inter", c.added_inter},
          {"added_intra", c.added_intra},
          {"removed_inter", c.removed_inter},
          {"removed_intra", c.removed_intra}};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

double round6(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(fmt6(x).c_str(), nullptr);
}

nlohmann::json to_json(const AttackResult& result) {
  std::vector<double> trace(result.objective_trace.begin(), result.objective_trace.end());
  return {{"flips", pairs_json(result.flips)},
          {"flips_used", result.flips_used},
          {"trace", rounded(trace)}};
}

nlohmann::json to_json(const Report& report) {
  nlohmann::json clean = nlohmann::json::array();
  for (const auto& row : report.clean) {
    clean.push_back({{"seed", row.seed}, {"misclassification", round6(row.misclassification)}});
  }
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"attack", to_string(c.attack)},
                     {"epsilon", round6(c.epsilon)},
                     {"seed", c.seed},
                     {"misclassification", round6(c.misclassification)},
                     {"flips_used", c.flips_used},
                     {"spectral_distance", round6(c.spectral_distance)},
                     {"flips", pairs_json(c.flips)},
                     {"counts", c.counts ? counts_json(*c.counts) : nlohmann::json(nullptr)},
                     {"eigenvalue_shift", rounded(c.eigenvalue_shift)}});
  }
  nlohmann::json j = {{"dataset", report.dataset},
                      {"stage", to_string(report.stage)},
                      {"num_nodes", report.num_nodes},
                      {"num_edges", report.num_edges},
                      {"complete", report.complete},
                      {"clean_eigenvalues", rounded(report.clean_eigenvalues)},
                      {"clean", clean},
                      {"cells", cells}};
  if (!report.error.empty()) j["error"] = report.error;
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  Report r;
  r.dataset = j.at("dataset").get<std::string>();
  r.stage = parse_stage(j.at("stage").get<std::string>());
  r.num_nodes = j.at("num_nodes").get<int>();
  r.num_edges = j.at("num_edges").get<int>();
  r.complete = j.at("complete").get<bool>();
  r.clean_eigenvalues = j.at("clean_eigenvalues").get<std::vector<double>>();
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  for (const auto& row : j.at("clean")) {
    r.clean.push_back(
        {row.at("seed").get<std::uint64_t>(), row.at("misclassification").get<double>()});
  }
  for (const auto& cj : j.at("cells")) {
    Cell c;
    c.attack = parse_attack_kind(cj.at("attack").get<std::string>());
    c.epsilon = cj.at("epsilon").get<double>();
    c.seed = cj.at("seed").get<std::uint64_t>();
    c.misclassification = cj.at("misclassification").get<double>();
    c.flips_used = cj.at("flips_used").get<int>();
    c.spectral_distance = cj.at("spectral_distance").get<double>();
    for (const auto& p : cj.at("flips")) c.flips.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    if (!cj.at("counts").is_null()) {
      const auto& k = cj.at("counts");
      c.counts = FlipCounts{k.at("added_inter").get<int>(), k.at("added_intra").get<int>(),
                            k.at("removed_inter").get<int>(), k.at("removed_intra").get<int>()};
    }
    c.eigenvalue_shift = cj.at("eigenvalue_shift").get<std::vector<double>>();
    r.cells.push_back(std::move(c));
  }
  return r;
}

void write_report_files(const Report& report, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  open_out(root / "report.json") << to_json(report).dump(2) << '\n';

  // Mean misclassification per (attack, epsilon), rows in first-seen order.
  std::vector<AttackKind> attack_order;
  std::set<double> budgets;
  std::map<std::pair<int, double>, std::vector<double>> rates;
  for (const auto& c : report.cells) {
    if (std::find(attack_order.begin(), attack_order.end(), c.attack) == attack_order.end()) {
      attack_order.push_back(c.attack);
    }
    budgets.insert(c.epsilon);
    rates[{static_cast<int>(c.attack), c.epsilon}].push_back(c.misclassification);
  }
  std::vector<double> clean_rates;
  for (const auto& row : report.clean) clean_rates.push_back(row.misclassification);

  {
    auto out = open_out(root / "table3.csv");
    out << "attack";
    for (double eps : budgets) out << ',' << csv_field(report.dataset + "@" + fmt6(eps));
    out << '\n';
    out << "Clean";
    for (std::size_t k = 0; k < budgets.size(); ++k) out << ',' << fmt6(mean(clean_rates));
    out << '\n';
    for (AttackKind a : attack_order) {
      out << to_string(a);
      for (double eps : budgets) {
        const auto it = rates.find({static_cast<int>(a), eps});
        out << ',';
        if (it != rates.end()) out << fmt6(mean(it->second));
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(root / "sweep.csv");
    out << "attack,epsilon,mean,std,runs\n";
    for (AttackKind a : attack_order) {
      for (double eps : budgets) {
        const auto it = rates.find({static_cast<int>(a), eps});
        if (it == rates.end()) continue;
        out << to_string(a) << ',' << fmt6(eps) << ',' << fmt6(mean(it->second)) << ','
            << fmt6(stddev(it->second)) << ',' << it->second.size() << '\n';
      }
    }
  }
  {
    auto out = open_out(root / "timing.csv");
    out << "attack,epsilon,mean_seconds,runs\n";
    for (const auto& t : report.timing) {
      out << to_string(t.attack) << ',' << fmt6(t.epsilon) << ',' << fmt6(t.mean_seconds) << ','
          << t.runs << '\n';
    }
  }
  {
    auto out = open_out(root / "flip_counts.csv");
    out << "attack,epsilon,seed,added_inter,added_intra,removed_inter,removed_intra\n";
    for (const auto& c : report.cells) {
      if (!c.counts) continue;
      out << to_string(c.attack) << ',' << fmt6(c.epsilon) << ',' << c.seed << ','
          << c.counts->added_inter << ',' << c.counts->added_intra << ','
          << c.counts->removed_inter << ',' << c.counts->removed_intra << '\n';
    }
  }
  {
    auto out = open_out(root / "spectrum_diff.csv");
    out << "attack,epsilon,seed,rank,clean_eigenvalue,shift\n";
    for (const auto& c : report.cells) {
      for (std::size_t k = 0; k < c.eigenvalue_shift.size(); ++k) {
        const double x = k < report.clean_eigenvalues.size() ? report.clean_eigenvalues[k] : 0.0;
        out << to_string(c.attack) << ',' << fmt6(c.epsilon) << ',' << c.seed << ',' << k << ','
            << fmt6(x) << ',' << fmt6(c.eigenvalue_shift[k]) << '\n';
      }
    }
  }
}

void write_edge_bands(const Graph& g, int k, const std::string& path) {
  const Matrix low = band_reconstruction_matrix(g, Band::lowest(k));
  const Matrix high = band_reconstruction_matrix(g, Band::highest(k));
  auto out = open_out(path);
  out << "u,v,lowest,highest\n";
  for (const auto& e : g.edges()) {
    out << e.first << ',' << e.second << ',' << fmt6(low(e.first, e.second)) << ','
        << fmt6(high(e.first, e.second)) << '\n';
  }
}

void write_spectrum_diff(const SpectrumShiftReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "rank,clean_eigenvalue,difference\n";
  for (Eigen::Index k = 0; k < report.difference.size(); ++k) {
    out << k << ',' << fmt6(report.clean_eigenvalues(k)) << ',' << fmt6(report.difference(k))
        << '\n';
  }
}

}  // namespace spac

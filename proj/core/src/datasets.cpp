#include "spac/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spac/errors.hpp"

namespace spac {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

struct EdgeFile {
  std::vector<NodePair> edges;
  int max_id = -1;
};

EdgeFile read_edges(const std::string& path, std::vector<std::string>& warnings) {
  auto in = open_or_throw(path);
  EdgeFile out;
  std::set<NodePair> seen;
  std::string line;
  int line_no = 0;
  int duplicates = 0;
  int loops = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream fields(t);
    std::string a;
    std::string b;
    std::string extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      throw ParseError(path, line_no, "expected two node ids");
    }
    int u = 0;
    int v = 0;
    if (!parse_number(a, u) || !parse_number(b, v) || u < 0 || v < 0) {
      throw ParseError(path, line_no, "invalid node id");
    }
    if (u == v) {
      ++loops;
      continue;
    }
    const NodePair p{std::min(u, v), std::max(u, v)};
    if (!seen.insert(p).second) {
      ++duplicates;
      continue;
    }
    out.edges.push_back(p);
    out.max_id = std::max(out.max_id, p.second);
  }
  if (duplicates > 0) {
    warnings.push_back(path + ": dropped " + std::to_string(duplicates) + " duplicate edge(s)");
  }
  if (loops > 0) {
    warnings.push_back(path + ": dropped " + std::to_string(loops) + " self-loop(s)");
  }
  return out;
}

Matrix read_features(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<double> row;
    for (const auto& field : split_on(t, ',')) {
      double x = 0.0;
      if (!parse_number(field, x)) {
        if (rows.empty() && row.empty()) {
          row.clear();
          break;  // header
        }
        throw ParseError(path, line_no, "invalid number '" + field + "'");
      }
      row.push_back(x);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix x(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  return x;
}

std::map<int, int> read_labels(const std::string& path) {
  auto in = open_or_throw(path);
  std::map<int, int> labels;
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_on(t, ',');
    int id = 0;
    int y = 0;
    const bool ok = fields.size() == 2 && parse_number(fields[0], id) &&
                    parse_number(fields[1], y);
    if (!ok) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ParseError(path, line_no, "expected 'node_id,label'");
    }
    first = false;
    if (id < 0 || y < 0) throw ParseError(path, line_no, "negative node id or label");
    if (!labels.emplace(id, y).second) {
      throw ParseError(path, line_no, "duplicate label for node " + std::to_string(id));
    }
  }
  return labels;
}

Split read_split(const std::string& path) {
  auto in = open_or_throw(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  if (!j.contains("train") || !j.contains("test")) {
    throw ParseError(path, 0, "split needs 'train' and 'test' arrays");
  }
  Split s;
  try {
    s.train = j.at("train").get<std::vector<int>>();
    s.test = j.at("test").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  return s;
}

Matrix class_features(const std::vector<int>& labels, int dim, double signal,
                      std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  Matrix x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = noise(rng);
    x(i, labels[static_cast<std::size_t>(i)] % dim) += signal;
  }
  return x;
}

LoadedGraph make_sbm(const SbmParams& p, std::uint64_t seed) {
  if (p.sizes.empty()) throw InvalidArgument("SBM needs at least one block");
  if (p.p_in < 0.0 || p.p_in > 1.0 || p.p_out < 0.0 || p.p_out > 1.0) {
    throw InvalidArgument("SBM probabilities must lie in [0,1]");
  }
  if (p.feature_dim < 1) throw InvalidArgument("feature_dim must be >= 1");
  std::vector<int> labels;
  for (std::size_t b = 0; b < p.sizes.size(); ++b) {
    if (p.sizes[b] < 1) throw InvalidArgument("SBM block sizes must be positive");
    labels.insert(labels.end(), static_cast<std::size_t>(p.sizes[b]), static_cast<int>(b));
  }
  const int n = static_cast<int>(labels.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix a = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double prob = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]
                              ? p.p_in
                              : p.p_out;
      if (unif(rng) < prob) a(i, j) = a(j, i) = 1.0;
    }
  }
  LoadedGraph out;
  int fixed = 0;
  // Attach isolated nodes to a random member of their own block.
  for (int i = 0; i < n; ++i) {
    if (a.row(i).sum() > 0.0) continue;
    std::vector<int> mates;
    for (int j = 0; j < n; ++j) {
      if (j != i && labels[static_cast<std::size_t>(j)] == labels[static_cast<std::size_t>(i)]) {
        mates.push_back(j);
      }
    }
    if (mates.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, mates.size() - 1);
    const int j = mates[pick(rng)];
    a(i, j) = a(j, i) = 1.0;
    ++fixed;
  }
  if (fixed > 0) {
    out.warnings.push_back("DisconnectedOutput: connected " + std::to_string(fixed) +
                           " isolated node(s) inside their block");
  }
  Matrix x = class_features(labels, p.feature_dim, p.signal, rng);
  Split split = make_split(labels, 20, 1000, seed);
  out.graph = Graph(std::move(a), std::move(x), labels, std::move(split));
  return out;
}

std::vector<int> kmeans(const Matrix& pts, int k, std::mt19937_64& rng) {
  const Eigen::Index n = pts.rows();
  if (k < 1 || k > n) throw InvalidArgument("cluster count must lie in [1, n]");
  // k-means++ seeding followed by Lloyd iterations.
  Matrix centers(k, pts.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = pts.row(first(rng));
  Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      dist2(i) = std::min(dist2(i), (pts.row(i) - centers.row(c - 1)).squaredNorm());
    }
    std::discrete_distribution<Eigen::Index> pick(dist2.data(), dist2.data() + n);
    centers.row(c) = pts.row(pick(rng));
  }
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (pts.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(k, pts.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += pts.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
    }
  }
  return assign;
}

LoadedGraph make_geometric(const GeometricParams& p, std::uint64_t seed) {
  if (p.n < 2) throw InvalidArgument("geometric graph needs n >= 2");
  if (p.radius < 0.0) throw InvalidArgument("radius must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix pts(p.n, 2);
  for (int i = 0; i < p.n; ++i) {
    pts(i, 0) = unif(rng);
    pts(i, 1) = unif(rng);
  }
  Matrix a = Matrix::Zero(p.n, p.n);
  for (int j = 0; j < p.n; ++j) {
    for (int i = 0; i < j; ++i) {
      if ((pts.row(i) - pts.row(j)).norm() <= p.radius) a(i, j) = a(j, i) = 1.0;
    }
  }
  LoadedGraph out;
  int fixed = 0;
  for (int i = 0; i < p.n; ++i) {
    if (a.row(i).sum() > 0.0) continue;
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < p.n; ++j) {
      if (j == i) continue;
      const double d = (pts.row(i) - pts.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    a(i, nearest) = a(nearest, i) = 1.0;
    ++fixed;
  }
  if (fixed > 0) {
    out.warnings.push_back("DisconnectedOutput: connected " + std::to_string(fixed) +
                           " isolated node(s) to their nearest neighbour");
  }
  std::vector<int> labels = kmeans(pts, p.clusters, rng);
  Split split = make_split(labels, 20, 1000, seed);
  out.graph = Graph(std::move(a), std::move(pts), std::move(labels), std::move(split));
  return out;
}

LoadedGraph make_karate(std::uint64_t seed) {
  const auto edges = karate_edges();
  const Graph base = Graph::from_edges(34, edges);
  std::vector<int> labels = karate_labels();
  Split split = make_split(labels, 20, 1000, seed);
  LoadedGraph out;
  out.graph = Graph(base.adjacency(), Matrix::Identity(34, 34), std::move(labels),
                    std::move(split));
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  double x = 0.0;
  if (!parse_number(s, x)) throw InvalidArgument("invalid " + what + ": '" + s + "'");
  return x;
}

int parse_int(const std::string& s, const std::string& what) {
  int x = 0;
  if (!parse_number(s, x)) throw InvalidArgument("invalid " + what + ": '" + s + "'");
  return x;
}

}  // namespace

LoadedGraph load_dataset(const DatasetPaths& paths) {
  LoadedGraph out;
  const EdgeFile edges = read_edges(paths.edges, out.warnings);

  std::optional<Matrix> features;
  if (paths.features) features = read_features(*paths.features);
  std::optional<std::map<int, int>> label_map;
  if (paths.labels) label_map = read_labels(*paths.labels);

  int n = edges.max_id + 1;
  if (features) {
    const int rows = static_cast<int>(features->rows());
    if (rows < n) {
      throw InconsistentDims("edge list references node " + std::to_string(edges.max_id) +
                             " but features have " + std::to_string(rows) + " rows");
    }
    n = rows;
  }
  std::optional<std::vector<int>> labels;
  if (label_map) {
    const int max_id = label_map->empty() ? -1 : label_map->rbegin()->first;
    if (features && max_id >= n) {
      throw InconsistentDims("label for node " + std::to_string(max_id) + " but only " +
                             std::to_string(n) + " feature rows");
    }
    n = std::max(n, max_id + 1);
    if (static_cast<int>(label_map->size()) != n) {
      throw InconsistentDims(std::to_string(label_map->size()) + " labels for " +
                             std::to_string(n) + " nodes");
    }
    labels.emplace();
    labels->reserve(static_cast<std::size_t>(n));
    for (const auto& [id, y] : *label_map) labels->push_back(y);
  }

  std::optional<Split> split;
  if (paths.split) {
    split = read_split(*paths.split);
  } else if (labels) {
    split = make_split(*labels, 20, 1000, 0);
    out.warnings.push_back("no split file; generated 20 training nodes per class");
  }

  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : edges.edges) a(e.first, e.second) = a(e.second, e.first) = 1.0;
  out.graph = Graph(std::move(a), std::move(features), std::move(labels), std::move(split));
  return out;
}

LoadedGraph generate_synthetic(const SyntheticKind& kind, std::uint64_t seed) {
  return std::visit(
      [seed](const auto& params) -> LoadedGraph {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, SbmParams>) {
          return make_sbm(params, seed);
        } else if constexpr (std::is_same_v<T, GeometricParams>) {
          return make_geometric(params, seed);
        } else {
          return make_karate(seed);
        }
      },
      kind);
}

SyntheticKind parse_synthetic_spec(const std::string& spec) {
  const auto parts = split_on(spec, ':');
  if (parts.empty()) throw InvalidArgument("empty synthetic spec");
  if (parts[0] == "karate" && parts.size() == 1) return KarateParams{};
  if (parts[0] == "sbm" && parts.size() >= 4 && parts.size() <= 6) {
    SbmParams p;
    for (const auto& s : split_on(parts[1], ',')) p.sizes.push_back(parse_int(s, "block size"));
    p.p_in = parse_double(parts[2], "p_in");
    p.p_out = parse_double(parts[3], "p_out");
    if (parts.size() > 4) p.feature_dim = parse_int(parts[4], "feature dim");
    if (parts.size() > 5) p.signal = parse_double(parts[5], "signal");
    return p;
  }
  if (parts[0] == "geometric" && parts.size() >= 3 && parts.size() <= 4) {
    GeometricParams p;
    p.n = parse_int(parts[1], "node count");
    p.radius = parse_double(parts[2], "radius");
    if (parts.size() > 3) p.clusters = parse_int(parts[3], "cluster count");
    return p;
  }
  throw InvalidArgument("unrecognized synthetic spec '" + spec + "'");
}

Split make_split(const std::vector<int>& labels, int per_class, int max_test,
                 std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5eed5917ULL);
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::map<int, int> class_size;
  for (int y : labels) ++class_size[y];
  std::map<int, int> taken;
  Split split;
  std::vector<int> rest;
  for (int v : order) {
    const int y = labels[static_cast<std::size_t>(v)];
    const int cap = std::min(per_class, class_size[y] / 2);
    if (taken[y] < cap) {
      ++taken[y];
      split.train.push_back(v);
    } else {
      rest.push_back(v);
    }
  }
  if (static_cast<int>(rest.size()) > max_test) rest.resize(static_cast<std::size_t>(max_test));
  split.test = std::move(rest);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<NodePair> karate_edges() {
  return {{0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
          {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
          {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
          {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
          {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
          {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
          {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
          {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
          {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
          {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
}

std::vector<int> karate_labels() {
  return {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0,
          0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
}

}  // namespace spac

#include "spac/baselines.hpp"

#include <chrono>
#include <cstdint>
#include <random>
#include <unordered_set>

#include "spac/errors.hpp"

namespace spac {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

NodePair pair_from_index(std::int64_t index, int n) {
  // Row-major enumeration of the strict upper triangle.
  int i = 0;
  std::int64_t row_len = n - 1;
  while (index >= row_len) {
    index -= row_len;
    ++i;
    --row_len;
  }
  return {i, static_cast<int>(i + 1 + index)};
}

NodePair take_random(std::vector<NodePair>& pool, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  const std::size_t k = pick(rng);
  const NodePair p = pool[k];
  pool[k] = pool.back();
  pool.pop_back();
  return p;
}

}  // namespace

AttackResult random_attack(const Graph& g, int budget, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  if (budget < 0) throw InvalidArgument("budget must be non-negative");
  const int n = g.num_nodes();
  const std::int64_t total = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (budget > total) {
    throw BudgetTooLarge("budget " + std::to_string(budget) + " exceeds " +
                         std::to_string(total) + " node pairs");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(0, total > 0 ? total - 1 : 0);
  std::unordered_set<std::int64_t> chosen;
  std::vector<NodePair> flips;
  flips.reserve(static_cast<std::size_t>(budget));
  while (static_cast<int>(flips.size()) < budget) {
    const std::int64_t k = pick(rng);
    if (chosen.insert(k).second) flips.push_back(pair_from_index(k, n));
  }
  return make_result(g, std::move(flips), seconds_since(start));
}

AttackResult dice_attack(const Graph& g, int budget, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  if (!g.has_labels()) throw MissingLabels("DICE needs node labels");
  if (budget < 0) throw InvalidArgument("budget must be non-negative");
  const auto& labels = g.labels();
  const Matrix& a = g.adjacency();
  const int n = g.num_nodes();

  std::vector<NodePair> deletions;
  std::vector<NodePair> additions;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const bool same = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
      if (a(i, j) != 0.0 && same) deletions.push_back({i, j});
      if (a(i, j) == 0.0 && !same) additions.push_back({i, j});
    }
  }
  if (static_cast<std::size_t>(budget) > deletions.size() + additions.size()) {
    throw BudgetTooLarge("DICE pools hold only " +
                         std::to_string(deletions.size() + additions.size()) + " pairs");
  }

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<NodePair> flips;
  flips.reserve(static_cast<std::size_t>(budget));
  for (int k = 0; k < budget; ++k) {
    bool remove = coin(rng);
    if (remove && deletions.empty()) remove = false;
    if (!remove && additions.empty()) remove = true;
    flips.push_back(take_random(remove ? deletions : additions, rng));
  }
  return make_result(g, std::move(flips), seconds_since(start));
}

}  // namespace spac

#include "hammer/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "hammer/corpus_io.hpp"
#include "hammer/error.hpp"
#include "hammer/parallel.hpp"
#include "hammer/random.hpp"

namespace hammer {
namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Exhaustive enumeration in lexicographic order with running prefix sums.

class PathEnumerator {
 public:
  explicit PathEnumerator(const SimilarityMatrix& m) : m_(m), n_(m.size()), used_(n_, false), path_(n_) {}

  std::vector<std::size_t> run() {
    for (std::size_t s = 0; s < n_; ++s) {
      used_[s] = true;
      path_[0] = s;
      extend(1, 0.0);
      used_[s] = false;
    }
    return best_path_;
  }

 private:
  void extend(std::size_t depth, double weight) {
    if (depth == n_) {
      if (weight < best_ - kTieTolerance) {
        best_ = weight;
        best_path_ = path_;
      }
      return;
    }
    const std::size_t last = path_[depth - 1];
    for (std::size_t v = 0; v < n_; ++v) {
      if (used_[v]) continue;
      // A reversed path has the same weight and is lexicographically larger
      // whenever first > last, so those leaves are skipped.
      if (depth == n_ - 1 && v < path_[0]) continue;
      used_[v] = true;
      path_[depth] = v;
      extend(depth + 1, weight + m_(last, v));
      used_[v] = false;
    }
  }

  const SimilarityMatrix& m_;
  std::size_t n_;
  std::vector<bool> used_;
  std::vector<std::size_t> path_;
  double best_ = kInf;
  std::vector<std::size_t> best_path_;
};

// ---------------------------------------------------------------------------
// Subset DP. remaining[mask * n + v] is the cheapest way to visit every node
// outside `mask` starting from endpoint v (v in mask).

std::vector<std::size_t> dp_min_path(const SimilarityMatrix& m) {
  const std::size_t n = m.size();
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<double> remaining((full + 1) * n, kInf);
  for (std::size_t v = 0; v < n; ++v) remaining[full * n + v] = 0.0;

  for (std::size_t mask = full; mask-- > 0;) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!(mask >> v & 1)) continue;
      double best = kInf;
      for (std::size_t u = 0; u < n; ++u) {
        if (mask >> u & 1) continue;
        best = std::min(best, m(v, u) + remaining[(mask | std::size_t{1} << u) * n + u]);
      }
      remaining[mask * n + v] = best;
    }
  }

  double optimum = kInf;
  for (std::size_t s = 0; s < n; ++s) optimum = std::min(optimum, remaining[(std::size_t{1} << s) * n + s]);

  std::vector<std::size_t> path;
  path.reserve(n);
  std::size_t mask = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (remaining[(std::size_t{1} << s) * n + s] <= optimum + kTieTolerance) {
      path.push_back(s);
      mask = std::size_t{1} << s;
      break;
    }
  }
  while (path.size() < n) {
    const std::size_t v = path.back();
    const double target = remaining[mask * n + v];
    for (std::size_t u = 0; u < n; ++u) {
      if (mask >> u & 1) continue;
      const std::size_t next = mask | std::size_t{1} << u;
      if (m(v, u) + remaining[next * n + u] <= target + kTieTolerance) {
        path.push_back(u);
        mask = next;
        break;
      }
    }
  }
  return path;
}

// ---------------------------------------------------------------------------
// One greedy construction.

std::vector<std::size_t> greedy_walk(const SimilarityMatrix& m, std::size_t eta, std::size_t start,
                                     Engine& engine) {
  const std::size_t n = m.size();
  std::vector<std::size_t> path;
  path.reserve(n);
  path.push_back(start);

  std::vector<std::size_t> unvisited;
  unvisited.reserve(n - 1);
  for (std::size_t v = 0; v < n; ++v)
    if (v != start) unvisited.push_back(v);

  // Top-eta candidates as (similarity, node, slot in unvisited), ascending.
  struct Candidate {
    double similarity;
    std::size_t node;
    std::size_t slot;
  };
  std::vector<Candidate> top;
  top.reserve(eta + 1);
  const auto before = [](const Candidate& a, const Candidate& b) {
    return a.similarity < b.similarity || (a.similarity == b.similarity && a.node < b.node);
  };

  while (!unvisited.empty()) {
    const auto row = m.row(path.back());
    const std::size_t width = std::min(eta, unvisited.size());
    top.clear();
    for (std::size_t slot = 0; slot < unvisited.size(); ++slot) {
      const Candidate c{row[unvisited[slot]], unvisited[slot], slot};
      if (top.size() == width && !before(c, top.back())) continue;
      top.insert(std::upper_bound(top.begin(), top.end(), c, before), c);
      if (top.size() > width) top.pop_back();
    }
    const Candidate pick = top[uniform_index(engine, top.size())];
    path.push_back(pick.node);
    unvisited[pick.slot] = unvisited.back();
    unvisited.pop_back();
  }
  return path;
}

std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;  // exact: c * (n-k+i) is divisible by i
    if (c > cap) return cap + 1;
  }
  return c;
}

}  // namespace

double path_weight(std::span<const std::size_t> path, const SimilarityMatrix& m, bool closed) {
  require_permutation(path, m.size());
  double w = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) w += m(path[k], path[k + 1]);
  if (closed && path.size() > 2) w += m(path.back(), path.front());
  return w;
}

CuriosityOrder exact_min_path(const SimilarityMatrix& m, ExactMode mode) {
  const std::size_t n = m.size();
  if (n == 0) throw InvalidArgument("exact_min_path: empty matrix");
  if (mode == ExactMode::automatic)
    mode = n <= kEnumerateAutoLimit ? ExactMode::enumerate : ExactMode::dynamic_programming;
  const std::size_t limit = mode == ExactMode::enumerate ? kEnumerateLimit : kDynamicProgrammingLimit;
  if (n > limit)
    throw InvalidArgument("exact_min_path: n = " + std::to_string(n) + " exceeds the exact limit of " +
                          std::to_string(limit) + "; use eta_ghs for larger inputs");

  CuriosityOrder order;
  order.generator = mode == ExactMode::enumerate ? "exact-enumerate" : "exact-dp";
  order.path = n == 1 ? std::vector<std::size_t>{0}
                      : (mode == ExactMode::enumerate ? PathEnumerator(m).run() : dp_min_path(m));
  order.weight = path_weight(order.path, m);
  return order;
}

CuriosityOrder eta_ghs(const SimilarityMatrix& m, const GhsOptions& options) {
  const std::size_t n = m.size();
  if (n == 0) throw InvalidArgument("eta_ghs: empty matrix");
  if (options.eta < 1) throw InvalidArgument("eta_ghs: eta must be >= 1");
  const std::size_t restarts = options.restarts.value_or(default_restarts(n));
  if (restarts < 1) throw InvalidArgument("eta_ghs: restarts must be >= 1");
  if (options.forced_start && *options.forced_start >= n)
    throw InvalidArgument("eta_ghs: forced start " + std::to_string(*options.forced_start) + " out of range");

  std::vector<std::vector<std::size_t>> paths(restarts);
  std::vector<double> weights(restarts);
  parallel_for(restarts, options.threads, [&](std::size_t r) {
    Engine engine = make_engine(options.seed, r);
    const std::size_t start = options.forced_start ? *options.forced_start : uniform_index(engine, n);
    paths[r] = greedy_walk(m, options.eta, start, engine);
    weights[r] = path_weight(paths[r], m, options.cycle);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (weights[r] < weights[best]) best = r;

  CuriosityOrder order;
  order.path = std::move(paths[best]);
  order.weight = weights[best];
  order.generator = "eta-ghs";
  order.eta = options.eta;
  order.restarts = restarts;
  order.seed = options.seed;
  order.cycle = options.cycle;
  order.restart_weights = std::move(weights);
  return order;
}

CuriosityOrder random_order(std::size_t n, std::uint64_t seed, const SimilarityMatrix* m) {
  if (n == 0) throw InvalidArgument("random_order: n must be >= 1");
  if (m != nullptr && m->size() != n) throw InvalidArgument("random_order: matrix size does not match n");
  CuriosityOrder order;
  order.path.resize(n);
  std::iota(order.path.begin(), order.path.end(), std::size_t{0});
  Engine engine = make_engine(seed);
  for (std::size_t i = n; i-- > 1;) std::swap(order.path[i], order.path[uniform_index(engine, i + 1)]);
  order.generator = "random";
  order.seed = seed;
  order.weight_computed = m != nullptr;
  order.weight = m != nullptr ? path_weight(order.path, *m) : 0.0;
  return order;
}

double pairwise_similarity_sum(const SimilarityMatrix& m, std::span<const std::size_t> subset) {
  double s = 0.0;
  for (std::size_t a = 0; a < subset.size(); ++a)
    for (std::size_t b = 0; b < subset.size(); ++b)
      if (a != b) s += m(subset[a], subset[b]);
  return s;
}

std::vector<std::size_t> select_diverse_subset(const SimilarityMatrix& m, std::size_t size, SubsetMode mode) {
  const std::size_t n = m.size();
  if (size < 1 || size > n)
    throw InvalidArgument("subset size " + std::to_string(size) + " outside [1, " + std::to_string(n) + "]");
  if (size == n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }

  if (mode == SubsetMode::exact) {
    if (binomial_capped(n, size, kExactSubsetBudget) > kExactSubsetBudget)
      throw InvalidArgument("exact subset search exceeds the budget of " + std::to_string(kExactSubsetBudget) +
                            " subsets");
    std::vector<std::size_t> current(size);
    std::iota(current.begin(), current.end(), std::size_t{0});
    std::vector<std::size_t> best;
    double best_sum = kInf;
    while (true) {
      const double s = pairwise_similarity_sum(m, current);
      if (s < best_sum - kTieTolerance) {
        best_sum = s;
        best = current;
      }
      // Next combination in lexicographic order.
      std::size_t i = size;
      while (i > 0 && current[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++current[i - 1];
      for (std::size_t j = i; j < size; ++j) current[j] = current[j - 1] + 1;
    }
    return best;
  }

  std::vector<std::size_t> chosen;
  std::vector<bool> in(n, false);
  std::vector<double> total(n, 0.0);
  const auto add = [&](std::size_t v) {
    chosen.push_back(v);
    in[v] = true;
    for (std::size_t u = 0; u < n; ++u) total[u] += m(u, v);
  };
  if (size == 1) {
    std::size_t best = 0;
    double best_sum = kInf;
    for (std::size_t v = 0; v < n; ++v) {
      double s = 0.0;
      for (double x : m.row(v)) s += x;
      if (s < best_sum) {
        best_sum = s;
        best = v;
      }
    }
    return {best};
  }
  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m(i, j) < m(bi, bj)) bi = i, bj = j;
  add(bi);
  add(bj);
  while (chosen.size() < size) {
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!in[v] && (best == n || total[v] < total[best])) best = v;
    add(best);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

StagePartition partition_stages(std::span<const std::size_t> path, std::size_t k) {
  const std::size_t n = path.size();
  if (k < 1 || k > n)
    throw InvalidArgument("stage count k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  StagePartition out;
  out.stages.reserve(k);
  std::size_t begin = 0;
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t len = n / k + (s < n % k ? 1 : 0);
    out.stages.emplace_back(path.begin() + static_cast<std::ptrdiff_t>(begin),
                            path.begin() + static_cast<std::ptrdiff_t>(begin + len));
    begin += len;
  }
  return out;
}

StagePartition partition_stages_exact(const SimilarityMatrix& m, std::size_t k) {
  const std::size_t n = m.size();
  if (n > kExactStagesLimit)
    throw InvalidArgument("exact stages are limited to n <= " + std::to_string(kExactStagesLimit));
  if (k < 1 || k > n)
    throw InvalidArgument("stage count k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  StagePartition out;
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t len = n / k + (s < n % k ? 1 : 0);
    const auto local = select_diverse_subset(m.submatrix(remaining), len, SubsetMode::exact);
    std::vector<std::size_t> stage;
    std::vector<bool> take(remaining.size(), false);
    for (std::size_t l : local) {
      stage.push_back(remaining[l]);
      take[l] = true;
    }
    std::vector<std::size_t> rest;
    for (std::size_t l = 0; l < remaining.size(); ++l)
      if (!take[l]) rest.push_back(remaining[l]);
    remaining = std::move(rest);
    out.stages.push_back(std::move(stage));
  }
  return out;
}

}  // namespace hammer

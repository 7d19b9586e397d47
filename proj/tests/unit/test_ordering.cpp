#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "hammer/error.hpp"
#include "hammer/ordering.hpp"
#include "hammer/validation.hpp"
#include "test_util.hpp"

using namespace hammer;
using Path = std::vector<std::size_t>;

namespace {

// Oracles below share no code with the library's search routines.

double naive_weight(const Path& p, const SimilarityMatrix& m) {
  double w = 0;
  for (std::size_t k = 1; k < p.size(); ++k) w += m(p[k - 1], p[k]);
  return w;
}

struct Extremes {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  Path argmin;
};

Extremes brute_force(const SimilarityMatrix& m) {
  Path p(m.size());
  std::iota(p.begin(), p.end(), std::size_t{0});
  Extremes e;
  do {
    const double w = naive_weight(p, m);
    if (w < e.min - 1e-12) e.min = w, e.argmin = p;
    e.max = std::max(e.max, w);
  } while (std::next_permutation(p.begin(), p.end()));
  return e;
}

Path brute_force_subset(const SimilarityMatrix& m, std::size_t size) {
  const std::size_t n = m.size();
  double best = std::numeric_limits<double>::infinity();
  Path best_set;
  // Bitmask enumeration; candidates compared lexicographically on ties.
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != size) continue;
    Path s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(i);
    double sum = 0;
    for (auto a : s)
      for (auto b : s)
        if (a != b) sum += m(a, b);
    if (sum < best - 1e-12 || (std::abs(sum - best) <= 1e-12 && s < best_set)) best = std::min(best, sum), best_set = s;
  }
  return best_set;
}

bool is_permutation_of_n(const Path& p, std::size_t n) {
  Path s = p;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != i) return false;
  return s.size() == n;
}

SimilarityMatrix constant_matrix(std::size_t n, double c) {
  std::vector<double> v(n * n, c);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return SimilarityMatrix::from_values(n, std::move(v));
}

}  // namespace

TEST_SUITE("ordering") {
  TEST_CASE("path_weight on the worked example") {
    const auto m = example3_matrix();
    CHECK(path_weight(Path{3, 4, 1, 2, 0}, m) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(std::abs(path_weight(Path{1, 2, 4, 3, 0}, m)) < 1e-12);
    CHECK(path_weight(Path{0}, SimilarityMatrix::from_values(1, {1.0})) == 0.0);
    CHECK(path_weight(Path{0, 1, 2, 3, 4}, m, true) ==
          doctest::Approx(0.5 - 0.8 + 0.2 + 0.4 + 0.8).epsilon(1e-12));
    CHECK_THROWS_AS(path_weight(Path{0, 0, 1, 2, 3}, m), InvalidArgument);
    CHECK_THROWS_AS(path_weight(Path{0, 1}, m), InvalidArgument);
  }

  TEST_CASE("path weight is reversal symmetric") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto m = test_util::random_matrix(9, s);
      auto p = random_order(9, s).path;
      const double w = path_weight(p, m);
      std::reverse(p.begin(), p.end());
      CHECK(std::abs(path_weight(p, m) - w) <= 1e-12);
    }
  }

  TEST_CASE("exact minimum on the worked example") {
    const auto m = example3_matrix();
    const auto oracle = brute_force(m);
    CHECK(oracle.min == doctest::Approx(-0.5).epsilon(1e-12));
    for (auto mode : {ExactMode::enumerate, ExactMode::dynamic_programming, ExactMode::automatic}) {
      const auto o = exact_min_path(m, mode);
      CHECK(std::abs(o.weight + 0.5) <= 1e-9);
      CHECK(o.path == Path{0, 2, 1, 4, 3});
      CHECK(o.path == oracle.argmin);
    }
  }

  TEST_CASE("exact minimum on trivial matrices") {
    const auto two = SimilarityMatrix::from_values(2, {1, -0.25, -0.25, 1});
    const auto o2 = exact_min_path(two);
    CHECK(o2.path == Path{0, 1});
    CHECK(o2.weight == -0.25);
    for (auto mode : {ExactMode::enumerate, ExactMode::dynamic_programming}) {
      const auto o = exact_min_path(constant_matrix(4, 0.3), mode);
      CHECK(o.path == Path{0, 1, 2, 3});
      CHECK(o.weight == doctest::Approx(0.9).epsilon(1e-12));
    }
    CHECK(exact_min_path(SimilarityMatrix::from_values(1, {1.0})).path == Path{0});
  }

  TEST_CASE("exact oracle refuses sizes beyond its mode") {
    CHECK_THROWS_AS(exact_min_path(test_util::random_matrix(13, 1), ExactMode::enumerate), InvalidArgument);
    CHECK_THROWS_AS(exact_min_path(test_util::random_matrix(19, 1), ExactMode::dynamic_programming), InvalidArgument);
    CHECK_THROWS_AS(exact_min_path(test_util::random_matrix(19, 1)), InvalidArgument);
  }

  TEST_CASE("enumeration, DP and brute force agree") {
    for (std::size_t n = 2; n <= 8; ++n) {
      for (std::uint64_t s = 0; s < 6; ++s) {
        const auto m = test_util::random_matrix(n, 100 * n + s);
        const auto oracle = brute_force(m);
        const auto e = exact_min_path(m, ExactMode::enumerate);
        const auto d = exact_min_path(m, ExactMode::dynamic_programming);
        CHECK(std::abs(e.weight - oracle.min) <= 1e-9);
        CHECK(std::abs(d.weight - oracle.min) <= 1e-9);
        CHECK(e.path == oracle.argmin);
        CHECK(d.path == oracle.argmin);
        CHECK(e.path.front() <= e.path.back());
      }
    }
    for (std::size_t n : {10u, 11u}) {
      const auto m = test_util::random_matrix(n, n);
      const auto e = exact_min_path(m, ExactMode::enumerate);
      const auto d = exact_min_path(m, ExactMode::dynamic_programming);
      CHECK(std::abs(e.weight - d.weight) <= 1e-9);
      CHECK(e.path == d.path);
    }
  }

  TEST_CASE("pure greedy traces with a forced start") {
    const auto m = example3_matrix();
    GhsOptions o;
    o.eta = 1;
    o.restarts = 1;
    o.forced_start = 1;
    const auto a = eta_ghs(m, o);
    CHECK(a.path == Path{1, 2, 0, 3, 4});
    CHECK(a.weight == doctest::Approx(-0.1).epsilon(1e-12));
    o.forced_start = 2;
    const auto b = eta_ghs(m, o);
    CHECK(b.path == Path{2, 1, 4, 3, 0});
    CHECK(b.weight == doctest::Approx(0.6).epsilon(1e-12));
    const auto single = eta_ghs(SimilarityMatrix::from_values(1, {1.0}));
    CHECK(single.path == Path{0});
    CHECK(single.weight == 0.0);
    CHECK(single.restarts == 1);
  }

  TEST_CASE("eta_ghs argument checks and metadata") {
    const auto m = example3_matrix();
    GhsOptions o;
    o.eta = 0;
    CHECK_THROWS_AS(eta_ghs(m, o), InvalidArgument);
    o.eta = 3;
    o.restarts = 0;
    CHECK_THROWS_AS(eta_ghs(m, o), InvalidArgument);
    o.restarts.reset();
    o.forced_start = 5;
    CHECK_THROWS_AS(eta_ghs(m, o), InvalidArgument);
    o.forced_start.reset();
    o.eta = 50;  // wider than the node count: every remaining node is a candidate
    const auto r = eta_ghs(m, o);
    CHECK(is_permutation_of_n(r.path, 5));
    CHECK(r.restarts == default_restarts(5));
    CHECK(r.restart_weights.size() == r.restarts);
    CHECK(r.weight == *std::min_element(r.restart_weights.begin(), r.restart_weights.end()));
    CHECK(default_restarts(1) == 1);
    CHECK(default_restarts(9) == 4);
    CHECK(default_restarts(40315) == 64);
  }

  TEST_CASE("cycle mode includes the closing edge") {
    const auto m = test_util::random_matrix(12, 4);
    GhsOptions o;
    o.cycle = true;
    const auto c = eta_ghs(m, o);
    CHECK(c.cycle);
    CHECK(std::abs(c.weight - path_weight(c.path, m, true)) <= 1e-12);
  }

  TEST_CASE("oracle dominance for n <= 9") {
    for (std::size_t n = 2; n <= 9; ++n) {
      for (std::uint64_t s = 0; s < 4; ++s) {
        const auto m = test_util::random_matrix(n, 7 * n + s);
        const auto oracle = brute_force(m);
        const auto exact = exact_min_path(m);
        GhsOptions o;
        o.seed = s;
        const auto h = eta_ghs(m, o);
        CHECK(is_permutation_of_n(h.path, n));
        CHECK(std::abs(h.weight - path_weight(h.path, m)) <= 1e-9);
        CHECK(exact.weight <= h.weight + 1e-9);
        CHECK(h.weight <= oracle.max + 1e-9);
      }
    }
  }

  TEST_CASE("heuristic beats random permutations on 64-point sets") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto m = random_cosine_matrix(64, kValidationDim, 5000 + s);
      double mean = 0;
      for (std::uint64_t k = 0; k < 100; ++k) mean += random_order(64, 1000 * s + k, &m).weight;
      mean /= 100;
      CHECK(eta_ghs(m).weight < mean);
    }
  }

  TEST_CASE("eta_ghs is deterministic across runs and thread counts") {
    const auto m = test_util::random_matrix(150, 21);
    GhsOptions o;
    o.seed = 9;
    o.threads = 1;
    const auto base = eta_ghs(m, o);
    for (unsigned t : {1u, 2u, 3u, 8u}) {
      o.threads = t;
      const auto r = eta_ghs(m, o);
      CHECK(r.path == base.path);
      CHECK(r.weight == base.weight);
      CHECK(r.restart_weights == base.restart_weights);
    }
    o.seed = 10;
    CHECK(is_permutation_of_n(eta_ghs(m, o).path, 150));
  }

  TEST_CASE("random orders") {
    CHECK(random_order(1, 3).path == Path{0});
    CHECK(random_order(30, 5).path == random_order(30, 5).path);
    CHECK(is_permutation_of_n(random_order(5, 1).path, 5));
    CHECK(is_permutation_of_n(random_order(5, 2).path, 5));
    const auto r = random_order(5, 1);
    CHECK_FALSE(r.weight_computed);
    CHECK(r.weight == 0.0);
    const auto m = example3_matrix();
    const auto w = random_order(5, 1, &m);
    CHECK(w.weight_computed);
    CHECK(w.weight == path_weight(w.path, m));
    CHECK_THROWS_AS(random_order(0, 1), InvalidArgument);
  }

  TEST_CASE("exact diverse subsets on the worked example") {
    const auto m = example3_matrix();
    const auto two = select_diverse_subset(m, 2, SubsetMode::exact);
    CHECK(two == Path{1, 2});
    CHECK(pairwise_similarity_sum(m, two) == doctest::Approx(-1.6).epsilon(1e-12));
    const auto three = select_diverse_subset(m, 3, SubsetMode::exact);
    CHECK(three == Path{1, 2, 4});
    CHECK(pairwise_similarity_sum(m, three) == doctest::Approx(-1.6).epsilon(1e-12));
    CHECK(three == brute_force_subset(m, 3));
    CHECK(select_diverse_subset(m, 5, SubsetMode::exact) == Path{0, 1, 2, 3, 4});
    CHECK(select_diverse_subset(m, 5) == Path{0, 1, 2, 3, 4});
    CHECK_THROWS_AS(select_diverse_subset(m, 0), InvalidArgument);
    CHECK_THROWS_AS(select_diverse_subset(m, 6), InvalidArgument);
  }

  TEST_CASE("greedy subsets") {
    const auto m = example3_matrix();
    CHECK(select_diverse_subset(m, 2) == Path{1, 2});
    // {1,2} then the node with the smallest total similarity to it: x5 (0.3 - 0.3 = 0).
    CHECK(select_diverse_subset(m, 3) == Path{1, 2, 4});
    // Off-diagonal row sums: 1.6, 0.9, -1.3, 2.2, 1.2.
    CHECK(select_diverse_subset(m, 1) == Path{2});
  }

  TEST_CASE("exact subsets match bitmask enumeration") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const std::size_t n = 6 + s % 5;
      const auto m = test_util::random_matrix(n, 300 + s);
      for (std::size_t size = 1; size <= n; ++size)
        CHECK(select_diverse_subset(m, size, SubsetMode::exact) == brute_force_subset(m, size));
    }
    CHECK_THROWS_AS(select_diverse_subset(test_util::random_matrix(60, 1), 30, SubsetMode::exact), InvalidArgument);
  }

  TEST_CASE("contiguous stage partition") {
    const Path p = {4, 2, 0, 1, 3};
    const auto two = partition_stages(p, 2);
    REQUIRE(two.k() == 2);
    CHECK(two.stages[0] == Path{4, 2, 0});
    CHECK(two.stages[1] == Path{1, 3});
    const auto all = partition_stages(p, 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(all.stages[i] == Path{p[i]});
    CHECK(partition_stages(p, 1).stages.front() == p);
    CHECK_THROWS_AS(partition_stages(p, 0), InvalidArgument);
    CHECK_THROWS_AS(partition_stages(p, 6), InvalidArgument);
  }

  TEST_CASE("partitions are disjoint covers with balanced sizes") {
    for (std::uint64_t s = 0; s < 40; ++s) {
      const std::size_t n = 1 + s * 7 % 53;
      const auto p = random_order(n, s).path;
      const std::size_t k = 1 + s % n;
      const auto part = partition_stages(p, k);
      std::set<std::size_t> seen;
      std::size_t lo = n, hi = 0;
      for (const auto& st : part.stages) {
        lo = std::min(lo, st.size());
        hi = std::max(hi, st.size());
        for (auto v : st) CHECK(seen.insert(v).second);
      }
      CHECK(seen.size() == n);
      CHECK(hi - lo <= 1);
    }
  }

  TEST_CASE("exact stage partition") {
    const auto m = test_util::random_matrix(10, 77);
    const auto part = partition_stages_exact(m, 3);
    REQUIRE(part.k() == 3);
    CHECK(part.stages[0].size() == 4);
    CHECK(part.stages[1].size() == 3);
    CHECK(part.stages[2].size() == 3);
    CHECK(part.stages[0] == brute_force_subset(m, 4));
    std::set<std::size_t> seen;
    for (const auto& st : part.stages)
      for (auto v : st) seen.insert(v);
    CHECK(seen.size() == 10);
    CHECK_THROWS_AS(partition_stages_exact(test_util::random_matrix(21, 1), 2), InvalidArgument);
  }
}

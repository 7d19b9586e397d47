#include "hammer/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "hammer/diversity.hpp"
#include "hammer/error.hpp"
#include "hammer/ordering.hpp"
#include "hammer/parallel.hpp"
#include "hammer/similarity.hpp"

namespace hammer {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTie = 1e-12;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return make_engine(seed, stream)(); }

Json number_or_null(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s;
    while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[s]]) ++e;
    const double r = 0.5 * static_cast<double>(s + e);
    for (std::size_t k = s; k <= e; ++k) ranks[idx[k]] = r;
    s = e + 1;
  }
  return ranks;
}

double mean(std::span<const double> v) {
  return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SimilarityMatrix example3_matrix() {
  return SimilarityMatrix::from_values(5, {
                                              1.0, 0.5, -0.4, 0.7, 0.8,   //
                                              0.5, 1.0, -0.8, 0.9, 0.3,   //
                                              -0.4, -0.8, 1.0, 0.2, -0.3,  //
                                              0.7, 0.9, 0.2, 1.0, 0.4,    //
                                              0.8, 0.3, -0.3, 0.4, 1.0,   //
                                          });
}

EmbeddingMatrix random_unit_vectors(std::size_t n, std::size_t d, Engine& engine) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<float> values(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(d);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : v) {
        x = gauss(engine);
        norm += x * x;
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-6);
    for (std::size_t k = 0; k < d; ++k) values[i * d + k] = static_cast<float>(v[k] / norm);
  }
  return EmbeddingMatrix::from_values(n, d, std::move(values));
}

SimilarityMatrix random_cosine_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Engine engine = make_engine(seed);
  return build_similarity_matrix(random_unit_vectors(n, d, engine), 1);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("spearman: length mismatch");
  if (a.size() < 2) return kNaN;
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double ma = mean(ra), mb = mean(rb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    sab += (ra[k] - ma) * (rb[k] - mb);
    saa += (ra[k] - ma) * (ra[k] - ma);
    sbb += (rb[k] - mb) * (rb[k] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return kNaN;
  return sab / std::sqrt(saa * sbb);
}

Json to_json(const ValidationReport& report) {
  Json j = Json::object();
  j["check_name"] = report.check_name;
  j["passed"] = report.passed();
  j["trials"] = report.trials;
  j["agreements"] = report.agreements;
  j["hard_failures"] = report.hard_failures;
  j["violations"] = report.violations;
  j["statistics"] = report.statistics;
  j["notes"] = report.notes;
  return j;
}

// ---------------------------------------------------------------------------
// Subset optimizers

SubsetAgreement compare_subset_optimizers(const SimilarityMatrix& m, std::size_t size) {
  const std::size_t n = m.size();
  if (size < 1 || size > n) throw InvalidArgument("subset size outside [1, n]");

  std::vector<double> neg_sums, scores;
  std::vector<std::size_t> current(size), best_min, best_max;
  std::iota(current.begin(), current.end(), std::size_t{0});
  double min_sum = std::numeric_limits<double>::infinity();
  double max_score = -std::numeric_limits<double>::infinity();
  while (true) {
    if (neg_sums.size() >= kTheorem3Budget)
      throw InvalidArgument("subset enumeration exceeds the budget of " + std::to_string(kTheorem3Budget));
    const double s = pairwise_similarity_sum(m, current);
    const double score = dcscore(m.submatrix(current), 1.0).raw;
    neg_sums.push_back(-s);
    scores.push_back(score);
    if (s < min_sum - kTie) min_sum = s, best_min = current;
    if (score > max_score + kTie) max_score = score, best_max = current;

    std::size_t i = size;
    while (i > 0 && current[i - 1] == n - size + i - 1) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t k = i; k < size; ++k) current[k] = current[k - 1] + 1;
  }

  SubsetAgreement out;
  out.subsets = scores.size();
  out.argmin_similarity = std::move(best_min);
  out.argmax_dcscore = std::move(best_max);
  out.agree = out.argmin_similarity == out.argmax_dcscore;
  const auto [smin, smax] = std::minmax_element(scores.begin(), scores.end());
  const auto [nmin, nmax] = std::minmax_element(neg_sums.begin(), neg_sums.end());
  out.degenerate = out.subsets > 1 && *smax - *smin <= kTie && *nmax - *nmin <= kTie;
  out.rank_correlation = spearman(neg_sums, scores);
  return out;
}

SubsetAgreement theorem3_trial(std::size_t n, std::size_t size, std::uint64_t trial_seed) {
  return compare_subset_optimizers(random_cosine_matrix(n, kValidationDim, trial_seed), size);
}

ValidationReport check_theorem3(std::size_t n, std::size_t size, std::size_t trials, std::uint64_t seed,
                                unsigned threads) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (size < 1 || size > n) throw InvalidArgument("subset size outside [1, n]");

  std::vector<SubsetAgreement> results(trials);
  std::vector<std::uint64_t> seeds(trials);
  for (std::size_t t = 0; t < trials; ++t) seeds[t] = derive_seed(seed, t);
  parallel_for(trials, threads, [&](std::size_t t) { results[t] = theorem3_trial(n, size, seeds[t]); });

  ValidationReport report;
  report.check_name = "theorem3_agreement";
  report.trials = trials;
  std::vector<double> correlations;
  std::size_t degenerate = 0, undefined = 0;
  double min_corr = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& r = results[t];
    if (r.degenerate) ++degenerate;
    if (std::isnan(r.rank_correlation)) {
      ++undefined;
    } else {
      correlations.push_back(r.rank_correlation);
      min_corr = std::min(min_corr, r.rank_correlation);
      if (r.rank_correlation <= 0.0) {
        ++report.hard_failures;
        report.notes.push_back("non-positive rank correlation in trial " + std::to_string(t) + " (seed " +
                               std::to_string(seeds[t]) + ")");
      }
    }
    if (r.agree) {
      ++report.agreements;
    } else {
      Json v = Json::object();
      v["trial"] = t;
      v["trial_seed"] = seeds[t];
      v["n"] = n;
      v["m"] = size;
      v["argmin_pairwise_similarity"] = r.argmin_similarity;
      v["argmax_dcscore"] = r.argmax_dcscore;
      v["rank_correlation"] = number_or_null(r.rank_correlation);
      report.violations.push_back(std::move(v));
    }
  }
  report.statistics["n"] = n;
  report.statistics["m"] = size;
  report.statistics["seed"] = seed;
  report.statistics["subsets_per_trial"] = results.front().subsets;
  report.statistics["agreement_rate"] = static_cast<double>(report.agreements) / static_cast<double>(trials);
  report.statistics["mean_rank_correlation"] = number_or_null(mean(correlations));
  report.statistics["min_rank_correlation"] = correlations.empty() ? Json(nullptr) : Json(min_corr);
  report.statistics["degenerate_trials"] = degenerate;
  report.statistics["undefined_correlation_trials"] = undefined;
  if (degenerate > 0) report.notes.push_back("all subsets tie on both criteria in " + std::to_string(degenerate) + " trial(s)");
  report.notes.push_back("agreement rate is reported, not asserted");
  return report;
}

// ---------------------------------------------------------------------------
// Edge monotonicity

EdgeTrial perturb_edge(const SimilarityMatrix& m, std::size_t i, std::size_t j, double epsilon) {
  const std::size_t n = m.size();
  if (i >= n || j >= n || i == j) throw InvalidArgument("perturb_edge needs two distinct in-range indices");
  if (!(epsilon >= 0.0) || m(i, j) + epsilon > 1.0) throw InvalidArgument("perturb_edge: epsilon must keep the entry <= 1");
  std::vector<double> values(m.values().begin(), m.values().end());
  values[i * n + j] += epsilon;
  values[j * n + i] = values[i * n + j];
  EdgeTrial t;
  t.n = n;
  t.i = i;
  t.j = j;
  t.epsilon = epsilon;
  t.before = dcscore(m, 1.0).raw;
  t.after = dcscore(SimilarityMatrix::from_values(n, std::move(values)), 1.0).raw;
  return t;
}

EdgeTrial edge_monotonicity_trial(std::uint64_t trial_seed) {
  Engine engine = make_engine(trial_seed);
  const std::size_t n = 3 + uniform_index(engine, 6);  // [3, 8]
  const auto m = build_similarity_matrix(random_unit_vectors(n, kValidationDim, engine), 1);
  while (true) {
    const std::size_t i = uniform_index(engine, n);
    std::size_t j = uniform_index(engine, n - 1);
    if (j >= i) ++j;
    const double epsilon = std::min(0.2 * (1.0 - uniform_unit(engine)), 1.0 - m(i, j));  // (0, 0.2]
    if (epsilon <= 0.0) continue;
    EdgeTrial t = perturb_edge(m, i, j, epsilon);
    t.trial_seed = trial_seed;
    return t;
  }
}

ValidationReport check_edge_monotonicity(std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  std::vector<EdgeTrial> results(trials);
  parallel_for(trials, threads, [&](std::size_t t) { results[t] = edge_monotonicity_trial(derive_seed(seed, t)); });

  ValidationReport report;
  report.check_name = "edge_monotonicity";
  report.trials = trials;
  double min_drop = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& r = results[t];
    min_drop = std::min(min_drop, r.before - r.after);
    if (r.decreased()) {
      ++report.agreements;
      continue;
    }
    ++report.hard_failures;
    Json v = Json::object();
    v["trial"] = t;
    v["trial_seed"] = r.trial_seed;
    v["n"] = r.n;
    v["i"] = r.i;
    v["j"] = r.j;
    v["epsilon"] = r.epsilon;
    v["dcscore_before"] = r.before;
    v["dcscore_after"] = r.after;
    report.violations.push_back(std::move(v));
  }
  const auto hand = perturb_edge(SimilarityMatrix::from_values(2, {1.0, 0.5, 0.5, 1.0}), 0, 1, 0.4);
  report.statistics["seed"] = seed;
  report.statistics["min_decrease"] = min_drop;
  report.statistics["two_by_two_before"] = hand.before;
  report.statistics["two_by_two_after"] = hand.after;
  return report;
}

// ---------------------------------------------------------------------------
// Worked example

ValidationReport check_example3(double tolerance, std::size_t ghs_seeds) {
  const auto m = example3_matrix();
  ValidationReport report;
  report.check_name = "example3";
  report.trials = 1;

  const auto exact = exact_min_path(m, ExactMode::enumerate);
  const bool weight_ok = std::abs(exact.weight - kExample3MinimumWeight) <= tolerance;
  const std::array<std::size_t, 5> stated = {1, 2, 4, 3, 0};  // x2 x3 x5 x4 x1, the stated optimum
  report.statistics["minimum_weight"] = exact.weight;
  report.statistics["optimal_path"] = exact.path;
  report.statistics["stated_path"] = stated;
  report.statistics["stated_path_weight"] = path_weight(stated, m);
  report.notes.push_back(
      "the stated optimal sequence x2->x3->x5->x4->x1 sums to 0.0 on the example matrix; the stated -0.5 is "
      "attained by x1->x3->x2->x5->x4 (equivalently x4->x5->x2->x3->x1)");

  if (weight_ok) {
    ++report.agreements;
  } else {
    ++report.hard_failures;
    report.violations.push_back(Json{{"expected", kExample3MinimumWeight}, {"actual", exact.weight}});
  }

  std::size_t hits = 0;
  for (std::size_t s = 0; s < ghs_seeds; ++s) {
    GhsOptions options;
    options.seed = s;
    options.threads = 1;
    if (std::abs(eta_ghs(m, options).weight - kExample3MinimumWeight) <= 1e-9) ++hits;
  }
  report.statistics["ghs_seeds"] = ghs_seeds;
  report.statistics["ghs_optimal_fraction"] =
      ghs_seeds == 0 ? Json(nullptr) : Json(static_cast<double>(hits) / static_cast<double>(ghs_seeds));

  const std::array<double, 5> ratios = {0.2, 0.4, 0.6, 0.8, 1.0};
  const auto table_row = [&](std::span<const std::size_t> order, std::span<const double> expected, const char* name) {
    const auto curve = prefix_curve(order, m, 1.0, ratios);
    Json values = Json::array();
    for (std::size_t k = 0; k < curve.size(); ++k) {
      values.push_back(curve[k].report.adjusted);
      if (std::abs(curve[k].report.adjusted - expected[k]) > kTableTolerance) {
        ++report.hard_failures;
        report.violations.push_back(Json{{"table_row", name},
                                         {"prefix", k + 1},
                                         {"expected", expected[k]},
                                         {"actual", curve[k].report.adjusted}});
      }
    }
    report.statistics[std::string("prefix_dcscore_") + name] = values;
  };
  table_row(kTableOrderStar, kTableDcscoreStar, "order_star");
  table_row(kTableOrderAlternative, kTableDcscoreAlternative, "order_alternative");
  return report;
}

// ---------------------------------------------------------------------------
// Heuristic gap

GapInstance gap_trial(std::size_t n, std::size_t eta, std::uint64_t trial_seed) {
  const auto m = random_cosine_matrix(n, kValidationDim, trial_seed);
  GapInstance g;
  g.trial_seed = trial_seed;
  g.n = n;
  g.exact = exact_min_path(m).weight;
  GhsOptions options;
  options.eta = eta;
  options.seed = trial_seed;
  options.threads = 1;
  g.heuristic = eta_ghs(m, options).weight;
  double sum = 0.0;
  for (std::size_t k = 0; k < kGapRandomPermutations; ++k)
    sum += random_order(n, derive_seed(trial_seed, k + 1), &m).weight;
  g.random_mean = sum / static_cast<double>(kGapRandomPermutations);
  g.worst = kNaN;
  if (n <= kEnumerateAutoLimit) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    double worst = -std::numeric_limits<double>::infinity();
    do {
      double w = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) w += m(p[k], p[k + 1]);
      worst = std::max(worst, w);
    } while (std::next_permutation(p.begin(), p.end()));
    g.worst = worst;
  }
  return g;
}

ValidationReport gap_study(std::span<const std::size_t> sizes, std::size_t trials, std::size_t eta,
                           std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (eta < 1) throw InvalidArgument("eta must be >= 1");
  for (std::size_t n : sizes)
    if (n < 1 || n > kEnumerateLimit)
      throw InvalidArgument("gap_study sizes must lie in [1, " + std::to_string(kEnumerateLimit) + "]");

  ValidationReport report;
  report.check_name = "gap_study";
  Json per_size = Json::array();
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const std::size_t n = sizes[s];
    std::vector<GapInstance> results(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
      results[t] = gap_trial(n, eta, derive_seed(seed, s * 1'000'003ULL + t));
    });
    double sum_gap = 0.0, max_gap = 0.0;
    std::size_t wins = 0, optimal = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& g = results[t];
      ++report.trials;
      sum_gap += g.gap();
      max_gap = std::max(max_gap, g.gap());
      if (g.heuristic < g.random_mean) ++wins;
      if (g.gap() <= 1e-9) ++optimal;
      const bool below_exact = g.gap() < -1e-9;
      const bool above_worst = !std::isnan(g.worst) && g.heuristic > g.worst + 1e-9;
      if (below_exact || above_worst) {
        ++report.hard_failures;
        report.violations.push_back(Json{{"n", n},
                                         {"trial_seed", g.trial_seed},
                                         {"exact", g.exact},
                                         {"heuristic", g.heuristic},
                                         {"worst", number_or_null(g.worst)}});
      } else {
        ++report.agreements;
      }
    }
    per_size.push_back(Json{{"n", n},
                            {"trials", trials},
                            {"mean_gap", sum_gap / static_cast<double>(trials)},
                            {"max_gap", max_gap},
                            {"optimal_rate", static_cast<double>(optimal) / static_cast<double>(trials)},
                            {"wins_vs_random_mean", wins},
                            {"win_rate_vs_random_mean", static_cast<double>(wins) / static_cast<double>(trials)}});
  }
  report.statistics["eta"] = eta;
  report.statistics["seed"] = seed;
  report.statistics["random_permutations"] = kGapRandomPermutations;
  report.statistics["sizes"] = per_size;
  return report;
}

}  // namespace hammer

#include "hammer/diversity.hpp"

#include <algorithm>
#include <cmath>

#include "hammer/error.hpp"

namespace hammer {

std::string to_string(Metric metric) { return metric == Metric::dcscore ? "dcscore" : "ngram"; }

Metric metric_from_string(const std::string& name) {
  if (name == "dcscore") return Metric::dcscore;
  if (name == "ngram") return Metric::ngram;
  throw InvalidArgument("unknown metric \"" + name + "\" (expected dcscore or ngram)");
}

Json to_json(const DiversityReport& report) {
  Json j = Json::object();
  j["metric"] = to_string(report.metric);
  j["n"] = report.n;
  j["raw"] = report.raw;
  j["adjusted"] = report.adjusted;
  j["p"] = report.params.p;
  if (report.metric == Metric::ngram) j["m"] = report.params.m;
  return j;
}

namespace {

void require_exponent(double p) {
  if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("size exponent p must be a finite value >= 0");
}

}  // namespace

std::vector<double> row_softmax(const SimilarityMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.row(i);
    const double peak = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += out[i * n + j] = std::exp(row[j] - peak);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= z;
  }
  return out;
}

DiversityReport dcscore(const SimilarityMatrix& m, double p) {
  if (m.empty()) throw InvalidArgument("dcscore: empty similarity matrix");
  require_exponent(p);
  const std::size_t n = m.size();
  // Only the diagonal of the softmax is needed.
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.row(i);
    const double peak = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double x : row) z += std::exp(x - peak);
    trace += std::exp(row[i] - peak) / z;
  }
  DiversityReport r;
  r.metric = Metric::dcscore;
  r.raw = trace;
  r.n = n;
  r.params.p = p;
  r.adjusted = std::pow(static_cast<double>(n), p) * trace;
  return r;
}

DiversityReport ngram_diversity(const GramBag& bag, double p) {
  require_exponent(p);
  const std::size_t total = bag.total();
  if (total == 0) throw InvalidArgument("no grams: every sample is shorter than m = " + std::to_string(bag.m) + " tokens");
  DiversityReport r;
  r.metric = Metric::ngram;
  r.raw = static_cast<double>(bag.distinct()) / static_cast<double>(total);
  r.n = bag.samples();
  r.params.p = p;
  r.params.m = bag.m;
  r.adjusted = std::pow(static_cast<double>(r.n), p) * r.raw;
  return r;
}

std::size_t prefix_size(double ratio, std::size_t n) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidArgument("prefix ratio must lie in (0, 1]");
  // The slack keeps 0.6 * 5 at 3 rather than 4 under binary rounding.
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<PrefixPoint> prefix_curve(std::span<const std::size_t> path, const SimilarityMatrix& m, double p,
                                      std::span<const double> ratios) {
  if (ratios.empty()) throw InvalidArgument("prefix_curve: empty ratio list");
  require_permutation(path, m.size());
  std::vector<PrefixPoint> curve;
  curve.reserve(ratios.size());
  for (double r : ratios) {
    const std::size_t k = prefix_size(r, path.size());
    curve.push_back({r, dcscore(m.submatrix(path.first(k)), p)});
  }
  return curve;
}

double generalization_bound(const BoundParams& b) {
  if (!(b.d > 0.0)) throw InvalidArgument("VC dimension d must be positive");
  if (!(b.n >= 1.0)) throw InvalidArgument("sample count n must be >= 1");
  if (b.n < b.d) throw InvalidArgument("sample count n must be >= VC dimension d");
  if (!(b.delta > 0.0 && b.delta < 1.0)) throw InvalidArgument("confidence delta must lie in (0, 1)");
  if (!(b.C > 0.0)) throw InvalidArgument("constant C must be positive");
  return b.C * std::sqrt((b.d * std::log(b.n / b.d) + std::log(1.0 / b.delta)) / b.n);
}

}  // namespace hammer

#include "hammer/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hammer/error.hpp"
#include "hammer/ordering.hpp"
#include "hammer/similarity.hpp"
#include "hammer/validation.hpp"

namespace hammer::cli {
namespace {

std::optional<SimilarityMatrix> load_similarity(const RunConfig& config, std::ostream& err) {
  if (!config.embeddings.empty() && !config.sim_cache.empty())
    throw InvalidArgument("pass either --embeddings or --sim-cache, not both");
  if (!config.sim_cache.empty()) return read_similarity_cache(config.sim_cache);
  if (config.embeddings.empty()) return std::nullopt;
  const auto e = read_embeddings(config.embeddings);
  if (e.rows() > kLargeSimilarityRows)
    err << "warning: n = " << e.rows() << " needs " << (e.rows() * e.rows() * 8) / (1u << 20)
        << " MiB for the dense similarity matrix; consider `sim-cache` (32-bit) to compute it once\n";
  return build_similarity_matrix(e, config.threads);
}

SimilarityMatrix require_similarity(const RunConfig& config, std::ostream& err) {
  auto m = load_similarity(config, err);
  if (!m) throw InvalidArgument("this command needs --embeddings or --sim-cache");
  return std::move(*m);
}

void require_count(std::size_t corpus_n, std::size_t matrix_n) {
  if (corpus_n != matrix_n)
    throw InvalidArgument("corpus has " + std::to_string(corpus_n) + " samples but the similarity source has " +
                          std::to_string(matrix_n) + " rows");
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

OrderFile to_order_file(const CuriosityOrder& order, const RunConfig& config) {
  OrderFile file;
  file.indices = order.path;
  file.weight = order.weight;
  Json meta = Json::object();
  meta["generator"] = order.generator;
  meta["n"] = order.path.size();
  meta["eta"] = order.generator == "eta-ghs" ? Json(order.eta) : Json(nullptr);
  meta["restarts"] = order.generator == "eta-ghs" ? Json(order.restarts) : Json(nullptr);
  meta["seed"] = order.generator == "eta-ghs" || order.generator == "random" ? Json(order.seed) : Json(nullptr);
  meta["cycle"] = order.cycle;
  if (config.timestamp) meta["timestamp"] = utc_now();
  file.metadata = std::move(meta);
  return file;
}

std::string write_csv(std::span<const PrefixPoint> curve) {
  std::ostringstream s;
  s.precision(17);
  s << "ratio,n,raw,adjusted\n";
  for (const auto& pt : curve) s << pt.ratio << ',' << pt.report.n << ',' << pt.report.raw << ',' << pt.report.adjusted << '\n';
  return s.str();
}

TokenizeOptions tokenize_options(const RunConfig& config) { return TokenizeOptions{!config.case_sensitive}; }

}  // namespace

void check_config(const RunConfig& c) {
  if (c.eta < 1) throw InvalidArgument("--eta must be >= 1");
  if (c.restarts && *c.restarts < 1) throw InvalidArgument("--restarts must be >= 1");
  if (!(c.p >= 0.0) || !std::isfinite(c.p)) throw InvalidArgument("--p must be >= 0");
  if (c.m < 1) throw InvalidArgument("--m must be >= 1");
  if (c.k < 1) throw InvalidArgument("--k must be >= 1");
  if (c.trials && *c.trials < 1) throw InvalidArgument("--trials must be >= 1");
  for (double r : c.ratios)
    if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("--ratios values must lie in (0, 1]");
  if (c.exact && c.random) throw InvalidArgument("--exact and --random are mutually exclusive");
}

// ---------------------------------------------------------------------------

int cmd_order(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_config(config);
  if (config.corpus.empty()) throw InvalidArgument("order needs --corpus");
  const Corpus corpus = load_corpus(config.corpus, config.fields);
  const SimilarityMatrix m = require_similarity(config, err);
  require_count(corpus.size(), m.size());

  CuriosityOrder order;
  if (config.exact) {
    if (m.size() > kDynamicProgrammingLimit)
      throw InvalidArgument("--exact supports n <= " + std::to_string(kDynamicProgrammingLimit) + ", got " +
                            std::to_string(m.size()));
    order = exact_min_path(m, m.size() <= kEnumerateLimit ? ExactMode::enumerate : ExactMode::dynamic_programming);
  } else if (config.random) {
    order = random_order(m.size(), config.seed, &m);
  } else {
    GhsOptions options;
    options.eta = config.eta;
    options.restarts = config.restarts;
    options.seed = config.seed;
    options.cycle = config.cycle;
    options.threads = config.threads;
    order = eta_ghs(m, options);
  }
  if (config.cycle && order.generator != "eta-ghs") {
    order.cycle = true;
    order.weight = path_weight(order.path, m, true);
  }

  const OrderFile file = to_order_file(order, config);
  const std::string order_text = order_to_json(file).dump(2) + "\n";
  write_file_atomic(config.order_out, order_text);
  if (!config.corpus_out.empty()) {
    try {
      save_corpus(apply_order(corpus, file), config.corpus_out, config.fields);
    } catch (...) {
      std::error_code ignored;
      std::filesystem::remove(config.order_out, ignored);
      throw;
    }
  }

  Json summary = Json::object();
  summary["n"] = m.size();
  summary["generator"] = order.generator;
  summary["weight"] = order.weight;
  if (!order.restart_weights.empty()) {
    const auto [lo, hi] = std::minmax_element(order.restart_weights.begin(), order.restart_weights.end());
    double sum = 0.0;
    for (double w : order.restart_weights) sum += w;
    summary["restarts"] = order.restart_weights.size();
    summary["restart_best"] = *lo;
    summary["restart_mean"] = sum / static_cast<double>(order.restart_weights.size());
    summary["restart_worst"] = *hi;
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_config(config);
  std::vector<PrefixPoint> curve;

  if (config.metric == Metric::dcscore) {
    const SimilarityMatrix m = require_similarity(config, err);
    std::vector<std::size_t> path(m.size());
    for (std::size_t i = 0; i < path.size(); ++i) path[i] = i;
    if (!config.order_in.empty()) path = read_order_file(config.order_in, &m).indices;
    if (config.ratios.empty())
      curve.push_back({1.0, dcscore(m, config.p)});
    else
      curve = prefix_curve(path, m, config.p, config.ratios);
  } else {
    if (config.corpus.empty()) throw InvalidArgument("--metric ngram needs --corpus");
    Corpus corpus = load_corpus(config.corpus, config.fields);
    if (!config.order_in.empty()) corpus = apply_order(corpus, read_order_file(config.order_in));
    const std::vector<double> ratios = config.ratios.empty() ? std::vector<double>{1.0} : config.ratios;
    for (double r : ratios) {
      Corpus prefix;
      const std::size_t k = prefix_size(r, corpus.size());
      prefix.samples.assign(corpus.samples.begin(), corpus.samples.begin() + static_cast<std::ptrdiff_t>(k));
      auto report = ngram_diversity(extract_grams(prefix, config.m, tokenize_options(config)), config.p);
      curve.push_back({r, report});
    }
  }

  if (!config.csv.empty()) write_file_atomic(config.csv, write_csv(curve));
  for (const auto& pt : curve) {
    Json j = to_json(pt.report);
    if (!config.ratios.empty()) j["ratio"] = pt.ratio;
    out << j.dump() << '\n';
  }
  return kExitOk;
}

int cmd_partition(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_config(config);
  if (config.corpus.empty()) throw InvalidArgument("partition needs --corpus");
  if (config.order_in.empty() && !config.exact) throw InvalidArgument("partition needs --order (or --exact)");
  const Corpus corpus = load_corpus(config.corpus, config.fields);
  const auto m = load_similarity(config, err);
  if (m) require_count(corpus.size(), m->size());
  if (config.k > corpus.size())
    throw InvalidArgument("--k = " + std::to_string(config.k) + " exceeds n = " + std::to_string(corpus.size()));

  StagePartition partition;
  if (config.exact) {
    if (!m) throw InvalidArgument("--exact partition needs --embeddings or --sim-cache");
    partition = partition_stages_exact(*m, config.k);
  } else {
    const OrderFile order = read_order_file(config.order_in, m ? &*m : nullptr);
    require_count(corpus.size(), order.indices.size());
    partition = partition_stages(order.indices, config.k);
  }

  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  Json manifest = Json::object();
  manifest["n"] = corpus.size();
  manifest["k"] = partition.k();
  manifest["policy"] = config.exact ? "exact" : "contiguous";
  manifest["p"] = config.p;
  Json stages = Json::array();
  const int width = std::max<int>(2, static_cast<int>(std::to_string(partition.k()).size()));
  for (std::size_t s = 0; s < partition.k(); ++s) {
    const auto& idx = partition.stages[s];
    std::ostringstream name;
    name << "stage_" << std::setw(width) << std::setfill('0') << (s + 1) << ".jsonl";
    std::string body;
    for (std::size_t i : idx) {
      const auto& sample = corpus.samples[i];
      body += (sample.payload.is_object() && !sample.payload.empty()
                   ? sample.payload
                   : Json{{config.fields.id_field, sample.id}, {config.fields.text_fields.front(), sample.text}})
                  .dump();
      body += '\n';
    }
    Json entry = Json::object();
    entry["stage"] = s + 1;
    entry["file"] = name.str();
    entry["size"] = idx.size();
    entry["indices"] = idx;
    if (m) {
      const auto r = dcscore(m->submatrix(idx), config.p);
      entry["dcscore"] = Json{{"raw", r.raw}, {"adjusted", r.adjusted}};
    } else {
      entry["dcscore"] = nullptr;
    }
    stages.push_back(std::move(entry));
    files.emplace_back(name.str(), std::move(body));
  }
  manifest["stages"] = std::move(stages);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create " + config.out_dir.string() + ": " + ec.message());
  for (const auto& [name, body] : files) write_file_atomic(config.out_dir / name, body);
  write_file_atomic(config.out_dir / "manifest.json", manifest.dump(2) + "\n");

  out << Json{{"k", partition.k()}, {"out_dir", config.out_dir.string()}}.dump() << '\n';
  return kExitOk;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_config(config);
  const std::size_t edge_trials = config.trials.value_or(1000);
  const std::size_t theorem_trials = config.trials.value_or(200);
  const std::size_t gap_trials = config.trials.value_or(50);
  const std::vector<std::size_t> gap_sizes = {6, 8, 10};

  std::vector<ValidationReport> reports;
  reports.push_back(check_example3(1e-9, 100));
  reports.push_back(check_edge_monotonicity(edge_trials, config.seed, config.threads));
  reports.push_back(check_theorem3(8, 2, theorem_trials, config.seed, config.threads));
  reports.push_back(check_theorem3(8, 3, theorem_trials, config.seed, config.threads));
  reports.push_back(gap_study(gap_sizes, gap_trials, config.eta, config.seed, config.threads));

  bool passed = true;
  Json checks = Json::array();
  for (const auto& r : reports) {
    passed = passed && r.passed();
    checks.push_back(to_json(r));
    err << (r.passed() ? "PASS " : "FAIL ") << r.check_name << " (" << r.agreements << "/" << r.trials
        << " agreements, " << r.hard_failures << " hard failures)\n";
  }
  Json doc = Json::object();
  doc["passed"] = passed;
  doc["seed"] = config.seed;
  doc["checks"] = std::move(checks);
  const std::string text = doc.dump(2) + "\n";
  if (config.report.empty())
    out << text;
  else
    write_file_atomic(config.report, text);
  return passed ? kExitOk : kExitValidation;
}

int cmd_sim_cache(const RunConfig& config, std::ostream& out, std::ostream& err) {
  check_config(config);
  if (config.embeddings.empty()) throw InvalidArgument("sim-cache needs --embeddings");
  if (config.out.empty()) throw InvalidArgument("sim-cache needs --out");
  const auto m = require_similarity(config, err);
  write_similarity_cache(m, config.out);
  out << Json{{"n", m.size()}, {"out", config.out.string()}}.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hamiltonian curiosity ordering and dataset diversity scoring", "hammer"};
  app.require_subcommand(1);
  RunConfig config;
  std::string metric = "dcscore";
  std::string text_field;

  const auto threads_opt = [&](CLI::App* sub) {
    sub->add_option("--threads", config.threads, "Worker threads (0 = auto)")->envname("HAMMER_THREADS");
  };
  const auto seed_opt = [&](CLI::App* sub) {
    sub->add_option("--seed", config.seed, "RNG seed")->envname("HAMMER_SEED");
  };
  const auto matrix_opts = [&](CLI::App* sub) {
    sub->add_option("--embeddings", config.embeddings, "HAMEMB01 embedding file");
    sub->add_option("--sim-cache", config.sim_cache, "HAMSIM01 similarity cache");
  };
  const auto corpus_opts = [&](CLI::App* sub) {
    sub->add_option("--corpus", config.corpus, "JSON Lines corpus");
    sub->add_option("--text-field", text_field, "Field holding the sample text (default: problem, then text)");
    sub->add_option("--id-field", config.fields.id_field, "Field holding the sample id");
  };

  auto* order = app.add_subcommand("order", "Compute a curiosity order and reorder the corpus");
  corpus_opts(order);
  matrix_opts(order);
  seed_opt(order);
  threads_opt(order);
  order->add_option("--eta", config.eta, "Candidates per greedy step");
  order->add_option("--restarts", config.restarts, "Restarts (default min(n/2, 64))");
  order->add_option("--order-out", config.order_out, "Order file to write");
  order->add_option("--corpus-out", config.corpus_out, "Reordered JSONL corpus to write");
  order->add_flag("--exact", config.exact, "Exact minimum path (n <= 18)");
  order->add_flag("--random", config.random, "Seeded random shuffle baseline");
  order->add_flag("--cycle", config.cycle, "Include the closing edge in the weight");
  order->add_flag("--timestamp", config.timestamp, "Record a UTC timestamp in the order metadata");

  auto* score = app.add_subcommand("score", "Diversity of a dataset or of order prefixes");
  corpus_opts(score);
  matrix_opts(score);
  threads_opt(score);
  score->add_option("--metric", metric, "dcscore or ngram")->check(CLI::IsMember({"dcscore", "ngram"}));
  score->add_option("--order", config.order_in, "Order file for prefix scoring");
  score->add_option("--ratios", config.ratios, "Prefix ratios, comma separated")->delimiter(',');
  score->add_option("--p", config.p, "Size-adjustment exponent");
  score->add_option("--m", config.m, "Gram length");
  score->add_option("--csv", config.csv, "Write the prefix curve as CSV");
  score->add_flag("--case-sensitive", config.case_sensitive, "Do not lowercase tokens");

  auto* partition = app.add_subcommand("partition", "Split an ordered corpus into k training stages");
  corpus_opts(partition);
  matrix_opts(partition);
  threads_opt(partition);
  partition->add_option("--order", config.order_in, "Order file");
  partition->add_option("--k", config.k, "Stage count")->required();
  partition->add_option("--out-dir", config.out_dir, "Directory for stage files and manifest.json");
  partition->add_option("--p", config.p, "Size-adjustment exponent for per-stage dcscore");
  partition->add_flag("--exact", config.exact, "Exact max-diversity stages (n <= 20)");

  auto* validate = app.add_subcommand("validate", "Run the self-contained validation suite");
  seed_opt(validate);
  threads_opt(validate);
  validate->add_option("--trials", config.trials, "Override the trial count of every check");
  validate->add_option("--eta", config.eta, "eta for the gap study");
  validate->add_option("--report", config.report, "Write the JSON report here instead of stdout");

  auto* sim = app.add_subcommand("sim-cache", "Precompute the similarity matrix as HAMSIM01");
  sim->add_option("--embeddings", config.embeddings, "HAMEMB01 embedding file")->required();
  sim->add_option("--out", config.out, "Output path")->required();
  threads_opt(sim);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  for (auto* sub : app.get_subcommands()) config.command = sub->get_name();
  if (!text_field.empty()) config.fields.text_fields = {text_field};

  try {
    config.metric = metric_from_string(metric);
    if (config.command == "order") return cmd_order(config, out, err);
    if (config.command == "score") return cmd_score(config, out, err);
    if (config.command == "partition") return cmd_partition(config, out, err);
    if (config.command == "validate") return cmd_validate(config, out, err);
    return cmd_sim_cache(config, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitIo;
  }
}

}  // namespace hammer::cli

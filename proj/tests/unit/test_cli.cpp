#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "hammer/cli.hpp"
#include "hammer/diversity.hpp"
#include "hammer/ordering.hpp"
#include "hammer/validation.hpp"
#include "test_util.hpp"

using namespace hammer;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<Json> json_lines(const std::string& text) {
  std::vector<Json> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(Json::parse(line));
  return lines;
}

// Five-sample corpus matching the worked example, with its matrix as a cache
// (the matrix is not a Gram matrix, so no embeddings exist for it).
struct Example {
  test_util::TempDir dir;
  std::string corpus = (dir / "corpus.jsonl").string();
  std::string sim = (dir / "sim.bin").string();

  Example() {
    test_util::write_text(corpus,
                          "{\"id\":\"x1\",\"problem\":\"alpha beta gamma\",\"level\":1}\n"
                          "{\"id\":\"x2\",\"problem\":\"beta gamma delta\"}\n"
                          "{\"id\":\"x3\",\"problem\":\"epsilon zeta eta\"}\n"
                          "{\"id\":\"x4\",\"problem\":\"alpha beta delta\"}\n"
                          "{\"id\":\"x5\",\"problem\":\"theta iota kappa\"}\n");
    write_similarity_cache(example3_matrix(), sim);
  }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("order on the worked example") {
    Example ex;
    const auto order_path = (ex.dir / "order.json").string();
    const auto out_corpus = (ex.dir / "ordered.jsonl").string();
    auto r = run_cli({"order", "--corpus", ex.corpus, "--sim-cache", ex.sim, "--order-out", order_path,
                      "--corpus-out", out_corpus, "--threads", "1"});
    REQUIRE(r.code == 0);
    const auto summary = json_lines(r.out).at(0);
    CHECK(summary.at("n") == 5);
    const double w = summary.at("weight").get<double>();
    // A uniform random path has expected weight (n - 1) * mean off-diagonal entry.
    const auto m = example3_matrix();
    double off = 0;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        if (i != j) off += m(i, j);
    CHECK(w >= -0.5 - 1e-6);
    CHECK(w <= 4 * off / 20 + 1e-6);
    const auto file = read_order_file(order_path, nullptr);
    CHECK(file.metadata.at("generator") == "eta-ghs");
    CHECK_FALSE(file.metadata.contains("timestamp"));
    const auto reordered = load_corpus(out_corpus);
    REQUIRE(reordered.size() == 5);
    CHECK(reordered.samples[0].id == "x" + std::to_string(file.indices[0] + 1));
    CHECK(reordered.samples[0].payload.size() >= 2);

    // Two default restarts on five nodes can stop above zero; a larger budget does not.
    r = run_cli({"order", "--corpus", ex.corpus, "--sim-cache", ex.sim, "--order-out", order_path, "--restarts", "32"});
    REQUIRE(r.code == 0);
    CHECK(read_order_file(order_path, nullptr).weight <= 1e-6);

    r = run_cli({"order", "--corpus", ex.corpus, "--sim-cache", ex.sim, "--order-out", order_path, "--exact"});
    REQUIRE(r.code == 0);
    const auto exact = read_order_file(order_path, nullptr);
    CHECK(std::abs(exact.weight + 0.5) <= 1e-6);
    CHECK(exact.indices == std::vector<std::size_t>{0, 2, 1, 4, 3});

    r = run_cli({"order", "--corpus", ex.corpus, "--sim-cache", ex.sim, "--order-out", order_path, "--random",
                 "--timestamp"});
    REQUIRE(r.code == 0);
    CHECK(read_order_file(order_path, nullptr).metadata.contains("timestamp"));
  }

  TEST_CASE("order error exits") {
    Example ex;
    const auto order_path = ex.dir / "order.json";
    auto r = run_cli({"order", "--corpus", ex.corpus, "--embeddings", (ex.dir / "missing.bin").string(),
                      "--order-out", order_path.string()});
    CHECK(r.code == 3);
    CHECK_FALSE(std::filesystem::exists(order_path));
    r = run_cli({"order", "--corpus", ex.corpus, "--sim-cache", ex.sim, "--eta", "0"});
    CHECK(r.code == 2);
    r = run_cli({"order", "--corpus", ex.corpus, "--sim-cache", ex.sim, "--exact", "--random"});
    CHECK(r.code == 2);
    r = run_cli({"order", "--bogus"});
    CHECK(r.code == 2);
    r = run_cli({});
    CHECK(r.code == 2);
    test_util::write_text(ex.dir / "short.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n");
    r = run_cli({"order", "--corpus", (ex.dir / "short.jsonl").string(), "--sim-cache", ex.sim});
    CHECK(r.code == 2);
    CHECK(r.err.find("5 rows") != std::string::npos);
  }

  TEST_CASE("score prints one JSON line per ratio and a CSV") {
    Example ex;
    const auto order_path = (ex.dir / "order.json").string();
    OrderFile f;
    f.indices = {1, 2, 4, 3, 0};
    f.weight = path_weight(f.indices, read_similarity_cache(ex.sim));
    f.metadata = Json{{"generator", "manual"}};
    write_order_file(f, order_path);
    const auto csv = ex.dir / "curve.csv";
    const auto r = run_cli({"score", "--sim-cache", ex.sim, "--order", order_path, "--ratios", "0.2,0.4,1.0",
                            "--p", "1", "--csv", csv.string()});
    REQUIRE(r.code == 0);
    const auto lines = json_lines(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].at("adjusted").get<double>() == doctest::Approx(1.0));
    CHECK(std::abs(lines[1].at("adjusted").get<double>() - 3.43) <= 0.01);
    CHECK(std::abs(lines[2].at("adjusted").get<double>() - 8.35) <= 0.01);
    CHECK(lines[1].at("ratio").get<double>() == 0.4);
    const auto text = test_util::read_text(csv);
    CHECK(text.rfind("ratio,n,raw,adjusted\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  }

  TEST_CASE("score n-gram metric") {
    test_util::TempDir dir;
    const auto corpus = (dir / "c.jsonl").string();
    test_util::write_text(corpus, "{\"id\":\"1\",\"text\":\"a b\"}\n{\"id\":\"2\",\"text\":\"A B\"}\n");
    auto r = run_cli({"score", "--metric", "ngram", "--corpus", corpus, "--p", "0"});
    REQUIRE(r.code == 0);
    CHECK(json_lines(r.out).at(0).at("raw").get<double>() == 0.5);
    r = run_cli({"score", "--metric", "ngram", "--corpus", corpus, "--case-sensitive"});
    REQUIRE(r.code == 0);
    CHECK(json_lines(r.out).at(0).at("raw").get<double>() == 1.0);
    r = run_cli({"score", "--metric", "ngram", "--corpus", corpus, "--m", "3"});
    CHECK(r.code == 2);
    r = run_cli({"score", "--metric", "entropy", "--corpus", corpus});
    CHECK(r.code == 2);
  }

  TEST_CASE("partition writes stages and a manifest") {
    Example ex;
    const auto order_path = (ex.dir / "order.json").string();
    OrderFile f;
    f.indices = {4, 2, 0, 1, 3};
    f.weight = path_weight(f.indices, read_similarity_cache(ex.sim));
    f.metadata = Json::object();
    write_order_file(f, order_path);
    const auto out_dir = ex.dir / "stages";
    const auto r = run_cli({"partition", "--corpus", ex.corpus, "--sim-cache", ex.sim, "--order", order_path,
                            "--k", "2", "--out-dir", out_dir.string()});
    REQUIRE(r.code == 0);
    const auto first = load_corpus(out_dir / "stage_01.jsonl");
    const auto second = load_corpus(out_dir / "stage_02.jsonl");
    REQUIRE(first.size() == 3);
    REQUIRE(second.size() == 2);
    CHECK(first.samples[0].id == "x5");
    CHECK(second.samples[1].id == "x4");
    CHECK(first.samples[2].payload.at("level") == 1);
    const auto manifest = Json::parse(test_util::read_text(out_dir / "manifest.json"));
    CHECK(manifest.at("k") == 2);
    for (const auto& stage : manifest.at("stages")) {
      const auto idx = stage.at("indices").get<std::vector<std::size_t>>();
      const double expected = dcscore(example3_matrix().submatrix(idx), 0.5).adjusted;
      CHECK(stage.at("dcscore").at("adjusted").get<double>() == doctest::Approx(expected).epsilon(1e-6));
    }
    const auto bad = run_cli({"partition", "--corpus", ex.corpus, "--order", order_path, "--k", "6"});
    CHECK(bad.code == 2);
  }

  TEST_CASE("sim-cache round trip through embeddings") {
    test_util::TempDir dir;
    const auto emb = dir / "e.bin";
    const auto cache = dir / "s.bin";
    write_embeddings(EmbeddingMatrix::from_values(3, 2, {1, 0, 0, 1, 1, 1}), emb);
    const auto r = run_cli({"sim-cache", "--embeddings", emb.string(), "--out", cache.string()});
    REQUIRE(r.code == 0);
    const auto m = read_similarity_cache(cache);
    CHECK(m(0, 2) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(m(0, 1) == doctest::Approx(0.0));
  }

  TEST_CASE("validate") {
    test_util::TempDir dir;
    const auto report = dir / "report.json";
    auto r = run_cli({"validate", "--trials", "5", "--report", report.string(), "--threads", "1"});
    CHECK(r.code == 0);
    const auto doc = Json::parse(test_util::read_text(report));
    CHECK(doc.at("passed") == true);
    std::set<std::string> names;
    for (const auto& c : doc.at("checks")) names.insert(c.at("check_name").get<std::string>());
    CHECK(names == std::set<std::string>{"example3", "edge_monotonicity", "theorem3_agreement", "gap_study"});
    CHECK(r.err.find("PASS example3") != std::string::npos);
    r = run_cli({"validate", "--trials", "0"});
    CHECK(r.code == 2);
  }
}

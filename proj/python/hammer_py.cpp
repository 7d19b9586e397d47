#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hammer/cli.hpp"
#include "hammer/corpus_io.hpp"
#include "hammer/diversity.hpp"
#include "hammer/error.hpp"
#include "hammer/ordering.hpp"
#include "hammer/similarity.hpp"
#include "hammer/validation.hpp"

namespace py = pybind11;
using namespace hammer;

namespace {

py::object to_python(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return py::none();
    case Json::value_t::boolean: return py::bool_(j.get<bool>());
    case Json::value_t::number_integer: return py::int_(j.get<long long>());
    case Json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
    case Json::value_t::number_float: return py::float_(j.get<double>());
    case Json::value_t::string: return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_python(v));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
      return out;
    }
    default: return py::none();
  }
}

SimilarityMatrix matrix_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw InvalidArgument("expected a square 2-D array");
  const auto n = static_cast<std::size_t>(a.shape(0));
  return SimilarityMatrix::from_values(n, std::vector<double>(a.data(), a.data() + n * n));
}

EmbeddingMatrix embeddings_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array");
  const auto n = static_cast<std::size_t>(a.shape(0)), d = static_cast<std::size_t>(a.shape(1));
  return EmbeddingMatrix::from_values(n, d, std::vector<float>(a.data(), a.data() + n * d));
}

template <typename T>
py::array_t<T> to_array(std::span<const T> values, std::size_t rows, std::size_t cols) {
  py::array_t<T> out({rows, cols});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

ExactMode exact_mode(const std::string& name) {
  if (name == "auto") return ExactMode::automatic;
  if (name == "enumerate") return ExactMode::enumerate;
  if (name == "dp") return ExactMode::dynamic_programming;
  throw InvalidArgument("mode must be auto, enumerate or dp");
}

SubsetMode subset_mode(const std::string& name) {
  if (name == "greedy") return SubsetMode::greedy;
  if (name == "exact") return SubsetMode::exact;
  throw InvalidArgument("mode must be greedy or exact");
}

}  // namespace

PYBIND11_MODULE(hammer, m) {
  m.doc() = "Hamiltonian curiosity ordering and dataset diversity scoring";

  auto base = py::register_exception<Error>(m, "HammerError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
      .def(py::init(&embeddings_from_array), py::arg("values"))
      .def_property_readonly("rows", &EmbeddingMatrix::rows)
      .def_property_readonly("cols", &EmbeddingMatrix::cols)
      .def("to_numpy", [](const EmbeddingMatrix& e) { return to_array(e.values(), e.rows(), e.cols()); });

  py::class_<SimilarityMatrix>(m, "SimilarityMatrix")
      .def(py::init(&matrix_from_array), py::arg("values"))
      .def_property_readonly("size", &SimilarityMatrix::size)
      .def("__call__", [](const SimilarityMatrix& s, std::size_t i, std::size_t j) {
        if (i >= s.size() || j >= s.size()) throw py::index_error();
        return s(i, j);
      })
      .def("submatrix", [](const SimilarityMatrix& s, std::vector<std::size_t> idx) { return s.submatrix(idx); })
      .def("to_numpy", [](const SimilarityMatrix& s) { return to_array(s.values(), s.size(), s.size()); });

  py::class_<CuriosityOrder>(m, "CuriosityOrder")
      .def_readonly("path", &CuriosityOrder::path)
      .def_readonly("weight", &CuriosityOrder::weight)
      .def_readonly("generator", &CuriosityOrder::generator)
      .def_readonly("eta", &CuriosityOrder::eta)
      .def_readonly("restarts", &CuriosityOrder::restarts)
      .def_readonly("seed", &CuriosityOrder::seed)
      .def_readonly("cycle", &CuriosityOrder::cycle)
      .def_readonly("weight_computed", &CuriosityOrder::weight_computed)
      .def_readonly("restart_weights", &CuriosityOrder::restart_weights);

  py::class_<DiversityReport>(m, "DiversityReport")
      .def_property_readonly("metric", [](const DiversityReport& r) { return to_string(r.metric); })
      .def_readonly("raw", &DiversityReport::raw)
      .def_readonly("adjusted", &DiversityReport::adjusted)
      .def_readonly("n", &DiversityReport::n)
      .def_property_readonly("p", [](const DiversityReport& r) { return r.params.p; })
      .def("to_dict", [](const DiversityReport& r) { return to_python(to_json(r)); });

  // corpus_io
  m.def("read_embeddings", &read_embeddings, py::arg("path"));
  m.def("write_embeddings", &write_embeddings, py::arg("embeddings"), py::arg("path"));
  m.def("read_similarity_cache", &read_similarity_cache, py::arg("path"));
  m.def("write_similarity_cache", &write_similarity_cache, py::arg("matrix"), py::arg("path"));

  // similarity
  m.def("cosine", [](std::vector<double> u, std::vector<double> v) { return cosine(std::span<const double>(u), std::span<const double>(v)); },
        py::arg("u"), py::arg("v"));
  m.def("build_similarity_matrix", &build_similarity_matrix, py::arg("embeddings"), py::arg("threads") = 0);
  m.def("tokenize", [](const std::string& text, bool lowercase) { return tokenize(text, {lowercase}); },
        py::arg("text"), py::arg("lowercase") = true);

  // ordering
  m.def("path_weight", [](std::vector<std::size_t> path, const SimilarityMatrix& s, bool closed) { return path_weight(path, s, closed); },
        py::arg("path"), py::arg("matrix"), py::arg("closed") = false);
  m.def("exact_min_path", [](const SimilarityMatrix& s, const std::string& mode) { return exact_min_path(s, exact_mode(mode)); },
        py::arg("matrix"), py::arg("mode") = "auto");
  m.def(
      "eta_ghs",
      [](const SimilarityMatrix& s, std::size_t eta, std::optional<std::size_t> restarts, std::uint64_t seed,
         std::optional<std::size_t> start, bool cycle, unsigned threads) {
        return eta_ghs(s, GhsOptions{eta, restarts, seed, start, cycle, threads});
      },
      py::arg("matrix"), py::arg("eta") = 3, py::arg("restarts") = py::none(), py::arg("seed") = 42,
      py::arg("start") = py::none(), py::arg("cycle") = false, py::arg("threads") = 0);
  m.def("random_order", [](std::size_t n, std::uint64_t seed, const SimilarityMatrix* s) { return random_order(n, seed, s); },
        py::arg("n"), py::arg("seed"), py::arg("matrix") = nullptr);
  m.def("select_diverse_subset",
        [](const SimilarityMatrix& s, std::size_t size, const std::string& mode) { return select_diverse_subset(s, size, subset_mode(mode)); },
        py::arg("matrix"), py::arg("size"), py::arg("mode") = "greedy");
  m.def("partition_stages", [](std::vector<std::size_t> path, std::size_t k) { return partition_stages(path, k).stages; },
        py::arg("path"), py::arg("k"));

  // diversity
  m.def("dcscore", &dcscore, py::arg("matrix"), py::arg("p") = 0.5);
  m.def(
      "ngram_diversity",
      [](std::vector<std::string> texts, std::size_t gram, double p, bool lowercase) {
        return ngram_diversity(extract_grams(texts, gram, {lowercase}), p);
      },
      py::arg("texts"), py::arg("m") = 2, py::arg("p") = 0.5, py::arg("lowercase") = true);
  m.def(
      "prefix_curve",
      [](std::vector<std::size_t> path, const SimilarityMatrix& s, double p, std::vector<double> ratios) {
        std::vector<DiversityReport> out;
        for (auto& pt : prefix_curve(path, s, p, ratios)) out.push_back(pt.report);
        return out;
      },
      py::arg("path"), py::arg("matrix"), py::arg("p"), py::arg("ratios"));
  m.def(
      "generalization_bound",
      [](double d, double n, double delta, double C) { return generalization_bound({d, n, delta, C}); },
      py::arg("d"), py::arg("n"), py::arg("delta"), py::arg("C") = 1.0);

  // validation
  m.def("example3_matrix", &example3_matrix);
  m.def("check_example3", [](double tol, std::size_t seeds) { return to_python(to_json(check_example3(tol, seeds))); },
        py::arg("tolerance") = 1e-9, py::arg("ghs_seeds") = 100);
  m.def("check_edge_monotonicity",
        [](std::size_t trials, std::uint64_t seed) { return to_python(to_json(check_edge_monotonicity(trials, seed))); },
        py::arg("trials"), py::arg("seed") = 42);
  m.def(
      "check_theorem3",
      [](std::size_t n, std::size_t size, std::size_t trials, std::uint64_t seed) {
        return to_python(to_json(check_theorem3(n, size, trials, seed)));
      },
      py::arg("n"), py::arg("m"), py::arg("trials"), py::arg("seed") = 42);
  m.def(
      "gap_study",
      [](std::vector<std::size_t> sizes, std::size_t trials, std::size_t eta, std::uint64_t seed) {
        return to_python(to_json(gap_study(sizes, trials, eta, seed)));
      },
      py::arg("sizes"), py::arg("trials"), py::arg("eta") = 3, py::arg("seed") = 42);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI command in-process; returns (exit_code, stdout, stderr).");
}

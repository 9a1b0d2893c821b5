#include <sstream>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pastis/align.hpp"
#include "pastis/balance.hpp"
#include "pastis/costmodel.hpp"
#include "pastis/error.hpp"
#include "pastis/pipeline.hpp"
#include "pastis/seqio.hpp"
#include "pastis/synthetic.hpp"

namespace py = pybind11;
using namespace pastis;

namespace {

// Routes records through the FASTA parser so they get the same validation and
// residue normalization as file input.
std::vector<SequenceRecord> to_records(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::ostringstream fasta;
  for (const auto& [header, residues] : pairs) fasta << '>' << header << '\n' << residues << '\n';
  std::istringstream in(fasta.str());
  return parse_fasta(in);
}

py::dict cost_dict(const CostEstimate& e) {
  py::dict d;
  d["latency_term"] = e.latency_term;
  d["bandwidth_term"] = e.bandwidth_term;
  d["total"] = e.total;
  d["messages"] = e.messages;
  d["words"] = e.words;
  d["broadcasts"] = e.broadcasts;
  d["tree_hops"] = e.tree_hops;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Many-against-many protein similarity search over a virtual worker grid.";

  // Translators are tried newest first, so the base class goes first.
  py::register_exception<Error>(m, "PastisError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::enum_<BalanceScheme>(m, "BalanceScheme")
      .value("index", BalanceScheme::index)
      .value("triangularity", BalanceScheme::triangularity);

  py::enum_<ExecutionMode>(m, "ExecutionMode")
      .value("threaded", ExecutionMode::threaded)
      .value("sequential", ExecutionMode::sequential);

  py::class_<PipelineConfig>(m, "SearchConfig")
      .def(py::init<>())
      .def_property(
          "kmer_length", [](const PipelineConfig& c) { return c.kmer.k; },
          [](PipelineConfig& c, int v) { c.kmer.k = v; })
      .def_property(
          "common_kmer_threshold", [](const PipelineConfig& c) { return c.kmer.common_kmer_threshold; },
          [](PipelineConfig& c, int v) { c.kmer.common_kmer_threshold = v; })
      .def_property(
          "gap_open", [](const PipelineConfig& c) { return c.align.gap_open; },
          [](PipelineConfig& c, int v) { c.align.gap_open = v; })
      .def_property(
          "gap_extend", [](const PipelineConfig& c) { return c.align.gap_extend; },
          [](PipelineConfig& c, int v) { c.align.gap_extend = v; })
      .def_property(
          "ani", [](const PipelineConfig& c) { return c.align.ani_threshold; },
          [](PipelineConfig& c, double v) { c.align.ani_threshold = v; })
      .def_property(
          "coverage", [](const PipelineConfig& c) { return c.align.coverage_threshold; },
          [](PipelineConfig& c, double v) { c.align.coverage_threshold = v; })
      .def_property(
          "block_rows", [](const PipelineConfig& c) { return c.blocking.br; },
          [](PipelineConfig& c, int v) { c.blocking.br = v; })
      .def_property(
          "block_cols", [](const PipelineConfig& c) { return c.blocking.bc; },
          [](PipelineConfig& c, int v) { c.blocking.bc = v; })
      .def_readwrite("balance", &PipelineConfig::scheme)
      .def_readwrite("workers", &PipelineConfig::p)
      .def_readwrite("pre_blocking", &PipelineConfig::pre_blocking)
      .def_readwrite("lookahead", &PipelineConfig::lookahead)
      .def_readwrite("align_lanes", &PipelineConfig::align_lanes)
      .def_readwrite("sparse_lanes", &PipelineConfig::sparse_lanes)
      .def_readwrite("grid_mode", &PipelineConfig::grid_mode)
      .def_readwrite("dense_threshold", &PipelineConfig::dense_threshold)
      .def("validate", &PipelineConfig::validate);

  py::class_<SimilarityEdge>(m, "Edge")
      .def_readonly("i", &SimilarityEdge::i)
      .def_readonly("j", &SimilarityEdge::j)
      .def_readonly("score", &SimilarityEdge::score)
      .def_readonly("identity", &SimilarityEdge::identity)
      .def_readonly("coverage_i", &SimilarityEdge::coverage_i)
      .def_readonly("coverage_j", &SimilarityEdge::coverage_j)
      .def("__repr__", [](const SimilarityEdge& e) {
        return "Edge(" + std::to_string(e.i) + ", " + std::to_string(e.j) + ", score=" + std::to_string(e.score) + ")";
      });

  m.def(
      "search",
      [](const std::vector<std::pair<std::string, std::string>>& records, const PipelineConfig& config) {
        auto seqs = to_records(records);
        std::vector<SimilarityEdge> edges;
        RunStats stats;
        {
          py::gil_scoped_release release;
          stats = search_records(config, seqs, [&](std::span<const SimilarityEdge> block) {
            edges.insert(edges.end(), block.begin(), block.end());
          });
        }
        return py::make_tuple(edges, stats_to_json(stats));
      },
      py::arg("records"), py::arg("config") = PipelineConfig{},
      "Searches (header, residues) records; returns (edges, stats JSON text).");

  m.def(
      "search_file",
      [](const std::filesystem::path& input, const std::filesystem::path& output, const PipelineConfig& config) {
        py::gil_scoped_release release;
        return stats_to_json(run_search(config, input, output));
      },
      py::arg("input"), py::arg("output"), py::arg("config") = PipelineConfig{},
      "Searches a FASTA file, writing edges and OUTPUT.stats.json; returns the stats JSON text.");

  m.def(
      "smith_waterman",
      [](const std::string& a, const std::string& b, int gap_open, int gap_extend) {
        AlignParams p;
        p.gap_open = gap_open;
        p.gap_extend = gap_extend;
        p.validate();
        auto seqs = to_records({{"a", a}, {"b", b}});
        auto r = smith_waterman(seqs[0].residues, seqs[1].residues, p);
        py::dict d;
        d["score"] = r.score;
        d["i_begin"] = r.i_begin;
        d["i_end"] = r.i_end;
        d["j_begin"] = r.j_begin;
        d["j_end"] = r.j_end;
        d["matches"] = r.matches;
        d["aln_len"] = r.aln_len;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("gap_open") = 11, py::arg("gap_extend") = 2);

  m.def(
      "plain_cost",
      [](double alpha, double beta, double s, int p) { return cost_dict(plain_summa_cost({alpha, beta, s, p})); },
      py::arg("alpha"), py::arg("beta"), py::arg("s"), py::arg("p"));

  m.def(
      "blocked_cost",
      [](double alpha, double beta, double s, int p, int block_rows, int block_cols) {
        return cost_dict(blocked_summa_cost({alpha, beta, s, p}, {block_rows, block_cols}));
      },
      py::arg("alpha"), py::arg("beta"), py::arg("s"), py::arg("p"), py::arg("block_rows") = 1,
      py::arg("block_cols") = 1);

  m.def(
      "classify_block",
      [](int r, int c, int b) { return std::string(to_string(classify_block({r, c}, b))); }, py::arg("r"),
      py::arg("c"), py::arg("b"));

  m.def(
      "generate",
      [](std::size_t n, std::uint64_t seed, int min_len, int max_len, int family_size) {
        CorpusSpec spec;
        spec.n = n;
        spec.seed = seed;
        spec.min_len = min_len;
        spec.max_len = max_len;
        spec.family_size = family_size;
        std::vector<std::pair<std::string, std::string>> out;
        for (auto& r : generate_corpus(spec)) out.emplace_back(std::move(r.header), std::move(r.residues));
        return out;
      },
      py::arg("n") = 1000, py::arg("seed") = 42, py::arg("min_len") = 50, py::arg("max_len") = 500,
      py::arg("family_size") = 4);

  m.def(
      "format_edge",
      [](const SimilarityEdge& e, const std::string& header_i, const std::string& header_j) {
        return format_edge(e, header_i, header_j);
      },
      py::arg("edge"), py::arg("header_i"), py::arg("header_j"));

#ifdef PASTIS_VERSION
  m.attr("__version__") = PASTIS_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}

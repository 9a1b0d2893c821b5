#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracle/oracle.hpp"
#include "pastis/costmodel.hpp"
#include "pastis/error.hpp"
#include "pastis/pipeline.hpp"
#include "pastis/synthetic.hpp"

namespace pastis::cli {

namespace {

using json = nlohmann::ordered_json;

// Options that never appear in a dumped config.
const std::set<std::string> kNotDumped = {"help", "config", "dump-config"};

struct PipelineFlags {
  int kmer_length = 6;
  int common_kmer_threshold = 2;
  int gap_open = 11;
  int gap_extend = 2;
  double ani = 0.30;
  double coverage = 0.70;
  int block_rows = 1;
  int block_cols = 1;
  std::string balance = "index";
  std::string pre_blocking = "off";
  int lookahead = 1;
  int workers = 1;
  int align_lanes = 1;
  int sparse_lanes = 0;
  std::string grid_mode = "threaded";
  long long dense_threshold = 1LL << 16;

  PipelineConfig to_config() const {
    PipelineConfig c;
    c.kmer.k = kmer_length;
    c.kmer.common_kmer_threshold = common_kmer_threshold;
    c.align.gap_open = gap_open;
    c.align.gap_extend = gap_extend;
    c.align.ani_threshold = ani;
    c.align.coverage_threshold = coverage;
    c.blocking = {block_rows, block_cols};
    c.scheme = parse_scheme(balance);
    c.pre_blocking = pre_blocking == "on";
    c.lookahead = lookahead;
    c.p = workers;
    c.align_lanes = align_lanes;
    c.sparse_lanes = sparse_lanes;
    c.grid_mode = grid_mode == "sequential" ? ExecutionMode::sequential : ExecutionMode::threaded;
    c.dense_threshold = dense_threshold;
    c.validate();
    return c;
  }
};

void add_pipeline_options(CLI::App* app, PipelineFlags& f) {
  app->add_option("--kmer-length", f.kmer_length, "k-mer length")->capture_default_str();
  app->add_option("--common-kmer-threshold", f.common_kmer_threshold, "minimum shared k-mers per candidate")
      ->capture_default_str();
  app->add_option("--gap-open", f.gap_open, "gap open penalty")->capture_default_str();
  app->add_option("--gap-extend", f.gap_extend, "gap extension penalty")->capture_default_str();
  app->add_option("--ani", f.ani, "minimum alignment identity")->capture_default_str();
  app->add_option("--coverage", f.coverage, "minimum coverage of both sequences")->capture_default_str();
  app->add_option("--block-rows", f.block_rows, "output blocking factor, rows")->capture_default_str();
  app->add_option("--block-cols", f.block_cols, "output blocking factor, columns")->capture_default_str();
  app->add_option("--balance", f.balance, "load balancing scheme")
      ->check(CLI::IsMember({"index", "triangularity", "triangular"}))
      ->capture_default_str();
  app->add_option("--pre-blocking", f.pre_blocking, "overlap sparse and alignment lanes")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  app->add_option("--lookahead", f.lookahead, "blocks computed ahead when pre-blocking")->capture_default_str();
  app->add_option("--workers", f.workers, "virtual grid size (perfect square)")
      ->envname("PASTISLITE_WORKERS")
      ->capture_default_str();
  app->add_option("--align-lanes", f.align_lanes, "alignment threads")->capture_default_str();
  app->add_option("--sparse-lanes", f.sparse_lanes, "concurrent sparse compute slots (0: auto)")
      ->capture_default_str();
  app->add_option("--grid-mode", f.grid_mode, "worker execution mode")
      ->check(CLI::IsMember({"threaded", "sequential"}))
      ->capture_default_str();
  app->add_option("--dense-threshold", f.dense_threshold, "max rows for the dense SpGEMM accumulator")
      ->capture_default_str();
}

void add_config_options(CLI::App* app, bool& dump) {
  app->add_option("--config", "JSON file supplying any flag; command-line values win");
  app->add_flag("--dump-config", dump, "print the effective configuration as JSON and exit");
}

// Typed JSON scalar for a flag value, so dumps stay readable.
json scalar(const std::string& v) {
  if (v.empty()) return v;
  char* end = nullptr;
  long long i = std::strtoll(v.c_str(), &end, 10);
  if (*end == '\0') return i;
  double d = std::strtod(v.c_str(), &end);
  if (*end == '\0') return d;
  return v;
}

std::string dump_config(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (kNotDumped.count(name)) continue;
    std::string value;
    if (opt->count() > 0) {
      value = opt->results().back();
    } else if (!opt->get_default_str().empty()) {
      value = opt->get_default_str();
    } else {
      continue;
    }
    j[name] = scalar(value);
  }
  return j.dump(2) + "\n";
}

std::string json_value_string(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw CLI::ConversionError("config key '" + key + "' must be a scalar");
}

// Replaces `--config FILE` after the subcommand name with the file's flags,
// placed before the remaining command-line flags so those take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::vector<std::string> rest;
  std::vector<std::string> from_file;
  bool seen = false;
  for (std::size_t k = 1; k < args.size(); ++k) {
    std::string path;
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file");
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
      continue;
    }
    if (seen) throw CLI::ArgumentMismatch("--config given more than once");
    seen = true;
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file " + path + " must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
      from_file.push_back("--" + key);
      from_file.push_back(json_value_string(value, key));
    }
  }
  std::vector<std::string> out{args.front()};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<std::string> edge_lines(std::span<const SimilarityEdge> edges, std::span<const SequenceRecord> seqs) {
  std::vector<std::string> lines;
  lines.reserve(edges.size());
  for (const auto& e : edges) {
    lines.push_back(format_edge(e, seqs[static_cast<std::size_t>(e.i)].header,
                                seqs[static_cast<std::size_t>(e.j)].header));
  }
  return canonical_lines(std::move(lines));
}

std::vector<SimilarityEdge> collect_edges(const PipelineConfig& config, std::span<const SequenceRecord> seqs,
                                          RunStats* stats = nullptr) {
  std::vector<SimilarityEdge> edges;
  RunStats s = search_records(config, seqs, [&](std::span<const SimilarityEdge> block) {
    edges.insert(edges.end(), block.begin(), block.end());
  });
  if (stats) *stats = s;
  return edges;
}

// Returns the index of the first differing line, or -1 when equal.
long long first_divergence(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a[k] != b[k]) return static_cast<long long>(k);
  }
  return a.size() == b.size() ? -1 : static_cast<long long>(n);
}

std::string line_or_end(const std::vector<std::string>& v, long long k) {
  return static_cast<std::size_t>(k) < v.size() ? v[static_cast<std::size_t>(k)] : "<end of output>";
}

json cost_json(const CostEstimate& e) {
  return {{"latency_term", e.latency_term}, {"bandwidth_term", e.bandwidth_term}, {"total", e.total},
          {"messages", e.messages},         {"words", e.words},                   {"broadcasts", e.broadcasts},
          {"tree_hops", e.tree_hops}};
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Many-against-many protein similarity search on a virtual process grid", "pastis-lite"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // search
  PipelineFlags search_flags;
  std::string search_in, search_out;
  bool search_dump = false;
  auto* search = app.add_subcommand("search", "run the similarity search");
  search->add_option("--input", search_in, "FASTA input");
  search->add_option("--output", search_out, "edge output; stats go to OUTPUT.stats.json");
  add_pipeline_options(search, search_flags);
  add_config_options(search, search_dump);

  // cost
  CostParams cost_params;
  BlockingFactor cost_bf;
  bool cost_dump = false;
  auto* cost = app.add_subcommand("cost", "print communication cost estimates as JSON");
  cost->add_option("--alpha", cost_params.alpha, "message startup time")->capture_default_str();
  cost->add_option("--beta", cost_params.beta, "per-word transfer time")->capture_default_str();
  cost->add_option("--s", cost_params.s, "nonzeros per sub-matrix")->capture_default_str();
  cost->add_option("--p", cost_params.p, "worker count")->capture_default_str();
  cost->add_option("--word-bytes", cost_params.word_bytes, "bytes per word")->capture_default_str();
  cost->add_option("--block-rows", cost_bf.br, "blocking factor, rows")->capture_default_str();
  cost->add_option("--block-cols", cost_bf.bc, "blocking factor, columns")->capture_default_str();
  add_config_options(cost, cost_dump);

  // validate
  PipelineFlags val_flags;
  std::string val_in;
  std::size_t val_count = 0;
  std::uint64_t val_seed = 42;
  bool val_sweep = false, val_corrupt = false, val_dump = false;
  auto* validate = app.add_subcommand("validate", "compare the pipeline against the brute-force oracle");
  auto* val_input = validate->add_option("--input", val_in, "FASTA input")->check(CLI::ExistingFile);
  auto* val_synth = validate->add_option("--synthetic", val_count, "generate this many sequences instead");
  val_input->excludes(val_synth);
  validate->add_option("--seed", val_seed, "seed for --synthetic")->capture_default_str();
  validate->add_flag("--sweep", val_sweep, "run the full configuration lattice");
  validate->add_flag("--inject-corruption", val_corrupt, "alter one pipeline edge before comparing");
  add_pipeline_options(validate, val_flags);
  add_config_options(validate, val_dump);

  // generate
  CorpusSpec corpus;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "write a synthetic protein corpus");
  generate->add_option("--output", gen_out, "FASTA output")->required();
  generate->add_option("--count", corpus.n, "number of sequences")->capture_default_str();
  generate->add_option("--seed", corpus.seed, "random seed")->capture_default_str();
  generate->add_option("--min-len", corpus.min_len, "minimum length")->capture_default_str();
  generate->add_option("--max-len", corpus.max_len, "maximum length")->capture_default_str();
  generate->add_option("--family-size", corpus.family_size, "sequences per family")->capture_default_str();
  generate->add_option("--substitution-rate", corpus.substitution_rate, "per-residue substitution rate")
      ->capture_default_str();
  generate->add_option("--indel-rate", corpus.indel_rate, "per-residue indel rate")->capture_default_str();

  // blosum
  auto* blosum = app.add_subcommand("blosum", "print the BLOSUM62 table over the alphabet");

  // canonicalize
  std::string can_in, can_out;
  auto* canon = app.add_subcommand("canonicalize", "sort the lines of an edge file");
  canon->add_option("--input", can_in, "edge file")->required()->check(CLI::ExistingFile);
  canon->add_option("--output", can_out, "sorted edge file")->required();

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (search->parsed()) {
      if (search_dump) {
        out << dump_config(search);
        return kOk;
      }
      if (search_in.empty() || search_out.empty()) throw ConfigError("search requires --input and --output");
      if (!std::filesystem::is_regular_file(search_in)) throw ConfigError("input file not found: " + search_in);
      PipelineConfig config = search_flags.to_config();
      RunStats stats = run_search(config, search_in, search_out);
      out << "sequences " << stats.sequences << ", blocks " << stats.blocks << "\n"
          << "discovered " << stats.discovered_candidates << ", aligned " << stats.performed_alignments
          << ", accepted " << stats.output_edges << "\n"
          << "total " << stats.total_seconds << " s; stats in " << stats_path_for(search_out).string() << "\n";
      return kOk;
    }

    if (cost->parsed()) {
      if (cost_dump) {
        out << dump_config(cost);
        return kOk;
      }
      cost_params.validate();
      cost_bf.validate();
      json j;
      j["params"] = {{"alpha", cost_params.alpha}, {"beta", cost_params.beta}, {"s", cost_params.s},
                     {"p", cost_params.p},         {"word_bytes", cost_params.word_bytes},
                     {"block_rows", cost_bf.br},   {"block_cols", cost_bf.bc}};
      j["plain"] = cost_json(plain_summa_cost(cost_params));
      j["blocked"] = cost_json(blocked_summa_cost(cost_params, cost_bf));
      out << j.dump(2) << "\n";
      return kOk;
    }

    if (validate->parsed()) {
      if (val_dump) {
        out << dump_config(validate);
        return kOk;
      }
      PipelineConfig base = val_flags.to_config();
      std::vector<SequenceRecord> seqs;
      if (!val_in.empty()) {
        seqs = read_fasta(val_in);
      } else if (val_count > 0) {
        CorpusSpec spec;
        spec.n = val_count;
        spec.seed = val_seed;
        seqs = generate_corpus(spec);
      } else {
        throw ConfigError("validate requires --input or --synthetic");
      }
      auto expected = edge_lines(oracle::brute_force_edges(seqs, base.kmer, base.align), seqs);

      std::vector<PipelineConfig> configs;
      if (val_sweep) {
        for (int p : {1, 4, 9}) {
          for (int b : {1, 2, 4}) {
            for (auto scheme : {BalanceScheme::index, BalanceScheme::triangularity}) {
              for (bool pre : {false, true}) {
                PipelineConfig c = base;
                c.p = p;
                c.blocking = {b, b};
                c.scheme = scheme;
                c.pre_blocking = pre;
                configs.push_back(c);
              }
            }
          }
        }
      } else {
        configs.push_back(base);
      }

      int status = kOk;
      for (const auto& c : configs) {
        auto edges = collect_edges(c, seqs);
        if (val_corrupt) {
          if (edges.empty()) {
            edges.push_back({0, static_cast<SeqId>(std::min<std::size_t>(1, seqs.size() - 1)), 1, 1.0, 1.0, 1.0});
          } else {
            edges.front().score += 1;
          }
        }
        auto actual = edge_lines(edges, seqs);
        long long at = first_divergence(actual, expected);
        std::ostringstream label;
        label << "p=" << c.p << " blocking=" << c.blocking.br << "x" << c.blocking.bc
              << " scheme=" << to_string(c.scheme) << " pre_blocking=" << (c.pre_blocking ? "on" : "off");
        if (at < 0) {
          out << label.str() << " edges=" << actual.size() << " match\n";
        } else {
          out << label.str() << " MISMATCH at line " << at + 1 << "\n"
              << "  pipeline: " << line_or_end(actual, at) << "\n"
              << "  oracle:   " << line_or_end(expected, at) << "\n";
          status = kMismatch;
        }
      }
      return status;
    }

    if (generate->parsed()) {
      write_fasta(gen_out, generate_corpus(corpus));
      out << "wrote " << corpus.n << " sequences to " << gen_out << "\n";
      return kOk;
    }

    if (blosum->parsed()) {
      out << dump_matrix(blosum62());
      return kOk;
    }

    if (canon->parsed()) {
      canonicalize_output(can_in, can_out);
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kValidation;
}

}  // namespace pastis::cli

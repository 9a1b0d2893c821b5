#include "pastis/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <optional>
#include <thread>

#include "json.hpp"
#include "pastis/dist_matrix.hpp"
#include "pastis/error.hpp"
#include "pastis/scheduler.hpp"

namespace pastis {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct CandidateBlock {
  BlockId id;
  std::vector<std::vector<AlignTask>> tasks;  // per rank
  std::uint64_t discovered = 0;
  std::uint64_t overlap_nnz = 0;
  std::uint64_t flops = 0;
};

[[noreturn]] void rethrow_in_stage(BlockId id, std::string_view stage) {
  try {
    throw;
  } catch (const std::exception& e) {
    throw Error("block " + id.str() + " stage " + std::string(stage) + ": " + e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  kmer.validate();
  align.validate();
  blocking.validate();
  make_grid_config(p);
  if (scheme == BalanceScheme::triangularity && blocking.br != blocking.bc) {
    throw ConfigError("triangularity scheme requires square blocking, got " + std::to_string(blocking.br) +
                      "x" + std::to_string(blocking.bc));
  }
  if (lookahead < 0) throw ConfigError("lookahead must be >= 0");
  if (align_lanes < 1) throw ConfigError("alignment lanes must be >= 1");
  if (sparse_lanes < 0) throw ConfigError("sparse lanes must be >= 0");
  if (dense_threshold < 0) throw ConfigError("dense threshold must be >= 0");
}

int PipelineConfig::effective_sparse_lanes() const noexcept {
  if (sparse_lanes > 0) return sparse_lanes;
  int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, hw - align_lanes);
}

double imbalance_pct(std::span<const double> per_worker) {
  if (per_worker.empty()) return 0.0;
  double sum = std::accumulate(per_worker.begin(), per_worker.end(), 0.0);
  double avg = sum / static_cast<double>(per_worker.size());
  if (!(avg > 0.0)) return 0.0;
  double mx = *std::max_element(per_worker.begin(), per_worker.end());
  return 100.0 * (mx - avg) / avg;
}

RunStats compute_stats(const RawMetrics& raw) {
  RunStats s;
  s.sequences = raw.sequences;
  s.blocks = raw.blocks;
  s.discovered_candidates = raw.discovered_candidates;
  s.performed_alignments = raw.performed_alignments;
  s.output_edges = raw.output_edges;
  s.align_seconds = raw.align_seconds;
  s.spgemm_seconds = raw.spgemm_seconds;
  s.sparse_all_seconds = raw.sparse_all_seconds;
  s.io_seconds = raw.io_seconds;
  s.preblocking_seconds = raw.preblocking_seconds;
  s.total_seconds = raw.total_seconds;
  s.alignments_per_second =
      raw.total_seconds > 0.0 ? static_cast<double>(raw.performed_alignments) / raw.total_seconds : 0.0;
  s.cups = raw.kernel_seconds > 0.0 ? static_cast<double>(raw.cells) / raw.kernel_seconds : 0.0;
  s.imbalance_align_pct = imbalance_pct(raw.align_per_worker);
  s.imbalance_sparse_pct = imbalance_pct(raw.sparse_per_worker);
  s.compression_factor =
      raw.overlap_nnz > 0 ? static_cast<double>(raw.flops) / static_cast<double>(raw.overlap_nnz) : 0.0;
  s.peak_live_blocks = raw.peak_live_blocks;
  s.cells = raw.cells;
  s.kernel_seconds = raw.kernel_seconds;
  s.flops = raw.flops;
  s.overlap_nnz = raw.overlap_nnz;
  s.traffic = raw.traffic;
  return s;
}

std::string stats_to_json(const RunStats& s) {
  nlohmann::ordered_json j;
  j["sequences"] = s.sequences;
  j["blocks"] = s.blocks;
  j["discovered_candidates"] = s.discovered_candidates;
  j["performed_alignments"] = s.performed_alignments;
  j["output_edges"] = s.output_edges;
  j["align_seconds"] = s.align_seconds;
  j["spgemm_seconds"] = s.spgemm_seconds;
  j["sparse_all_seconds"] = s.sparse_all_seconds;
  j["io_seconds"] = s.io_seconds;
  j["cwait_seconds"] = s.cwait_seconds;
  j["preblocking_seconds"] = s.preblocking_seconds;
  j["total_seconds"] = s.total_seconds;
  j["alignments_per_second"] = s.alignments_per_second;
  j["cups"] = s.cups;
  j["imbalance_align_pct"] = s.imbalance_align_pct;
  j["imbalance_sparse_pct"] = s.imbalance_sparse_pct;
  j["compression_factor"] = s.compression_factor;
  j["peak_live_blocks"] = s.peak_live_blocks;
  j["cells"] = s.cells;
  j["kernel_seconds"] = s.kernel_seconds;
  j["flops"] = s.flops;
  j["overlap_nnz"] = s.overlap_nnz;
  j["traffic"] = {{"broadcasts_row", s.traffic.broadcasts_row},
                  {"broadcasts_col", s.traffic.broadcasts_col},
                  {"messages_sent", s.traffic.messages_sent},
                  {"bytes_sent", s.traffic.bytes_sent},
                  {"tree_hops", s.traffic.tree_hops}};
  return j.dump(2) + "\n";
}

RunStats search_records(const PipelineConfig& config, std::span<const SequenceRecord> seqs,
                        const EdgeSink& sink) {
  config.validate();
  const auto start = Clock::now();
  RawMetrics raw;
  raw.sequences = seqs.size();

  GridOptions gopts;
  gopts.mode = config.grid_mode;
  gopts.compute_slots = config.effective_sparse_lanes();
  Grid grid(config.p, gopts);
  const auto p = static_cast<std::size_t>(config.p);
  raw.align_per_worker.assign(p, 0.0);
  raw.sparse_per_worker.assign(p, 0.0);

  // Sequence-by-k-mer matrix A, its transpose, and the striped operands.
  auto t_setup = Clock::now();
  auto a_local = build_kmer_matrix(seqs, config.kmer);
  auto a = distribute(a_local, grid.config());
  a_local = LocalSparse<KmerEntry>();
  auto at = distributed_transpose(grid, a);
  auto stripes = stripe_inputs(grid, a, at, config.blocking);
  a = DistMatrix<KmerEntry>();
  at = DistMatrix<KmerEntry>();
  double setup_seconds = seconds_since(t_setup);

  BlockPlan plan = make_plan(config.scheme, config.blocking);
  std::vector<BlockId> order = plan.order();
  raw.blocks = order.size();

  SpgemmOptions sopts;
  sopts.dense_threshold = config.dense_threshold;
  BlockedSumma summa(grid, stripes, order, overlap_semiring(config.kmer), sopts);
  const auto threshold = static_cast<std::uint32_t>(config.kmer.common_kmer_threshold);

  double produce_total = 0.0;
  auto produce = [&](std::size_t k) -> CandidateBlock {
    CandidateBlock cb;
    cb.id = order[k];
    const BlockClass cls = plan.entries[k].cls;
    std::optional<ComputedBlock<OverlapPayload>> block;
    try {
      block = summa.next();
    } catch (...) {
      rethrow_in_stage(cb.id, "spgemm");
    }
    const auto t_block = Clock::now();
    double critical = 0.0;
    for (std::size_t rank = 0; rank < p; ++rank) {
      critical = std::max(critical, block->spgemm_seconds[rank]);
      raw.sparse_per_worker[rank] += block->spgemm_seconds[rank] + block->merge_seconds[rank];
    }
    raw.spgemm_seconds += critical;
    cb.flops = block->total_flops();

    cb.tasks.resize(p);
    const auto& m = block->matrix;
    try {
      for (int x = 0; x < m.q; ++x) {
        for (int y = 0; y < m.q; ++y) {
          const auto rank = static_cast<std::size_t>(grid.config().rank_of(x, y));
          const auto t_rank = Clock::now();
          const auto& local = m.block(x, y);
          cb.overlap_nnz += local.nnz();
          Index row0 = block->row0 + m.row_bounds[static_cast<std::size_t>(x)];
          Index col0 = block->col0 + m.col_bounds[static_cast<std::size_t>(y)];
          auto pruned = prune_block(local, cls, row0, col0);
          cb.discovered += pruned.nnz();
          auto& tasks = cb.tasks[rank];
          pruned.for_each([&](Index r, Index c, const OverlapPayload& v) {
            if (v.count < threshold) return;
            Index gi = r + row0;
            Index gj = c + col0;
            tasks.push_back({std::min(gi, gj), std::max(gi, gj), v});
          });
          raw.sparse_per_worker[rank] += seconds_since(t_rank);
        }
      }
    } catch (...) {
      rethrow_in_stage(cb.id, "prune");
    }
    produce_total += block->wall_seconds + seconds_since(t_block);
    return cb;
  };

  auto consume = [&](std::size_t, CandidateBlock cb) {
    std::vector<SimilarityEdge> edges;
    const auto t_align = Clock::now();
    for (std::size_t rank = 0; rank < p; ++rank) {
      const auto& tasks = cb.tasks[rank];
      if (tasks.empty()) continue;
      const auto t_rank = Clock::now();
      BatchResult br = align_batch(tasks, seqs, config.align, config.align_lanes);
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (!br.errors[t].empty()) {
          throw Error("block " + cb.id.str() + " stage align: pair (" + std::to_string(tasks[t].i) + "," +
                      std::to_string(tasks[t].j) + "): " + br.errors[t]);
        }
        const auto& ti = tasks[t];
        auto edge = evaluate_pair(ti.i, ti.j, seqs[static_cast<std::size_t>(ti.i)].residues,
                                  seqs[static_cast<std::size_t>(ti.j)].residues, br.results[t], config.align);
        if (edge) edges.push_back(*edge);
      }
      raw.align_per_worker[rank] += seconds_since(t_rank);
      raw.performed_alignments += br.counters.alignments;
      raw.cells += br.counters.cells;
      raw.kernel_seconds += br.counters.kernel_seconds;
    }
    raw.align_seconds += seconds_since(t_align);
    raw.discovered_candidates += cb.discovered;
    raw.overlap_nnz += cb.overlap_nnz;
    raw.flops += cb.flops;
    raw.output_edges += edges.size();
    const auto t_io = Clock::now();
    try {
      sink(edges);
    } catch (...) {
      rethrow_in_stage(cb.id, "emit");
    }
    raw.io_seconds += seconds_since(t_io);
  };

  ScheduleStats sched = run_pipelined(order.size(), config.effective_lookahead(), produce, consume);
  raw.peak_live_blocks = sched.peak_live;
  raw.preblocking_seconds = sched.wall_seconds;
  raw.sparse_all_seconds = setup_seconds + produce_total;
  raw.traffic = grid.totals();
  raw.total_seconds = seconds_since(start);
  return compute_stats(raw);
}

std::filesystem::path stats_path_for(const std::filesystem::path& output_path) {
  return std::filesystem::path(output_path.string() + ".stats.json");
}

RunStats run_search(const PipelineConfig& config, const std::filesystem::path& input_path,
                    const std::filesystem::path& output_path) {
  config.validate();
  const auto start = Clock::now();
  auto t_io = Clock::now();
  auto seqs = read_fasta(input_path);
  double read_seconds = seconds_since(t_io);

  EdgeWriter writer(output_path, seqs);
  RunStats stats = search_records(config, seqs, [&](std::span<const SimilarityEdge> edges) { writer.append(edges); });
  t_io = Clock::now();
  writer.close();
  stats.io_seconds += read_seconds + seconds_since(t_io);
  stats.total_seconds = seconds_since(start);
  stats.alignments_per_second =
      stats.total_seconds > 0.0 ? static_cast<double>(stats.performed_alignments) / stats.total_seconds : 0.0;

  std::ofstream out(stats_path_for(output_path));
  if (!out) throw InputError("cannot write stats file " + stats_path_for(output_path).string());
  out << stats_to_json(stats);
  if (!out) throw InputError("failed writing stats file " + stats_path_for(output_path).string());
  return stats;
}

}  // namespace pastis

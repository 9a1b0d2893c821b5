#pragma once

// Incremental many-against-many search: for each planned output block,
// SUMMA -> prune -> common-k-mer filter -> align -> emit.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pastis/align.hpp"
#include "pastis/balance.hpp"
#include "pastis/grid.hpp"
#include "pastis/kmer.hpp"
#include "pastis/seqio.hpp"
#include "pastis/summa.hpp"

namespace pastis {

struct PipelineConfig {
  KmerParams kmer;
  AlignParams align;
  BlockingFactor blocking;
  BalanceScheme scheme = BalanceScheme::index;
  int p = 1;
  bool pre_blocking = false;
  int lookahead = 1;      // ignored unless pre_blocking
  int align_lanes = 1;
  int sparse_lanes = 0;   // 0: hardware threads left after the alignment lanes
  ExecutionMode grid_mode = ExecutionMode::threaded;
  Index dense_threshold = Index{1} << 16;

  void validate() const;
  /// Lookahead actually used by the scheduler.
  int effective_lookahead() const noexcept { return pre_blocking ? lookahead : 0; }
  int effective_sparse_lanes() const noexcept;
};

struct RunStats {
  std::uint64_t sequences = 0;
  std::uint64_t blocks = 0;
  std::uint64_t discovered_candidates = 0;
  std::uint64_t performed_alignments = 0;
  std::uint64_t output_edges = 0;
  double align_seconds = 0.0;
  double spgemm_seconds = 0.0;
  double sparse_all_seconds = 0.0;
  double io_seconds = 0.0;
  double cwait_seconds = 0.0;
  double preblocking_seconds = 0.0;
  double total_seconds = 0.0;
  double alignments_per_second = 0.0;
  double cups = 0.0;
  double imbalance_align_pct = 0.0;
  double imbalance_sparse_pct = 0.0;
  double compression_factor = 0.0;
  std::uint64_t peak_live_blocks = 0;
  std::uint64_t cells = 0;
  double kernel_seconds = 0.0;
  std::uint64_t flops = 0;
  std::uint64_t overlap_nnz = 0;
  TrafficCounters traffic;
};

/// Timers and counters collected during a run, before derivation.
struct RawMetrics {
  std::uint64_t sequences = 0;
  std::uint64_t blocks = 0;
  std::uint64_t discovered_candidates = 0;
  std::uint64_t performed_alignments = 0;
  std::uint64_t output_edges = 0;
  std::uint64_t cells = 0;
  std::uint64_t flops = 0;
  std::uint64_t overlap_nnz = 0;  // before pruning, summed over blocks
  std::uint64_t peak_live_blocks = 0;
  double align_seconds = 0.0;
  double spgemm_seconds = 0.0;
  double sparse_all_seconds = 0.0;
  double io_seconds = 0.0;
  double kernel_seconds = 0.0;
  double preblocking_seconds = 0.0;
  double total_seconds = 0.0;
  std::vector<double> align_per_worker;
  std::vector<double> sparse_per_worker;
  TrafficCounters traffic;
};

/// 100 * (max - avg) / avg; 0 for empty input or zero average.
double imbalance_pct(std::span<const double> per_worker);

RunStats compute_stats(const RawMetrics& raw);

/// Pretty-printed JSON document with one key per RunStats field.
std::string stats_to_json(const RunStats& stats);

/// Receives the accepted edges of one block, already canonical (i < j).
using EdgeSink = std::function<void(std::span<const SimilarityEdge>)>;

/// Runs the search over in-memory records. `io_seconds` covers only the time
/// spent inside `sink`.
RunStats search_records(const PipelineConfig& config, std::span<const SequenceRecord> seqs,
                        const EdgeSink& sink);

/// Reads FASTA, streams edges to `output_path` and writes
/// `output_path + ".stats.json"`.
RunStats run_search(const PipelineConfig& config, const std::filesystem::path& input_path,
                    const std::filesystem::path& output_path);

std::filesystem::path stats_path_for(const std::filesystem::path& output_path);

}  // namespace pastis

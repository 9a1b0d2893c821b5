#pragma once

// Virtual sqrt(p) x sqrt(p) process grid. Workers are independent execution
// lanes in one OS process; everything they exchange goes through a Transport
// as byte messages, so a networked backend could stand in for the in-process
// one.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace pastis {

struct GridConfig {
  int p = 1;
  int q = 1;

  // Row-major: rank = row * q + col.
  int rank_of(int row, int col) const noexcept { return row * q + col; }
  int row_of(int rank) const noexcept { return rank / q; }
  int col_of(int rank) const noexcept { return rank % q; }
};

/// Throws ConfigError unless p is a perfect square >= 1.
GridConfig make_grid_config(int p);

bool is_perfect_square(long long p) noexcept;

/// ceil(log2(n)) for n >= 1; depth of a binomial broadcast tree over n nodes.
int tree_depth(int n) noexcept;

struct TrafficCounters {
  std::uint64_t broadcasts_row = 0;
  std::uint64_t broadcasts_col = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t tree_hops = 0;  // sum of tree depths over broadcasts joined

  bool operator==(const TrafficCounters&) const = default;
};

using Message = std::vector<std::byte>;

/// Reliable, per-pair FIFO message passing between ranks.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual int size() const = 0;
  virtual void send(int src, int dst, Message msg) = 0;
  /// Blocks until a message from `src` arrives at `dst`.
  virtual Message receive(int dst, int src) = 0;
};

enum class ExecutionMode {
  threaded,    // all workers run concurrently
  sequential,  // one worker at a time, round-robin at blocking receives
};

struct GridOptions {
  ExecutionMode mode = ExecutionMode::threaded;
  // A receive that waits longer than this is treated as a mismatched
  // collective.
  std::chrono::milliseconds timeout{60'000};
  // Maximum workers inside Worker::compute at once; 0 means unlimited.
  int compute_slots = 0;
};

class Grid;

/// Per-rank handle passed to the SPMD program in Grid::run.
class Worker {
 public:
  int rank() const noexcept { return rank_; }
  int row() const noexcept;
  int col() const noexcept;
  const GridConfig& config() const noexcept;

  void send(int dst, Message msg);
  Message receive(int src);

  /// Binomial-tree broadcast along this worker's grid row from the worker in
  /// column `root_col`. `payload` is read only at the root.
  Message broadcast_row(int root_col, Message payload);
  Message broadcast_col(int root_row, Message payload);

  /// Runs `f` while holding one of the grid's compute slots.
  template <class F>
  decltype(auto) compute(F&& f);

  const TrafficCounters& counters() const noexcept;

 private:
  friend class Grid;
  Worker(Grid& grid, int rank) : grid_(&grid), rank_(rank) {}
  Message broadcast(std::span<const int> members, int root_index, Message payload);
  void acquire_slot();
  void release_slot();

  Grid* grid_;
  int rank_;
};

class Grid {
 public:
  explicit Grid(int p, GridOptions options = {});
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  const GridConfig& config() const noexcept { return config_; }
  const GridOptions& options() const noexcept { return options_; }
  Transport& transport() noexcept;

  /// Runs `program` once per rank and waits for all of them. The first
  /// worker exception aborts the others and is rethrown here.
  void run(const std::function<void(Worker&)>& program);

  const TrafficCounters& counters(int rank) const { return counters_.at(static_cast<std::size_t>(rank)); }

  /// Grid-wide view: broadcasts and tree hops are per-participant maxima (the
  /// critical path a cost model charges); messages and bytes are sums.
  TrafficCounters totals() const;
  void reset_counters();

 private:
  friend class Worker;
  class InProcessTransport;

  GridConfig config_;
  GridOptions options_;
  std::unique_ptr<InProcessTransport> transport_;
  std::vector<TrafficCounters> counters_;
};

template <class F>
decltype(auto) Worker::compute(F&& f) {
  struct SlotGuard {
    Worker* w;
    ~SlotGuard() { w->release_slot(); }
  };
  acquire_slot();
  SlotGuard guard{this};
  return std::forward<F>(f)();
}

}  // namespace pastis

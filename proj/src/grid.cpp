#include "pastis/grid.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "pastis/error.hpp"

namespace pastis {

bool is_perfect_square(long long p) noexcept {
  if (p < 1) return false;
  auto q = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(p))));
  for (long long c = std::max(1LL, q - 1); c <= q + 1; ++c) {
    if (c * c == p) return true;
  }
  return false;
}

GridConfig make_grid_config(int p) {
  if (!is_perfect_square(p)) {
    throw ConfigError("worker count " + std::to_string(p) + " is not a perfect square");
  }
  int q = static_cast<int>(std::llround(std::sqrt(static_cast<double>(p))));
  while (q * q > p) --q;
  while ((q + 1) * (q + 1) <= p) ++q;
  return {p, q};
}

int tree_depth(int n) noexcept {
  int depth = 0;
  while ((1 << depth) < n) ++depth;
  return depth;
}

// ---------------------------------------------------------------------------

class Grid::InProcessTransport final : public Transport {
 public:
  InProcessTransport(int p, const GridOptions& opts)
      : p_(p), opts_(opts), boxes_(static_cast<std::size_t>(p) * static_cast<std::size_t>(p)) {}

  int size() const override { return p_; }

  void reset() {
    std::lock_guard lock(mu_);
    for (auto& b : boxes_) b.clear();
    aborted_ = false;
    abort_reason_.clear();
    done_.assign(static_cast<std::size_t>(p_), false);
    turn_ = 0;
    stalled_ = 0;
    busy_slots_ = 0;
  }

  void send(int src, int dst, Message msg) override {
    std::lock_guard lock(mu_);
    box(src, dst).push_back(std::move(msg));
    stalled_ = 0;
    cv_.notify_all();
  }

  Message receive(int dst, int src) override {
    std::unique_lock lock(mu_);
    auto& q = box(src, dst);
    if (opts_.mode == ExecutionMode::threaded) {
      bool ok = cv_.wait_for(lock, opts_.timeout, [&] { return aborted_ || !q.empty(); });
      if (aborted_) throw GridAborted("grid aborted: " + abort_reason_);
      if (!ok) {
        abort_locked("rank " + std::to_string(dst) + " timed out waiting for rank " +
                     std::to_string(src));
        throw CollectiveTimeout(abort_reason_);
      }
    } else {
      while (q.empty()) {
        if (aborted_) throw GridAborted("grid aborted: " + abort_reason_);
        // Everyone alive yielded twice without a send in between: nobody can
        // make progress.
        if (++stalled_ > 2 * alive_locked()) {
          abort_locked("deadlock: rank " + std::to_string(dst) + " waits for rank " +
                       std::to_string(src) + " and no worker can progress");
          throw CollectiveTimeout(abort_reason_);
        }
        pass_turn_locked(dst);
        cv_.wait(lock, [&] { return aborted_ || turn_ == dst; });
      }
    }
    Message m = std::move(q.front());
    q.pop_front();
    return m;
  }

  // Sequential mode turn handling.
  void wait_turn(int rank) {
    if (opts_.mode != ExecutionMode::sequential) return;
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return aborted_ || turn_ == rank; });
    if (aborted_) throw GridAborted("grid aborted: " + abort_reason_);
  }

  void finish(int rank) {
    std::lock_guard lock(mu_);
    done_[static_cast<std::size_t>(rank)] = true;
    stalled_ = 0;
    if (opts_.mode == ExecutionMode::sequential && turn_ == rank) pass_turn_locked(rank);
    cv_.notify_all();
  }

  void abort(const std::string& reason) {
    std::lock_guard lock(mu_);
    abort_locked(reason);
  }

  void acquire_slot() {
    if (opts_.compute_slots <= 0 || opts_.mode == ExecutionMode::sequential) return;
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return aborted_ || busy_slots_ < opts_.compute_slots; });
    if (aborted_) throw GridAborted("grid aborted: " + abort_reason_);
    ++busy_slots_;
  }

  void release_slot() {
    if (opts_.compute_slots <= 0 || opts_.mode == ExecutionMode::sequential) return;
    std::lock_guard lock(mu_);
    --busy_slots_;
    cv_.notify_all();
  }

 private:
  std::deque<Message>& box(int src, int dst) {
    return boxes_[static_cast<std::size_t>(src) * static_cast<std::size_t>(p_) +
                  static_cast<std::size_t>(dst)];
  }

  int alive_locked() const {
    return static_cast<int>(std::count(done_.begin(), done_.end(), false));
  }

  void pass_turn_locked(int from) {
    for (int step = 1; step <= p_; ++step) {
      int next = (from + step) % p_;
      if (!done_[static_cast<std::size_t>(next)]) {
        turn_ = next;
        cv_.notify_all();
        return;
      }
    }
  }

  void abort_locked(const std::string& reason) {
    if (!aborted_) {
      aborted_ = true;
      abort_reason_ = reason;
    }
    cv_.notify_all();
  }

  int p_;
  GridOptions opts_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::deque<Message>> boxes_;
  std::vector<bool> done_;
  bool aborted_ = false;
  std::string abort_reason_;
  int turn_ = 0;
  int stalled_ = 0;
  int busy_slots_ = 0;
};

// ---------------------------------------------------------------------------

Grid::Grid(int p, GridOptions options)
    : config_(make_grid_config(p)),
      options_(options),
      transport_(std::make_unique<InProcessTransport>(p, options)),
      counters_(static_cast<std::size_t>(p)) {}

Grid::~Grid() = default;

Transport& Grid::transport() noexcept { return *transport_; }

void Grid::run(const std::function<void(Worker&)>& program) {
  transport_->reset();
  const int p = config_.p;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(p));
  std::vector<bool> aborted_only(static_cast<std::size_t>(p), false);

  auto body = [&](int rank) {
    Worker worker(*this, rank);
    try {
      transport_->wait_turn(rank);
      program(worker);
    } catch (const GridAborted&) {
      errors[static_cast<std::size_t>(rank)] = std::current_exception();
      aborted_only[static_cast<std::size_t>(rank)] = true;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(rank)] = std::current_exception();
      transport_->abort("rank " + std::to_string(rank) + ": " + e.what());
    } catch (...) {
      errors[static_cast<std::size_t>(rank)] = std::current_exception();
      transport_->abort("rank " + std::to_string(rank) + ": unknown exception");
    }
    transport_->finish(rank);
  };

  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) threads.emplace_back(body, r);
  }

  std::exception_ptr first_aborted;
  for (int r = 0; r < p; ++r) {
    auto& e = errors[static_cast<std::size_t>(r)];
    if (!e) continue;
    if (!aborted_only[static_cast<std::size_t>(r)]) std::rethrow_exception(e);
    if (!first_aborted) first_aborted = e;
  }
  if (first_aborted) std::rethrow_exception(first_aborted);
}

TrafficCounters Grid::totals() const {
  TrafficCounters t;
  for (const auto& c : counters_) {
    t.broadcasts_row = std::max(t.broadcasts_row, c.broadcasts_row);
    t.broadcasts_col = std::max(t.broadcasts_col, c.broadcasts_col);
    t.tree_hops = std::max(t.tree_hops, c.tree_hops);
    t.messages_sent += c.messages_sent;
    t.bytes_sent += c.bytes_sent;
  }
  return t;
}

void Grid::reset_counters() {
  std::fill(counters_.begin(), counters_.end(), TrafficCounters{});
}

// ---------------------------------------------------------------------------

int Worker::row() const noexcept { return grid_->config_.row_of(rank_); }
int Worker::col() const noexcept { return grid_->config_.col_of(rank_); }
const GridConfig& Worker::config() const noexcept { return grid_->config_; }

const TrafficCounters& Worker::counters() const noexcept {
  return grid_->counters_[static_cast<std::size_t>(rank_)];
}

void Worker::send(int dst, Message msg) {
  if (dst < 0 || dst >= grid_->config_.p) throw Error("send to invalid rank " + std::to_string(dst));
  if (dst != rank_) {
    auto& c = grid_->counters_[static_cast<std::size_t>(rank_)];
    c.messages_sent += 1;
    c.bytes_sent += msg.size();
  }
  grid_->transport_->send(rank_, dst, std::move(msg));
}

Message Worker::receive(int src) {
  if (src < 0 || src >= grid_->config_.p) {
    throw Error("receive from invalid rank " + std::to_string(src));
  }
  return grid_->transport_->receive(rank_, src);
}

Message Worker::broadcast(std::span<const int> members, int root_index, Message payload) {
  const int n = static_cast<int>(members.size());
  auto self = std::find(members.begin(), members.end(), rank_);
  if (self == members.end()) throw Error("broadcast: rank not in group");
  const int idx = static_cast<int>(self - members.begin());
  const int rel = (idx - root_index + n) % n;
  auto member = [&](int r) { return members[static_cast<std::size_t>((r + root_index) % n)]; };

  grid_->counters_[static_cast<std::size_t>(rank_)].tree_hops +=
      static_cast<std::uint64_t>(tree_depth(n));
  if (n == 1) return payload;

  int mask = 1;
  if (rel != 0) {
    int high = 1;
    while ((high << 1) <= rel) high <<= 1;
    payload = receive(member(rel - high));
    mask = high << 1;
  }
  for (; rel + mask < n; mask <<= 1) send(member(rel + mask), payload);
  return payload;
}

Message Worker::broadcast_row(int root_col, Message payload) {
  const auto& cfg = grid_->config_;
  std::vector<int> members(static_cast<std::size_t>(cfg.q));
  for (int c = 0; c < cfg.q; ++c) members[static_cast<std::size_t>(c)] = cfg.rank_of(row(), c);
  grid_->counters_[static_cast<std::size_t>(rank_)].broadcasts_row += 1;
  return broadcast(members, root_col, std::move(payload));
}

Message Worker::broadcast_col(int root_row, Message payload) {
  const auto& cfg = grid_->config_;
  std::vector<int> members(static_cast<std::size_t>(cfg.q));
  for (int r = 0; r < cfg.q; ++r) members[static_cast<std::size_t>(r)] = cfg.rank_of(r, col());
  grid_->counters_[static_cast<std::size_t>(rank_)].broadcasts_col += 1;
  return broadcast(members, root_row, std::move(payload));
}

void Worker::acquire_slot() { grid_->transport_->acquire_slot(); }
void Worker::release_slot() { grid_->transport_->release_slot(); }

}  // namespace pastis

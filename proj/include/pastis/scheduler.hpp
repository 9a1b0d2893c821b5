#pragma once

// Two-lane block scheduler. The sparse lane produces block k while the
// alignment lane consumes block k - 1; a block stays live from the start of
// its production until its consumption finishes.

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>

namespace pastis {

struct ScheduleStats {
  std::size_t blocks = 0;
  std::size_t peak_live = 0;
  double produce_seconds = 0.0;  // busy time of the sparse lane
  double consume_seconds = 0.0;  // busy time of the alignment lane
  double wall_seconds = 0.0;
};

/// Runs produce(k) -> T and consume(k, T&&) for k in [0, n). With lookahead 0
/// both run back to back on the calling thread. With lookahead L > 0 the
/// producer runs on its own thread up to L blocks ahead, handing blocks over
/// through a queue of capacity L, so at most L + 1 blocks are ever live.
template <class Produce, class Consume>
ScheduleStats run_pipelined(std::size_t n, int lookahead, Produce&& produce, Consume&& consume) {
  using Clock = std::chrono::steady_clock;
  using T = decltype(produce(std::size_t{0}));
  auto seconds_since = [](Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
  };

  ScheduleStats stats;
  stats.blocks = n;
  const auto start = Clock::now();

  if (lookahead <= 0) {
    for (std::size_t k = 0; k < n; ++k) {
      stats.peak_live = 1;
      auto t0 = Clock::now();
      T item = produce(k);
      stats.produce_seconds += seconds_since(t0);
      t0 = Clock::now();
      consume(k, std::move(item));
      stats.consume_seconds += seconds_since(t0);
    }
    stats.wall_seconds = seconds_since(start);
    return stats;
  }

  const auto capacity = static_cast<std::size_t>(lookahead);
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::pair<std::size_t, T>> queue;
  std::size_t live = 0;
  bool producer_done = false;
  bool stop = false;
  std::exception_ptr producer_error;
  double produce_busy = 0.0;

  std::thread producer([&] {
    try {
      for (std::size_t k = 0; k < n; ++k) {
        {
          std::unique_lock lock(mu);
          cv.wait(lock, [&] { return stop || live < capacity + 1; });
          if (stop) break;
          ++live;
          stats.peak_live = std::max(stats.peak_live, live);
        }
        auto t0 = Clock::now();
        T item = produce(k);
        produce_busy += seconds_since(t0);
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return stop || queue.size() < capacity; });
        if (stop) break;
        queue.emplace_back(k, std::move(item));
        cv.notify_all();
      }
    } catch (...) {
      std::lock_guard lock(mu);
      producer_error = std::current_exception();
    }
    std::lock_guard lock(mu);
    producer_done = true;
    cv.notify_all();
  });

  std::exception_ptr consumer_error;
  try {
    for (;;) {
      std::optional<std::pair<std::size_t, T>> next;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return !queue.empty() || producer_done; });
        if (queue.empty()) break;
        next.emplace(std::move(queue.front()));
        queue.pop_front();
        cv.notify_all();
      }
      auto t0 = Clock::now();
      consume(next->first, std::move(next->second));
      stats.consume_seconds += seconds_since(t0);
      next.reset();
      std::lock_guard lock(mu);
      --live;
      cv.notify_all();
    }
  } catch (...) {
    consumer_error = std::current_exception();
    std::lock_guard lock(mu);
    stop = true;
    cv.notify_all();
  }
  producer.join();
  stats.produce_seconds = produce_busy;
  stats.wall_seconds = seconds_since(start);
  if (producer_error) std::rethrow_exception(producer_error);
  if (consumer_error) std::rethrow_exception(consumer_error);
  return stats;
}

}  // namespace pastis

#include <atomic>
#include <random>
#include <thread>

#include "doctest.h"
#include "pastis/dist_matrix.hpp"
#include "pastis/error.hpp"
#include "pastis/grid.hpp"
#include "support.hpp"

using namespace pastis;
using namespace std::chrono_literals;
using pastis::testing::random_matrix;

namespace {

Message bytes_of(const std::string& s) {
  Message m(s.size());
  std::memcpy(m.data(), s.data(), s.size());
  return m;
}

std::string text_of(const Message& m) { return {reinterpret_cast<const char*>(m.data()), m.size()}; }

const ExecutionMode kModes[] = {ExecutionMode::threaded, ExecutionMode::sequential};

}  // namespace

TEST_CASE("grid configuration") {
  auto g4 = make_grid_config(4);
  CHECK(g4.q == 2);
  auto g9 = make_grid_config(9);
  CHECK(g9.row_of(5) == 1);
  CHECK(g9.col_of(5) == 2);
  CHECK(g9.rank_of(1, 2) == 5);
  CHECK(make_grid_config(1).q == 1);
  CHECK_THROWS_AS(make_grid_config(3), ConfigError);
  CHECK_THROWS_AS(make_grid_config(0), ConfigError);
  for (int p : {1, 4, 9, 16, 25}) {
    auto g = make_grid_config(p);
    for (int r = 0; r < p; ++r) CHECK(g.rank_of(g.row_of(r), g.col_of(r)) == r);
  }
  CHECK(tree_depth(1) == 0);
  CHECK(tree_depth(2) == 1);
  CHECK(tree_depth(3) == 2);
  CHECK(tree_depth(4) == 2);
  CHECK(tree_depth(5) == 3);
}

TEST_CASE("point-to-point delivery is FIFO per pair") {
  for (auto mode : kModes) {
    Grid grid(4, {mode});
    std::vector<int> received;
    grid.run([&](Worker& w) {
      if (w.rank() == 0) {
        for (int k = 0; k < 100; ++k) w.send(3, bytes_of(std::to_string(k)));
      } else if (w.rank() == 3) {
        for (int k = 0; k < 100; ++k) received.push_back(std::stoi(text_of(w.receive(0))));
      }
    });
    REQUIRE(received.size() == 100);
    for (int k = 0; k < 100; ++k) CHECK(received[static_cast<std::size_t>(k)] == k);
    CHECK(grid.counters(0).messages_sent == 100);
    CHECK(grid.totals().messages_sent == 100);
  }
}

TEST_CASE("broadcasts deliver identical payloads and count tree edges") {
  for (auto mode : kModes) {
    for (int p : {1, 4, 9, 16}) {
      Grid grid(p, {mode});
      const int q = grid.config().q;
      std::vector<std::string> row_got(static_cast<std::size_t>(p)), col_got(static_cast<std::size_t>(p));
      const std::string payload(37, 'z');
      grid.run([&](Worker& w) {
        for (int root = 0; root < q; ++root) {
          auto r = w.broadcast_row(root, w.col() == root ? bytes_of(payload + std::to_string(w.row())) : Message{});
          CHECK(text_of(r) == payload + std::to_string(w.row()));
          auto c = w.broadcast_col(root, w.row() == root ? bytes_of(payload + std::to_string(w.col())) : Message{});
          CHECK(text_of(c) == payload + std::to_string(w.col()));
        }
      });
      auto t = grid.totals();
      CHECK(t.broadcasts_row == static_cast<std::uint64_t>(q));
      CHECK(t.broadcasts_col == static_cast<std::uint64_t>(q));
      // Per broadcast: participants - 1 messages; q roots x q groups x 2 directions.
      const auto edges = static_cast<std::uint64_t>(2 * q * q * (q - 1));
      CHECK(t.messages_sent == edges);
      CHECK(t.bytes_sent == edges * (payload.size() + 1));
      CHECK(t.tree_hops == static_cast<std::uint64_t>(2 * q * tree_depth(q)));
    }
  }
}

TEST_CASE("2x2 row broadcast is one message") {
  Grid grid(4);
  grid.run([](Worker& w) { w.broadcast_row(0, w.col() == 0 ? bytes_of("abc") : Message{}); });
  CHECK(grid.counters(0).messages_sent == 1);
  CHECK(grid.counters(1).messages_sent == 0);
  CHECK(grid.counters(2).messages_sent == 1);
  CHECK(grid.totals().messages_sent == 2);
}

TEST_CASE("1x1 collectives are no-ops") {
  Grid grid(1);
  grid.run([](Worker& w) {
    CHECK(text_of(w.broadcast_row(0, bytes_of("x"))) == "x");
    CHECK(text_of(w.broadcast_col(0, bytes_of("y"))) == "y");
  });
  CHECK(grid.totals().messages_sent == 0);
  CHECK(grid.totals().bytes_sent == 0);
}

TEST_CASE("counters are deterministic across identical runs") {
  auto run_once = [] {
    Grid grid(9);
    grid.run([](Worker& w) {
      for (int root = 0; root < 3; ++root) {
        w.broadcast_row(root, w.col() == root ? Message(100 + static_cast<std::size_t>(w.rank())) : Message{});
      }
    });
    return grid.totals();
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("a receive nobody satisfies times out in threaded mode") {
  GridOptions opts;
  opts.timeout = 200ms;
  Grid grid(4, opts);
  CHECK_THROWS_AS(grid.run([](Worker& w) {
                    if (w.rank() == 0) w.receive(1);
                  }),
                  CollectiveTimeout);
}

TEST_CASE("mismatched collectives deadlock is detected in sequential mode") {
  Grid grid(4, {ExecutionMode::sequential});
  auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(grid.run([](Worker& w) {
                    // Rank 0 skips the broadcast its row peer waits on.
                    if (w.rank() != 0) w.broadcast_row(0, Message{});
                  }),
                  CollectiveTimeout);
  CHECK(std::chrono::steady_clock::now() - start < 5s);
}

TEST_CASE("a failing worker aborts blocked peers and its error surfaces") {
  for (auto mode : kModes) {
    Grid grid(4, {mode});
    try {
      grid.run([](Worker& w) {
        if (w.rank() == 2) throw std::runtime_error("boom");
        w.receive(2);
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "boom");
    }
  }
}

TEST_CASE("compute slots bound concurrent local work") {
  GridOptions opts;
  opts.compute_slots = 2;
  Grid grid(9, opts);
  std::atomic<int> inside{0}, peak{0};
  grid.run([&](Worker& w) {
    w.compute([&] {
      int now = ++inside;
      int prev = peak.load();
      while (now > prev && !peak.compare_exchange_weak(prev, now)) {
      }
      std::this_thread::sleep_for(5ms);
      --inside;
      return 0;
    });
  });
  CHECK(peak.load() <= 2);
  CHECK(peak.load() >= 1);
}

TEST_CASE("split bounds put the remainder in the last part") {
  CHECK(split_bounds(10, 4) == std::vector<Index>{0, 3, 6, 9, 10});
  CHECK(split_bounds(4, 2) == std::vector<Index>{0, 2, 4});
  CHECK(split_bounds(0, 3) == std::vector<Index>{0, 0, 0, 0});
  CHECK(split_bounds(5, 1) == std::vector<Index>{0, 5});
}

TEST_CASE("4x4 matrix on a 2x2 grid gives four 2x2 blocks") {
  std::mt19937_64 rng(31);
  auto a = random_matrix(rng, 4, 4, 0.5);
  auto d = distribute(a, make_grid_config(4));
  for (const auto& b : d.blocks) {
    CHECK(b.nrows() == 2);
    CHECK(b.ncols() == 2);
  }
  auto d1 = distribute(a, make_grid_config(1));
  CHECK(d1.blocks.at(0) == a);
}

TEST_CASE("distribute and gather round-trip") {
  std::mt19937_64 rng(32);
  for (int p : {1, 4, 9, 16}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto a = random_matrix(rng, 1 + static_cast<Index>(rng() % 40), 1 + static_cast<Index>(rng() % 40), 0.2);
      auto d = distribute(a, make_grid_config(p));
      CHECK(d.nnz() == a.nnz());
      CHECK(gather(d) == a);
    }
  }
}

TEST_CASE("distributed transpose matches the local transpose") {
  std::mt19937_64 rng(33);
  for (auto mode : kModes) {
    for (int p : {1, 4, 9, 16}) {
      Grid grid(p, {mode});
      auto a = random_matrix(rng, 1 + static_cast<Index>(rng() % 50), 1 + static_cast<Index>(rng() % 50), 0.2);
      auto t = distributed_transpose(grid, distribute(a, grid.config()));
      CHECK(gather(t) == local_transpose(a));
    }
  }
  SUBCASE("symmetric pattern is unchanged") {
    Grid grid(4);
    std::vector<Triplet<long long>> sym;
    for (Index i = 0; i < 9; ++i) {
      for (Index j = 0; j < 9; ++j) {
        if ((i * j) % 3 == 1) sym.push_back({i, j, 1});
      }
    }
    auto a = LocalSparse<long long>::from_triplets(9, 9, sym);
    CHECK(gather(distributed_transpose(grid, distribute(a, grid.config()))) == a);
  }
}

TEST_CASE("redistribute moves an arbitrary window") {
  std::mt19937_64 rng(34);
  Grid grid(9);
  auto a = random_matrix(rng, 31, 29, 0.3);
  auto d = distribute(a, grid.config());
  WindowLayout target{5, 7, split_bounds(20, 3), split_bounds(15, 3)};
  auto w = redistribute(grid, d, target);
  CHECK(gather(w) == extract(a, 5, 25, 7, 22));
}

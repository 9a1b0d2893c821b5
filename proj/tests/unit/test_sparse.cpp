#include <algorithm>
#include <random>

#include "doctest.h"
#include "pastis/error.hpp"
#include "pastis/sparse.hpp"
#include "support.hpp"

using namespace pastis;
using pastis::testing::dense_multiply;
using pastis::testing::random_matrix;
using pastis::testing::to_dense;

namespace {

// Counts contributions so permutations of accumulation order are observable
// only through the merged result.
struct Tally {
  long long count = 0;
  long long sum = 0;
  bool operator==(const Tally&) const = default;
};

Tally add_tally(const Tally& a, const Tally& b) { return {a.count + b.count, a.sum + b.sum}; }

}  // namespace

TEST_CASE("1x1 arithmetic product") {
  auto a = LocalSparse<long long>::from_triplets(1, 1, {{0, 0, 3}});
  auto b = LocalSparse<long long>::from_triplets(1, 1, {{0, 0, 7}});
  auto c = local_spgemm(a, b, ArithmeticSemiring<long long>{});
  CHECK(c.triplets() == std::vector<Triplet<long long>>{{0, 0, 21}});
}

TEST_CASE("empty column of B gives an empty column of C") {
  auto a = LocalSparse<long long>::from_triplets(2, 2, {{0, 0, 1}, {1, 1, 2}});
  auto b = LocalSparse<long long>::from_triplets(2, 3, {{0, 0, 1}, {1, 2, 5}});
  auto c = local_spgemm(a, b, ArithmeticSemiring<long long>{});
  CHECK_FALSE(c.find_column(1).has_value());
  CHECK(c.nnz() == 2);
}

TEST_CASE("dimension mismatch is reported") {
  LocalSparse<long long> a(2, 3), b(4, 2);
  CHECK_THROWS_AS(local_spgemm(a, b, ArithmeticSemiring<long long>{}), DimensionMismatch);
}

TEST_CASE("arithmetic SpGEMM equals the dense oracle on both accumulators") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Index n = 1 + static_cast<Index>(rng() % 40), k = 1 + static_cast<Index>(rng() % 40),
          m = 1 + static_cast<Index>(rng() % 40);
    auto a = random_matrix(rng, n, k, 0.15);
    auto b = random_matrix(rng, k, m, 0.15);
    auto expected = dense_multiply(to_dense(a), to_dense(b));
    for (Index threshold : {Index{0}, Index{1} << 16}) {
      SpgemmOptions opts;
      opts.dense_threshold = threshold;
      SpgemmStats stats;
      auto c = local_spgemm(a, b, ArithmeticSemiring<long long>{}, opts, &stats);
      c.check_invariants();
      CHECK(to_dense(c) == expected);
      CHECK(c.nnz() <= stats.flops);
    }
  }
}

TEST_CASE("boolean SpGEMM on 50x50 equals the dense boolean product") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    auto ai = random_matrix(rng, 50, 50, 0.05);
    auto bi = random_matrix(rng, 50, 50, 0.05);
    std::vector<Triplet<std::uint8_t>> at, bt;
    for (auto& t : ai.triplets()) at.push_back({t.row, t.col, 1});
    for (auto& t : bi.triplets()) bt.push_back({t.row, t.col, 1});
    auto a = LocalSparse<std::uint8_t>::from_triplets(50, 50, at);
    auto b = LocalSparse<std::uint8_t>::from_triplets(50, 50, bt);
    auto c = local_spgemm(a, b, BooleanSemiring{});
    auto d = dense_multiply(to_dense(ai), to_dense(bi));
    std::size_t expected_nnz = 0;
    for (Index i = 0; i < 50; ++i) {
      for (Index j = 0; j < 50; ++j) {
        bool want = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0;
        expected_nnz += want;
        auto col = c.find_column(j);
        bool got = false;
        if (col) {
          auto view = c.column_at(*col);
          got = std::binary_search(view.rows.begin(), view.rows.end(), i);
        }
        CHECK(got == want);
      }
    }
    CHECK(c.nnz() == expected_nnz);
  }
}

TEST_CASE("is_zero entries are dropped") {
  // (1)(1) + (1)(-1) cancels under arithmetic.
  auto a = LocalSparse<long long>::from_triplets(1, 2, {{0, 0, 1}, {0, 1, 1}});
  auto b = LocalSparse<long long>::from_triplets(2, 1, {{0, 0, 1}, {1, 0, -1}});
  CHECK(local_spgemm(a, b, ArithmeticSemiring<long long>{}).nnz() == 0);
}

TEST_CASE("multiply receives global indices through the offsets") {
  struct Recorder {
    using value_type = long long;
    long long multiply(long long, long long, Index i, Index j, Index k) const { return i * 10000 + j * 100 + k; }
    long long add(long long x, long long y) const { return std::min(x, y); }
    bool is_zero(long long) const { return false; }
  };
  auto a = LocalSparse<long long>::from_triplets(1, 1, {{0, 0, 1}});
  auto b = LocalSparse<long long>::from_triplets(1, 1, {{0, 0, 1}});
  SpgemmOptions opts;
  opts.offsets = {3, 5, 7};
  auto c = local_spgemm(a, b, Recorder{}, opts);
  CHECK(c.values()[0] == 3 * 10000 + 5 * 100 + 7);
}

TEST_CASE("transpose") {
  SUBCASE("identity pattern stays identity") {
    auto id = LocalSparse<long long>::from_triplets(3, 3, {{0, 0, 1}, {1, 1, 1}, {2, 2, 1}});
    CHECK(local_transpose(id) == id);
  }
  SUBCASE("single entry moves") {
    auto a = LocalSparse<long long>::from_triplets(4, 7, {{2, 5, 9}});
    auto t = local_transpose(a);
    CHECK(t.nrows() == 7);
    CHECK(t.ncols() == 4);
    CHECK(t.triplets() == std::vector<Triplet<long long>>{{5, 2, 9}});
  }
  SUBCASE("involution and remap on random inputs") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      auto a = random_matrix(rng, 1 + static_cast<Index>(rng() % 30), 1 + static_cast<Index>(rng() % 30), 0.2);
      CHECK(local_transpose(local_transpose(a)) == a);
      auto t = local_transpose(a, [](long long v) { return -v; });
      t.check_invariants();
      a.for_each([&](Index r, Index c, long long v) {
        auto col = t.find_column(r);
        REQUIRE(col.has_value());
        auto view = t.column_at(*col);
        auto it = std::lower_bound(view.rows.begin(), view.rows.end(), c);
        REQUIRE(it != view.rows.end());
        CHECK(view.values[static_cast<std::size_t>(it - view.rows.begin())] == -v);
      });
    }
  }
  SUBCASE("very tall input takes the sparse path") {
    auto a = LocalSparse<long long>::from_triplets(1'000'000, 3, {{999'999, 0, 1}, {5, 2, 2}});
    auto t = local_transpose(a);
    t.check_invariants();
    CHECK(t.triplets() == std::vector<Triplet<long long>>{{2, 5, 2}, {0, 999'999, 1}});
  }
}

TEST_CASE("merge_accumulate") {
  auto add = [](long long x, long long y) { return x + y; };
  SUBCASE("one part is unchanged") {
    std::vector<LocalSparse<long long>> parts{LocalSparse<long long>::from_triplets(2, 2, {{0, 1, 4}})};
    CHECK(merge_accumulate<long long>(std::span<const LocalSparse<long long>>(parts), add) == parts[0]);
  }
  SUBCASE("disjoint parts take the union") {
    std::vector<LocalSparse<long long>> parts{LocalSparse<long long>::from_triplets(2, 2, {{0, 1, 4}}),
                                              LocalSparse<long long>::from_triplets(2, 2, {{1, 0, 5}})};
    auto m = merge_accumulate<long long>(std::span<const LocalSparse<long long>>(parts), add);
    CHECK(m.nnz() == 2);
  }
  SUBCASE("mismatched dimensions throw") {
    std::vector<LocalSparse<long long>> parts{LocalSparse<long long>(2, 2), LocalSparse<long long>(2, 3)};
    CHECK_THROWS_AS(merge_accumulate<long long>(std::span<const LocalSparse<long long>>(parts), add),
                    DimensionMismatch);
  }
  SUBCASE("result is invariant under permutation of the parts") {
    std::mt19937_64 rng(14);
    std::vector<LocalSparse<Tally>> parts;
    for (int k = 0; k < 6; ++k) {
      auto base = random_matrix(rng, 25, 25, 0.2);
      std::vector<Triplet<Tally>> t;
      for (auto& e : base.triplets()) t.push_back({e.row, e.col, Tally{1, e.value}});
      parts.push_back(LocalSparse<Tally>::from_triplets(25, 25, t));
    }
    auto reference = serialize(merge_accumulate<Tally>(std::span<const LocalSparse<Tally>>(parts), add_tally));
    for (int trial = 0; trial < 10; ++trial) {
      std::shuffle(parts.begin(), parts.end(), rng);
      CHECK(serialize(merge_accumulate<Tally>(std::span<const LocalSparse<Tally>>(parts), add_tally)) == reference);
    }
  }
}

TEST_CASE("triplet construction") {
  CHECK_THROWS_AS(LocalSparse<long long>::from_triplets(2, 2, {{0, 0, 1}, {0, 0, 2}}), Error);
  CHECK_THROWS_AS(LocalSparse<long long>::from_triplets(2, 2, {{2, 0, 1}}), Error);
  auto summed = LocalSparse<long long>::from_triplets(2, 2, {{0, 0, 1}, {0, 0, 2}},
                                                      [](long long x, long long y) { return x + y; });
  CHECK(summed.values()[0] == 3);
  LocalSparse<long long>::Builder b(3, 3);
  b.push(1, 0, 1);
  CHECK_THROWS_AS(b.push(0, 0, 1), Error);
}

TEST_CASE("only non-empty columns are stored") {
  auto a = LocalSparse<long long>::from_triplets(2, 1'000'000'000, {{0, 5, 1}, {1, 999'999'999, 2}});
  CHECK(a.nonempty_cols() == 2);
  CHECK(a.col_ptr().size() == 3);
  a.check_invariants();
}

TEST_CASE("serialization round-trips") {
  std::mt19937_64 rng(15);
  auto a = random_matrix(rng, 17, 23, 0.3);
  auto bytes = serialize(a);
  CHECK(deserialize<long long>(bytes) == a);
  LocalSparse<long long> empty(4, 0);
  CHECK(deserialize<long long>(serialize(empty)) == empty);
  bytes.resize(bytes.size() - 1);
  CHECK_THROWS(deserialize<long long>(bytes));
}

TEST_CASE("extract and assemble are inverse on a tiling") {
  std::mt19937_64 rng(16);
  auto a = random_matrix(rng, 20, 30, 0.2);
  std::vector<PlacedBlock<long long>> pieces;
  for (Index r0 : {Index{0}, Index{7}}) {
    for (Index c0 : {Index{0}, Index{11}, Index{12}}) {
      Index r1 = r0 == 0 ? 7 : 20;
      Index c1 = c0 == 0 ? 11 : (c0 == 11 ? 12 : 30);
      pieces.push_back({r0, c0, extract(a, r0, r1, c0, c1)});
    }
  }
  CHECK(assemble<long long>(20, 30, pieces) == a);
}

TEST_CASE("coordinate dump is sorted by column then row") {
  auto a = LocalSparse<long long>::from_triplets(3, 3, {{2, 0, 5}, {0, 1, 6}, {1, 0, 7}});
  CHECK(to_coo_text(a) == "1\t0\t7\n2\t0\t5\n0\t1\t6\n");
}

#pragma once

// Plain and blocked 2D Sparse SUMMA on the virtual grid.
//
// The output C = A * B is formed in br x bc blocks. Block C(r, c) needs only
// row stripe A(r, *) and column stripe B(*, c); each stripe is itself
// distributed over the full grid, so every block runs q broadcast stages.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pastis/dist_matrix.hpp"
#include "pastis/error.hpp"
#include "pastis/grid.hpp"
#include "pastis/sparse.hpp"

namespace pastis {

struct BlockingFactor {
  int br = 1;
  int bc = 1;

  int blocks() const noexcept { return br * bc; }
  void validate() const {
    if (br < 1 || bc < 1) throw ConfigError("blocking factors must be >= 1");
  }
  bool operator==(const BlockingFactor&) const = default;
};

struct BlockId {
  int r = 0;
  int c = 0;

  bool operator==(const BlockId&) const = default;
  std::string str() const { return "(" + std::to_string(r) + "," + std::to_string(c) + ")"; }
};

template <class EA, class EB>
struct Stripes {
  BlockingFactor bf;
  std::vector<Index> row_stripe_bounds;  // br + 1 bounds over rows of A
  std::vector<Index> col_stripe_bounds;  // bc + 1 bounds over columns of B
  std::vector<DistMatrix<EA>> a_rows;
  std::vector<DistMatrix<EB>> b_cols;
};

/// Splits A into br row stripes and B into bc column stripes, each
/// redistributed over the whole grid.
template <class EA, class EB>
Stripes<EA, EB> stripe_inputs(Grid& grid, const DistMatrix<EA>& a, const DistMatrix<EB>& b,
                              BlockingFactor bf) {
  bf.validate();
  if (a.ncols != b.nrows) {
    throw DimensionMismatch("stripe_inputs: A has " + std::to_string(a.ncols) +
                            " columns but B has " + std::to_string(b.nrows) + " rows");
  }
  if (a.col_bounds != b.row_bounds) {
    throw DimensionMismatch("stripe_inputs: inner dimension split differs between A and B");
  }
  const int q = grid.config().q;
  Stripes<EA, EB> s;
  s.bf = bf;
  s.row_stripe_bounds = split_bounds(a.nrows, bf.br);
  s.col_stripe_bounds = split_bounds(b.ncols, bf.bc);
  for (int r = 0; r < bf.br; ++r) {
    Index lo = s.row_stripe_bounds[static_cast<std::size_t>(r)];
    Index hi = s.row_stripe_bounds[static_cast<std::size_t>(r) + 1];
    s.a_rows.push_back(redistribute(grid, a, WindowLayout{lo, 0, split_bounds(hi - lo, q), a.col_bounds}));
  }
  for (int c = 0; c < bf.bc; ++c) {
    Index lo = s.col_stripe_bounds[static_cast<std::size_t>(c)];
    Index hi = s.col_stripe_bounds[static_cast<std::size_t>(c) + 1];
    s.b_cols.push_back(redistribute(grid, b, WindowLayout{0, lo, b.row_bounds, split_bounds(hi - lo, q)}));
  }
  return s;
}

template <class C>
struct ComputedBlock {
  BlockId id;
  Index row0 = 0;  // global offset of the block's first row
  Index col0 = 0;
  DistMatrix<C> matrix;                 // block-local coordinates
  std::vector<double> spgemm_seconds;   // per rank, local multiplies only
  std::vector<double> merge_seconds;    // per rank, partial-result merging
  std::vector<std::uint64_t> flops;     // per rank
  double wall_seconds = 0.0;

  std::uint64_t total_flops() const {
    std::uint64_t f = 0;
    for (auto v : flops) f += v;
    return f;
  }
};

/// Computes C(r, c) in q stages: at stage t, grid column t broadcasts its
/// A(r, *) pieces along rows and grid row t broadcasts its B(*, c) pieces
/// along columns; each worker multiplies and accumulates locally.
template <class EA, class EB, class S>
  requires SemiringFor<S, EA, EB>
ComputedBlock<typename S::value_type> summa_block(Grid& grid, const Stripes<EA, EB>& stripes,
                                                  BlockId id, const S& sr,
                                                  const SpgemmOptions& opts = {}) {
  using C = typename S::value_type;
  using Clock = std::chrono::steady_clock;
  if (id.r < 0 || id.r >= stripes.bf.br || id.c < 0 || id.c >= stripes.bf.bc) {
    throw ConfigError("block " + id.str() + " outside the blocking factor");
  }
  const auto& as = stripes.a_rows[static_cast<std::size_t>(id.r)];
  const auto& bs = stripes.b_cols[static_cast<std::size_t>(id.c)];
  const int q = grid.config().q;
  const auto p = static_cast<std::size_t>(grid.config().p);

  ComputedBlock<C> out;
  out.id = id;
  out.row0 = stripes.row_stripe_bounds[static_cast<std::size_t>(id.r)];
  out.col0 = stripes.col_stripe_bounds[static_cast<std::size_t>(id.c)];
  out.matrix.nrows = as.nrows;
  out.matrix.ncols = bs.ncols;
  out.matrix.q = q;
  out.matrix.row_bounds = as.row_bounds;
  out.matrix.col_bounds = bs.col_bounds;
  out.matrix.blocks.resize(p);
  out.spgemm_seconds.assign(p, 0.0);
  out.merge_seconds.assign(p, 0.0);
  out.flops.assign(p, 0);

  auto start = Clock::now();
  grid.run([&](Worker& w) {
    const int x = w.row();
    const int y = w.col();
    const auto rank = static_cast<std::size_t>(w.rank());
    Index local_rows = as.row_bounds[static_cast<std::size_t>(x) + 1] - as.row_bounds[static_cast<std::size_t>(x)];
    Index local_cols = bs.col_bounds[static_cast<std::size_t>(y) + 1] - bs.col_bounds[static_cast<std::size_t>(y)];
    std::vector<LocalSparse<C>> parts;
    parts.reserve(static_cast<std::size_t>(q));
    SpgemmStats stats;
    for (int t = 0; t < q; ++t) {
      Message a_msg = w.broadcast_row(t, y == t ? serialize(as.block(x, t)) : Message{});
      Message b_msg = w.broadcast_col(t, x == t ? serialize(bs.block(t, y)) : Message{});
      auto a = deserialize<EA>(a_msg);
      auto b = deserialize<EB>(b_msg);
      SpgemmOptions stage = opts;
      stage.offsets = {out.row0 + as.row_bounds[static_cast<std::size_t>(x)],
                       out.col0 + bs.col_bounds[static_cast<std::size_t>(y)],
                       as.col_bounds[static_cast<std::size_t>(t)]};
      auto t0 = Clock::now();
      parts.push_back(w.compute([&] { return local_spgemm(a, b, sr, stage, &stats); }));
      out.spgemm_seconds[rank] += std::chrono::duration<double>(Clock::now() - t0).count();
    }
    auto t0 = Clock::now();
    if (parts.empty()) {
      out.matrix.blocks[rank] = LocalSparse<C>(local_rows, local_cols);
    } else {
      out.matrix.blocks[rank] = merge_accumulate<C>(
          std::span<const LocalSparse<C>>(parts), [&sr](const C& u, const C& v) { return sr.add(u, v); });
    }
    out.merge_seconds[rank] = std::chrono::duration<double>(Clock::now() - t0).count();
    out.flops[rank] = stats.flops;
  });
  out.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

/// Yields the blocks of `order` one at a time; nothing is computed ahead of
/// a call to next().
template <class EA, class EB, class S>
  requires SemiringFor<S, EA, EB>
class BlockedSumma {
 public:
  using Block = ComputedBlock<typename S::value_type>;

  BlockedSumma(Grid& grid, const Stripes<EA, EB>& stripes, std::vector<BlockId> order, S sr,
               SpgemmOptions opts = {})
      : grid_(&grid), stripes_(&stripes), order_(std::move(order)), sr_(std::move(sr)), opts_(opts) {}

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t remaining() const noexcept { return order_.size() - cursor_; }

  std::optional<Block> next() {
    if (cursor_ == order_.size()) return std::nullopt;
    return summa_block(*grid_, *stripes_, order_[cursor_++], sr_, opts_);
  }

 private:
  Grid* grid_;
  const Stripes<EA, EB>* stripes_;
  std::vector<BlockId> order_;
  S sr_;
  SpgemmOptions opts_;
  std::size_t cursor_ = 0;
};

/// Gathers the blocks of a full blocked run into one global matrix.
template <class C, class Add>
LocalSparse<C> assemble_blocks(Index nrows, Index ncols, std::span<const ComputedBlock<C>> blocks,
                               Add&& add) {
  std::vector<Triplet<C>> all;
  for (const auto& b : blocks) {
    auto local = gather(b.matrix);
    local.for_each([&](Index r, Index c, const C& v) { all.push_back({r + b.row0, c + b.col0, v}); });
  }
  return LocalSparse<C>::from_triplets(nrows, ncols, std::move(all), add);
}

}  // namespace pastis

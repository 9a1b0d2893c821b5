#pragma once

// 2D-distributed sparse matrices on a Grid.

#include <algorithm>
#include <span>
#include <vector>

#include "pastis/error.hpp"
#include "pastis/grid.hpp"
#include "pastis/sparse.hpp"

namespace pastis {

/// Splits [0, n) into `parts` ranges of ceil(n / parts); the last range takes
/// the remainder and trailing ranges may be empty. Returns parts + 1 bounds.
inline std::vector<Index> split_bounds(Index n, int parts) {
  if (parts < 1) throw ConfigError("split_bounds: parts must be >= 1");
  Index chunk = (n + parts - 1) / parts;
  std::vector<Index> bounds(static_cast<std::size_t>(parts) + 1);
  for (int i = 0; i < parts; ++i) bounds[static_cast<std::size_t>(i)] = std::min(n, i * chunk);
  bounds.back() = n;
  return bounds;
}

/// Worker (r, c) owns rows [row_bounds[r], row_bounds[r+1]) and columns
/// [col_bounds[c], col_bounds[c+1]) in local coordinates of its block.
template <class E>
struct DistMatrix {
  Index nrows = 0;
  Index ncols = 0;
  int q = 1;
  std::vector<Index> row_bounds;
  std::vector<Index> col_bounds;
  std::vector<LocalSparse<E>> blocks;  // indexed by rank, row-major

  const LocalSparse<E>& block(int grid_row, int grid_col) const {
    return blocks[static_cast<std::size_t>(grid_row * q + grid_col)];
  }
  LocalSparse<E>& block(int grid_row, int grid_col) {
    return blocks[static_cast<std::size_t>(grid_row * q + grid_col)];
  }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.nnz();
    return n;
  }

  /// Empty matrix of the given shape with the standard layout.
  static DistMatrix layout(Index nrows, Index ncols, int q) {
    DistMatrix d;
    d.nrows = nrows;
    d.ncols = ncols;
    d.q = q;
    d.row_bounds = split_bounds(nrows, q);
    d.col_bounds = split_bounds(ncols, q);
    d.blocks.resize(static_cast<std::size_t>(q) * static_cast<std::size_t>(q));
    for (int r = 0; r < q; ++r) {
      for (int c = 0; c < q; ++c) {
        d.block(r, c) = LocalSparse<E>(d.row_bounds[static_cast<std::size_t>(r) + 1] -
                                           d.row_bounds[static_cast<std::size_t>(r)],
                                       d.col_bounds[static_cast<std::size_t>(c) + 1] -
                                           d.col_bounds[static_cast<std::size_t>(c)]);
      }
    }
    return d;
  }
};

/// Partitions a matrix held by the driver onto the grid layout.
template <class E>
DistMatrix<E> distribute(const LocalSparse<E>& a, const GridConfig& cfg) {
  auto d = DistMatrix<E>::layout(a.nrows(), a.ncols(), cfg.q);
  for (int r = 0; r < cfg.q; ++r) {
    for (int c = 0; c < cfg.q; ++c) {
      d.block(r, c) = extract(a, d.row_bounds[static_cast<std::size_t>(r)],
                              d.row_bounds[static_cast<std::size_t>(r) + 1],
                              d.col_bounds[static_cast<std::size_t>(c)],
                              d.col_bounds[static_cast<std::size_t>(c) + 1]);
    }
  }
  return d;
}

template <class E>
LocalSparse<E> gather(const DistMatrix<E>& d) {
  std::vector<PlacedBlock<E>> pieces;
  pieces.reserve(d.blocks.size());
  for (int r = 0; r < d.q; ++r) {
    for (int c = 0; c < d.q; ++c) {
      pieces.push_back({d.row_bounds[static_cast<std::size_t>(r)],
                        d.col_bounds[static_cast<std::size_t>(c)], d.block(r, c)});
    }
  }
  return assemble<E>(d.nrows, d.ncols, pieces);
}

/// B = A^T on the same grid: worker (r, c) receives the block held by (c, r)
/// and transposes it locally with `remap`.
template <class E, class Remap>
DistMatrix<E> distributed_transpose(Grid& grid, const DistMatrix<E>& a, Remap remap) {
  const auto& cfg = grid.config();
  if (a.q != cfg.q) throw DimensionMismatch("distributed_transpose: grid size mismatch");
  DistMatrix<E> out;
  out.nrows = a.ncols;
  out.ncols = a.nrows;
  out.q = a.q;
  out.row_bounds = a.col_bounds;
  out.col_bounds = a.row_bounds;
  out.blocks.resize(a.blocks.size());

  grid.run([&](Worker& w) {
    const int r = w.row();
    const int c = w.col();
    const int partner = cfg.rank_of(c, r);
    if (partner == w.rank()) {
      out.block(r, c) = local_transpose(a.block(r, c), remap);
      return;
    }
    w.send(partner, serialize(a.block(r, c)));
    Message incoming = w.receive(partner);
    auto mine = deserialize<E>(incoming);
    out.block(r, c) = local_transpose(mine, remap);
  });
  return out;
}

template <class E>
DistMatrix<E> distributed_transpose(Grid& grid, const DistMatrix<E>& a) {
  return distributed_transpose(grid, a, [](const E& e) { return e; });
}

/// Target layout for redistribute: the global window [row0, row0+nrows) x
/// [col0, col0+ncols) split by the given bounds.
struct WindowLayout {
  Index row0 = 0;
  Index col0 = 0;
  std::vector<Index> row_bounds;
  std::vector<Index> col_bounds;
};

/// Moves the part of `src` that falls inside `target`'s window into a new
/// distributed matrix with that layout. Each worker exchanges pieces only with
/// workers whose rectangles intersect its own.
template <class E>
DistMatrix<E> redistribute(Grid& grid, const DistMatrix<E>& src, const WindowLayout& target) {
  const auto& cfg = grid.config();
  const int q = cfg.q;
  DistMatrix<E> out;
  out.q = q;
  out.row_bounds = target.row_bounds;
  out.col_bounds = target.col_bounds;
  out.nrows = target.row_bounds.back();
  out.ncols = target.col_bounds.back();
  out.blocks.resize(src.blocks.size());

  struct Rect {
    Index r0, r1, c0, c1;
  };
  auto src_rect = [&](int r, int c) {
    return Rect{src.row_bounds[static_cast<std::size_t>(r)], src.row_bounds[static_cast<std::size_t>(r) + 1],
                src.col_bounds[static_cast<std::size_t>(c)], src.col_bounds[static_cast<std::size_t>(c) + 1]};
  };
  auto dst_rect = [&](int r, int c) {
    return Rect{target.row0 + target.row_bounds[static_cast<std::size_t>(r)],
                target.row0 + target.row_bounds[static_cast<std::size_t>(r) + 1],
                target.col0 + target.col_bounds[static_cast<std::size_t>(c)],
                target.col0 + target.col_bounds[static_cast<std::size_t>(c) + 1]};
  };
  auto intersect = [](const Rect& a, const Rect& b, Rect& o) {
    o = {std::max(a.r0, b.r0), std::min(a.r1, b.r1), std::max(a.c0, b.c0), std::min(a.c1, b.c1)};
    return o.r0 < o.r1 && o.c0 < o.c1;
  };

  grid.run([&](Worker& w) {
    const Rect mine_src = src_rect(w.row(), w.col());
    const Rect mine_dst = dst_rect(w.row(), w.col());
    const auto& local = src.block(w.row(), w.col());
    for (int rank = 0; rank < cfg.p; ++rank) {
      Rect o;
      if (!intersect(mine_src, dst_rect(cfg.row_of(rank), cfg.col_of(rank)), o)) continue;
      auto piece = extract(local, o.r0 - mine_src.r0, o.r1 - mine_src.r0, o.c0 - mine_src.c0,
                           o.c1 - mine_src.c0);
      w.send(rank, serialize(piece));
    }
    std::vector<PlacedBlock<E>> pieces;
    for (int rank = 0; rank < cfg.p; ++rank) {
      Rect o;
      if (!intersect(src_rect(cfg.row_of(rank), cfg.col_of(rank)), mine_dst, o)) continue;
      pieces.push_back({o.r0 - mine_dst.r0, o.c0 - mine_dst.c0, deserialize<E>(w.receive(rank))});
    }
    out.block(w.row(), w.col()) =
        assemble<E>(mine_dst.r1 - mine_dst.r0, mine_dst.c1 - mine_dst.c0, pieces);
  });
  return out;
}

}  // namespace pastis

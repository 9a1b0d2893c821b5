#pragma once

// Symmetry exploitation for the overlap matrix C = A * A^T. Each unordered
// sequence pair must survive pruning exactly once.

#include <string>
#include <string_view>
#include <vector>

#include "pastis/sparse.hpp"
#include "pastis/summa.hpp"

namespace pastis {

enum class BalanceScheme { index, triangularity };
enum class BlockClass { full, partial, avoidable, all };

std::string_view to_string(BalanceScheme s) noexcept;
std::string_view to_string(BlockClass c) noexcept;
/// Accepts "index", "triangularity" and "triangular".
BalanceScheme parse_scheme(std::string_view name);

struct PlannedBlock {
  BlockId id;
  BlockClass cls = BlockClass::all;
};

struct BlockPlan {
  BalanceScheme scheme = BalanceScheme::index;
  BlockingFactor bf;
  std::vector<PlannedBlock> entries;  // row-major over (r, c)

  std::vector<BlockId> order() const;
};

/// Triangularity classification of block (r, c) under square b x b blocking:
/// above the diagonal is full, on it partial, below it avoidable.
BlockClass classify_block(BlockId id, int b);

/// Row-major plan. The triangularity scheme drops avoidable blocks and
/// requires square blocking.
BlockPlan make_plan(BalanceScheme scheme, BlockingFactor bf);

/// Index-based parity rule on global ids: no self pairs; below the diagonal
/// keep equal parities, above it keep differing parities.
constexpr bool index_rule_keeps(Index i, Index j) noexcept {
  if (i == j) return false;
  bool same = (i % 2) == (j % 2);
  return i > j ? same : !same;
}

/// Triangularity rule for one entry of a block of the given class.
constexpr bool triangular_rule_keeps(BlockClass cls, Index i, Index j) noexcept {
  switch (cls) {
    case BlockClass::full:
      return i != j;
    case BlockClass::partial:
      return i < j;
    default:
      return false;
  }
}

/// `row0`/`col0` are the global ids of the block's first row and column.
template <class E>
LocalSparse<E> prune_triangularity(const LocalSparse<E>& block, BlockClass cls, Index row0, Index col0) {
  if (cls != BlockClass::full && cls != BlockClass::partial) {
    throw ConfigError("prune_triangularity: only full or partial blocks are computed");
  }
  return filter_entries(block, [&](Index r, Index c, const E&) {
    return triangular_rule_keeps(cls, r + row0, c + col0);
  });
}

template <class E>
LocalSparse<E> prune_index(const LocalSparse<E>& block, Index row0, Index col0) {
  return filter_entries(block, [&](Index r, Index c, const E&) {
    return index_rule_keeps(r + row0, c + col0);
  });
}

/// Dispatches on the planned class.
template <class E>
LocalSparse<E> prune_block(const LocalSparse<E>& block, BlockClass cls, Index row0, Index col0) {
  if (cls == BlockClass::all) return prune_index(block, row0, col0);
  return prune_triangularity(block, cls, row0, col0);
}

}  // namespace pastis

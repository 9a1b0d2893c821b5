#pragma once

// Sparse matrices over arbitrary payloads and the semiring SpGEMM kernel.
//
// Storage is compressed by column. Only non-empty columns carry an offset
// entry (col_ids_ lists them in increasing order), so a 1000 x 25^6 k-mer
// matrix costs memory proportional to its nonzeros rather than its width.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pastis/error.hpp"

namespace pastis {

using Index = std::int64_t;

template <class E>
struct Triplet {
  Index row = 0;
  Index col = 0;
  E value{};

  bool operator==(const Triplet&) const = default;
};

template <class E>
class LocalSparse {
 public:
  using value_type = E;

  struct ColumnView {
    Index col;
    std::span<const Index> rows;
    std::span<const E> values;
  };

  LocalSparse() = default;
  LocalSparse(Index nrows, Index ncols) : nrows_(nrows), ncols_(ncols), col_ptr_{0} {
    if (nrows < 0 || ncols < 0) throw DimensionMismatch("negative matrix dimension");
  }

  Index nrows() const noexcept { return nrows_; }
  Index ncols() const noexcept { return ncols_; }
  std::size_t nnz() const noexcept { return row_idx_.size(); }
  bool empty() const noexcept { return row_idx_.empty(); }
  std::size_t nonempty_cols() const noexcept { return col_ids_.size(); }

  std::span<const Index> col_ids() const noexcept { return col_ids_; }
  std::span<const std::size_t> col_ptr() const noexcept { return col_ptr_; }
  std::span<const Index> row_idx() const noexcept { return row_idx_; }
  std::span<const E> values() const noexcept { return vals_; }

  ColumnView column_at(std::size_t slot) const {
    auto b = col_ptr_[slot];
    auto e = col_ptr_[slot + 1];
    return {col_ids_[slot], std::span<const Index>(row_idx_).subspan(b, e - b),
            std::span<const E>(vals_).subspan(b, e - b)};
  }

  /// Storage slot of column `col`, if it holds any entry.
  std::optional<std::size_t> find_column(Index col) const {
    auto it = std::lower_bound(col_ids_.begin(), col_ids_.end(), col);
    if (it == col_ids_.end() || *it != col) return std::nullopt;
    return static_cast<std::size_t>(it - col_ids_.begin());
  }

  /// Visits entries in (col, row) order.
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t s = 0; s < col_ids_.size(); ++s) {
      for (auto k = col_ptr_[s]; k < col_ptr_[s + 1]; ++k) f(row_idx_[k], col_ids_[s], vals_[k]);
    }
  }

  std::vector<Triplet<E>> triplets() const {
    std::vector<Triplet<E>> out;
    out.reserve(nnz());
    for_each([&](Index r, Index c, const E& v) { out.push_back({r, c, v}); });
    return out;
  }

  /// Throws Error if any structural invariant is broken.
  void check_invariants() const {
    if (col_ptr_.size() != col_ids_.size() + 1) throw Error("column offset count mismatch");
    if (col_ptr_.front() != 0 || col_ptr_.back() != row_idx_.size()) {
      throw Error("column offsets do not span the entries");
    }
    if (vals_.size() != row_idx_.size()) throw Error("payload count mismatch");
    for (std::size_t s = 0; s < col_ids_.size(); ++s) {
      if (col_ids_[s] < 0 || col_ids_[s] >= ncols_) throw Error("column index out of range");
      if (s > 0 && col_ids_[s] <= col_ids_[s - 1]) throw Error("column ids not increasing");
      if (col_ptr_[s + 1] <= col_ptr_[s]) throw Error("stored column is empty");
      for (auto k = col_ptr_[s]; k < col_ptr_[s + 1]; ++k) {
        if (row_idx_[k] < 0 || row_idx_[k] >= nrows_) throw Error("row index out of range");
        if (k > col_ptr_[s] && row_idx_[k] <= row_idx_[k - 1]) {
          throw Error("row indices not strictly increasing within a column");
        }
      }
    }
  }

  bool operator==(const LocalSparse& o) const
    requires std::equality_comparable<E>
  {
    return nrows_ == o.nrows_ && ncols_ == o.ncols_ && col_ids_ == o.col_ids_ &&
           col_ptr_ == o.col_ptr_ && row_idx_ == o.row_idx_ && vals_ == o.vals_;
  }

  /// Appends entries in strictly increasing (col, row) order.
  class Builder {
   public:
    Builder(Index nrows, Index ncols) : m_(nrows, ncols) {}

    void reserve(std::size_t nnz) {
      m_.row_idx_.reserve(nnz);
      m_.vals_.reserve(nnz);
    }

    void push(Index row, Index col, E value) {
      if (row < 0 || row >= m_.nrows_ || col < 0 || col >= m_.ncols_) {
        throw DimensionMismatch("entry (" + std::to_string(row) + "," + std::to_string(col) +
                                ") outside " + std::to_string(m_.nrows_) + "x" +
                                std::to_string(m_.ncols_));
      }
      if (m_.col_ids_.empty() || col > m_.col_ids_.back()) {
        if (!m_.col_ids_.empty()) m_.col_ptr_.push_back(m_.row_idx_.size());
        m_.col_ids_.push_back(col);
      } else if (col < m_.col_ids_.back() || row <= m_.row_idx_.back()) {
        throw Error("builder entries must arrive in increasing (col,row) order");
      }
      m_.row_idx_.push_back(row);
      m_.vals_.push_back(std::move(value));
    }

    LocalSparse finish() && {
      if (!m_.col_ids_.empty()) m_.col_ptr_.push_back(m_.row_idx_.size());
      return std::move(m_);
    }

   private:
    LocalSparse m_;
  };

  /// Builds from unordered triplets; duplicates are folded with `combine` in
  /// input order.
  template <class Combine>
  static LocalSparse from_triplets(Index nrows, Index ncols, std::vector<Triplet<E>> entries,
                                   Combine&& combine) {
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    Builder builder(nrows, ncols);
    builder.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size();) {
      E acc = std::move(entries[k].value);
      std::size_t next = k + 1;
      while (next < entries.size() && entries[next].row == entries[k].row &&
             entries[next].col == entries[k].col) {
        acc = combine(acc, entries[next].value);
        ++next;
      }
      builder.push(entries[k].row, entries[k].col, std::move(acc));
      k = next;
    }
    return std::move(builder).finish();
  }

  /// Builds from triplets that must not contain duplicate coordinates.
  static LocalSparse from_triplets(Index nrows, Index ncols, std::vector<Triplet<E>> entries) {
    return from_triplets(nrows, ncols, std::move(entries), [](const E&, const E&) -> E {
      throw Error("duplicate coordinate in triplet list");
    });
  }

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> col_ids_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<Index> row_idx_;
  std::vector<E> vals_;
};

// ---------------------------------------------------------------------------
// Semirings

/// multiply(a, b, row, col, inner) -> C, add(C, C) -> C, is_zero(C) -> bool.
/// Index arguments are global coordinates of the output entry and the
/// contracted dimension.
template <class S, class A, class B>
concept SemiringFor = requires(const S& s, const A& a, const B& b,
                               const typename S::value_type& c, Index i) {
  typename S::value_type;
  { s.multiply(a, b, i, i, i) } -> std::convertible_to<typename S::value_type>;
  { s.add(c, c) } -> std::convertible_to<typename S::value_type>;
  { s.is_zero(c) } -> std::convertible_to<bool>;
};

template <class T>
struct ArithmeticSemiring {
  using value_type = T;
  T multiply(const T& a, const T& b, Index, Index, Index) const { return a * b; }
  T add(const T& a, const T& b) const { return a + b; }
  bool is_zero(const T& c) const { return c == T{}; }
};

/// (AND, OR) over 0/1 bytes; std::vector<bool> cannot back a payload span.
struct BooleanSemiring {
  using value_type = std::uint8_t;
  std::uint8_t multiply(std::uint8_t a, std::uint8_t b, Index, Index, Index) const {
    return (a && b) ? 1 : 0;
  }
  std::uint8_t add(std::uint8_t a, std::uint8_t b) const { return (a || b) ? 1 : 0; }
  bool is_zero(std::uint8_t c) const { return c == 0; }
};

// ---------------------------------------------------------------------------
// Kernels

struct IndexOffsets {
  Index row = 0;
  Index col = 0;
  Index inner = 0;
};

struct SpgemmOptions {
  IndexOffsets offsets{};
  // Output columns with at most this many rows use a dense accumulator;
  // taller ones use a hash accumulator.
  Index dense_threshold = Index{1} << 16;
};

struct SpgemmStats {
  std::uint64_t flops = 0;  // multiply invocations
};

namespace detail {

template <class C>
class DenseAccumulator {
 public:
  explicit DenseAccumulator(Index nrows)
      : vals_(static_cast<std::size_t>(nrows)), occupied_(static_cast<std::size_t>(nrows), 0) {}

  template <class Add>
  void accumulate(Index row, C&& value, const Add& add) {
    auto r = static_cast<std::size_t>(row);
    if (occupied_[r]) {
      vals_[r] = add(vals_[r], value);
    } else {
      occupied_[r] = 1;
      vals_[r] = std::move(value);
      touched_.push_back(row);
    }
  }

  template <class Emit>
  void drain(Emit&& emit) {
    std::sort(touched_.begin(), touched_.end());
    for (Index row : touched_) {
      auto r = static_cast<std::size_t>(row);
      emit(row, std::move(vals_[r]));
      occupied_[r] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<C> vals_;
  std::vector<std::uint8_t> occupied_;
  std::vector<Index> touched_;
};

template <class C>
class HashAccumulator {
 public:
  template <class Add>
  void accumulate(Index row, C&& value, const Add& add) {
    auto [it, inserted] = map_.try_emplace(row, std::move(value));
    if (!inserted) it->second = add(it->second, value);
  }

  template <class Emit>
  void drain(Emit&& emit) {
    keys_.clear();
    keys_.reserve(map_.size());
    for (const auto& kv : map_) keys_.push_back(kv.first);
    std::sort(keys_.begin(), keys_.end());
    for (Index row : keys_) emit(row, std::move(map_.at(row)));
    map_.clear();
  }

 private:
  std::unordered_map<Index, C> map_;
  std::vector<Index> keys_;
};

template <class A, class B, class S, class Acc>
LocalSparse<typename S::value_type> spgemm_with(const LocalSparse<A>& a, const LocalSparse<B>& b,
                                                const S& sr, const IndexOffsets& off, Acc& acc,
                                                SpgemmStats* stats) {
  using C = typename S::value_type;
  typename LocalSparse<C>::Builder out(a.nrows(), b.ncols());
  auto add = [&sr](const C& x, const C& y) { return sr.add(x, y); };
  std::uint64_t flops = 0;
  for (std::size_t bs = 0; bs < b.nonempty_cols(); ++bs) {
    auto bcol = b.column_at(bs);
    for (std::size_t bk = 0; bk < bcol.rows.size(); ++bk) {
      Index inner = bcol.rows[bk];
      auto as = a.find_column(inner);
      if (!as) continue;
      auto acol = a.column_at(*as);
      for (std::size_t ak = 0; ak < acol.rows.size(); ++ak) {
        Index row = acol.rows[ak];
        acc.accumulate(row,
                       C(sr.multiply(acol.values[ak], bcol.values[bk], row + off.row,
                                     bcol.col + off.col, inner + off.inner)),
                       add);
        ++flops;
      }
    }
    acc.drain([&](Index row, C&& value) {
      if (!sr.is_zero(value)) out.push(row, bcol.col, std::move(value));
    });
  }
  if (stats) stats->flops += flops;
  return std::move(out).finish();
}

}  // namespace detail

/// C = A * B under the semiring `sr`, accumulated per output column.
template <class A, class B, class S>
  requires SemiringFor<S, A, B>
LocalSparse<typename S::value_type> local_spgemm(const LocalSparse<A>& a, const LocalSparse<B>& b,
                                                 const S& sr, const SpgemmOptions& opts = {},
                                                 SpgemmStats* stats = nullptr) {
  if (a.ncols() != b.nrows()) {
    throw DimensionMismatch("spgemm: A is " + std::to_string(a.nrows()) + "x" +
                            std::to_string(a.ncols()) + " but B is " + std::to_string(b.nrows()) +
                            "x" + std::to_string(b.ncols()));
  }
  using C = typename S::value_type;
  if (a.nrows() <= opts.dense_threshold) {
    detail::DenseAccumulator<C> acc(a.nrows());
    return detail::spgemm_with(a, b, sr, opts.offsets, acc, stats);
  }
  detail::HashAccumulator<C> acc;
  return detail::spgemm_with(a, b, sr, opts.offsets, acc, stats);
}

/// (i, j) -> e becomes (j, i) -> remap(e).
template <class E, class Remap>
LocalSparse<E> local_transpose(const LocalSparse<E>& a, Remap&& remap) {
  // Counting sort by row: walking columns in order keeps rows sorted per
  // output column.
  std::vector<std::size_t> counts(static_cast<std::size_t>(a.nrows()) + 1, 0);
  for (Index r : a.row_idx()) ++counts[static_cast<std::size_t>(r) + 1];
  if (a.nrows() > static_cast<Index>(4 * a.nnz() + 1024)) {
    // Tall, very sparse input: sort triplets instead of a dense histogram.
    auto t = a.triplets();
    std::vector<Triplet<E>> swapped;
    swapped.reserve(t.size());
    for (auto& e : t) swapped.push_back({e.col, e.row, remap(e.value)});
    return LocalSparse<E>::from_triplets(a.ncols(), a.nrows(), std::move(swapped));
  }
  for (std::size_t r = 1; r < counts.size(); ++r) counts[r] += counts[r - 1];
  std::vector<Triplet<E>> bucketed(a.nnz());
  auto cursor = counts;
  a.for_each([&](Index r, Index c, const E& v) {
    bucketed[cursor[static_cast<std::size_t>(r)]++] = {c, r, remap(v)};
  });
  typename LocalSparse<E>::Builder out(a.ncols(), a.nrows());
  out.reserve(bucketed.size());
  for (auto& e : bucketed) out.push(e.row, e.col, std::move(e.value));
  return std::move(out).finish();
}

template <class E>
LocalSparse<E> local_transpose(const LocalSparse<E>& a) {
  return local_transpose(a, [](const E& e) { return e; });
}

/// Element-wise union of equally sized parts; coincident entries are folded
/// with `add`. Order-independent whenever `add` is commutative and associative.
template <class E, class Add>
LocalSparse<E> merge_accumulate(std::span<const LocalSparse<E>> parts, Add&& add) {
  if (parts.empty()) throw DimensionMismatch("merge_accumulate: no parts");
  Index nrows = parts.front().nrows();
  Index ncols = parts.front().ncols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.nrows() != nrows || p.ncols() != ncols) {
      throw DimensionMismatch("merge_accumulate: parts differ in dimensions");
    }
    total += p.nnz();
  }
  if (parts.size() == 1) return parts.front();
  std::vector<Triplet<E>> all;
  all.reserve(total);
  for (const auto& p : parts) p.for_each([&](Index r, Index c, const E& v) { all.push_back({r, c, v}); });
  return LocalSparse<E>::from_triplets(nrows, ncols, std::move(all), add);
}

/// Keeps entries for which pred(row, col, value) holds.
template <class E, class Pred>
LocalSparse<E> filter_entries(const LocalSparse<E>& a, Pred&& pred) {
  typename LocalSparse<E>::Builder out(a.nrows(), a.ncols());
  a.for_each([&](Index r, Index c, const E& v) {
    if (pred(r, c, v)) out.push(r, c, v);
  });
  return std::move(out).finish();
}

/// Sub-matrix [r0,r1) x [c0,c1) re-indexed to local coordinates.
template <class E>
LocalSparse<E> extract(const LocalSparse<E>& a, Index r0, Index r1, Index c0, Index c1) {
  if (r0 < 0 || c0 < 0 || r1 > a.nrows() || c1 > a.ncols() || r0 > r1 || c0 > c1) {
    throw DimensionMismatch("extract: window outside matrix");
  }
  typename LocalSparse<E>::Builder out(r1 - r0, c1 - c0);
  auto ids = a.col_ids();
  auto first = std::lower_bound(ids.begin(), ids.end(), c0);
  for (auto it = first; it != ids.end() && *it < c1; ++it) {
    auto col = a.column_at(static_cast<std::size_t>(it - ids.begin()));
    auto rb = std::lower_bound(col.rows.begin(), col.rows.end(), r0);
    for (auto rit = rb; rit != col.rows.end() && *rit < r1; ++rit) {
      auto k = static_cast<std::size_t>(rit - col.rows.begin());
      out.push(*rit - r0, col.col - c0, col.values[k]);
    }
  }
  return std::move(out).finish();
}

/// A piece placed at (row_offset, col_offset) inside a larger matrix.
template <class E>
struct PlacedBlock {
  Index row_offset = 0;
  Index col_offset = 0;
  LocalSparse<E> block;
};

/// Reassembles non-overlapping pieces into one nrows x ncols matrix.
template <class E>
LocalSparse<E> assemble(Index nrows, Index ncols, std::span<const PlacedBlock<E>> pieces) {
  std::vector<Triplet<E>> all;
  for (const auto& p : pieces) {
    p.block.for_each([&](Index r, Index c, const E& v) {
      all.push_back({r + p.row_offset, c + p.col_offset, v});
    });
  }
  return LocalSparse<E>::from_triplets(nrows, ncols, std::move(all));
}

// ---------------------------------------------------------------------------
// Serialization

/// Flat byte image used by the grid transport. Payloads must be trivially
/// copyable.
template <class E>
  requires std::is_trivially_copyable_v<E>
std::vector<std::byte> serialize(const LocalSparse<E>& a) {
  const std::int64_t header[4] = {a.nrows(), a.ncols(), static_cast<std::int64_t>(a.nonempty_cols()),
                                  static_cast<std::int64_t>(a.nnz())};
  std::size_t bytes = sizeof header + a.col_ids().size_bytes() + a.col_ptr().size_bytes() +
                      a.row_idx().size_bytes() + a.values().size_bytes();
  std::vector<std::byte> out(bytes);
  std::byte* p = out.data();
  auto put = [&p](const void* src, std::size_t n) {
    if (n) std::memcpy(p, src, n);
    p += n;
  };
  put(header, sizeof header);
  put(a.col_ids().data(), a.col_ids().size_bytes());
  put(a.col_ptr().data(), a.col_ptr().size_bytes());
  put(a.row_idx().data(), a.row_idx().size_bytes());
  put(a.values().data(), a.values().size_bytes());
  return out;
}

template <class E>
  requires std::is_trivially_copyable_v<E>
LocalSparse<E> deserialize(std::span<const std::byte> bytes) {
  std::int64_t header[4];
  if (bytes.size() < sizeof header) throw Error("truncated sparse matrix image");
  std::memcpy(header, bytes.data(), sizeof header);
  auto ncols_nz = static_cast<std::size_t>(header[2]);
  auto nnz = static_cast<std::size_t>(header[3]);
  std::size_t expect = sizeof header + ncols_nz * sizeof(Index) + (ncols_nz + 1) * sizeof(std::size_t) +
                       nnz * sizeof(Index) + nnz * sizeof(E);
  if (bytes.size() != expect) throw Error("sparse matrix image has wrong length");

  std::vector<Index> col_ids(ncols_nz), row_idx(nnz);
  std::vector<std::size_t> col_ptr(ncols_nz + 1);
  std::vector<E> vals(nnz);
  const std::byte* p = bytes.data() + sizeof header;
  auto get = [&p](void* dst, std::size_t n) {
    if (n) std::memcpy(dst, p, n);
    p += n;
  };
  get(col_ids.data(), ncols_nz * sizeof(Index));
  get(col_ptr.data(), (ncols_nz + 1) * sizeof(std::size_t));
  get(row_idx.data(), nnz * sizeof(Index));
  get(vals.data(), nnz * sizeof(E));

  typename LocalSparse<E>::Builder out(header[0], header[1]);
  out.reserve(nnz);
  for (std::size_t s = 0; s < ncols_nz; ++s) {
    for (auto k = col_ptr[s]; k < col_ptr[s + 1]; ++k) out.push(row_idx[k], col_ids[s], vals[k]);
  }
  return std::move(out).finish();
}

/// Coordinate dump "row<TAB>col<TAB>payload" sorted by (col, row).
template <class E, class Fmt>
std::string to_coo_text(const LocalSparse<E>& a, Fmt&& fmt) {
  std::ostringstream os;
  a.for_each([&](Index r, Index c, const E& v) { os << r << '\t' << c << '\t' << fmt(v) << '\n'; });
  return os.str();
}

template <class E>
std::string to_coo_text(const LocalSparse<E>& a) {
  return to_coo_text(a, [](const E& v) { return v; });
}

}  // namespace pastis

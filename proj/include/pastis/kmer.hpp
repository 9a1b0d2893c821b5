#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

#include "pastis/seqio.hpp"
#include "pastis/sparse.hpp"

namespace pastis {

struct KmerParams {
  int k = 6;
  int alphabet_size = 25;
  int common_kmer_threshold = 2;

  /// alphabet_size^k; also the k-mer matrix width.
  Index code_space() const;
  void validate() const;
};

/// A k-mer occurrence stored in the sequence-by-k-mer matrix.
struct KmerEntry {
  std::uint32_t pos = 0;  // first occurrence, 0-based residue offset

  bool operator==(const KmerEntry&) const = default;
};

struct Seed {
  static constexpr Index kAbsent = std::numeric_limits<Index>::max();

  std::uint32_t pos_i = 0;
  std::uint32_t pos_j = 0;
  Index code = kAbsent;

  bool present() const noexcept { return code != kAbsent; }
  bool operator==(const Seed&) const = default;
};

/// Payload of the overlap matrix: how many distinct k-mers two sequences share
/// and the two shared k-mers with the smallest codes.
struct OverlapPayload {
  std::uint32_t count = 0;
  Seed seed1{};
  Seed seed2{};

  bool operator==(const OverlapPayload&) const = default;
};

/// Commutative, associative merge; seeds keep the two smallest (code, pos_i, pos_j).
OverlapPayload merge_overlap(const OverlapPayload& x, const OverlapPayload& y);

/// Base-kAlphabetSize positional code, first residue most significant.
/// Throws InputError for bytes outside the alphabet.
Index encode_kmer(std::string_view residues);

struct OverlapSemiring {
  using value_type = OverlapPayload;

  OverlapPayload multiply(const KmerEntry& a, const KmerEntry& b, Index, Index, Index code) const {
    return {1, Seed{a.pos, b.pos, code}, Seed{}};
  }
  OverlapPayload add(const OverlapPayload& x, const OverlapPayload& y) const {
    return merge_overlap(x, y);
  }
  bool is_zero(const OverlapPayload&) const { return false; }
};

OverlapSemiring overlap_semiring(const KmerParams& params);

struct KmerBuildStats {
  std::size_t short_sequences = 0;  // shorter than k, contribute an empty row
};

/// n x alphabet_size^k matrix with one entry per distinct k-mer per sequence.
LocalSparse<KmerEntry> build_kmer_matrix(std::span<const SequenceRecord> seqs,
                                         const KmerParams& params, KmerBuildStats* stats = nullptr);

std::string describe(const OverlapPayload& p);

}  // namespace pastis

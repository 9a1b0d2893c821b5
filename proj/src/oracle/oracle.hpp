#pragma once

// Slow, independent reference implementations. Nothing here shares code with
// the production kernels beyond the parameter structs.

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pastis/align.hpp"
#include "pastis/kmer.hpp"
#include "pastis/seqio.hpp"

namespace pastis::oracle {

struct ReferenceAlignment {
  long long score = 0;
  int i_begin = -1;
  int i_end = -1;
  int j_begin = -1;
  int j_end = -1;
  int matches = 0;
  int aln_len = 0;
};

/// Full three-matrix Gotoh with its own traceback and the same tie rules as
/// the production kernel.
ReferenceAlignment reference_align(std::string_view a, std::string_view b, const AlignParams& params);

/// O(m n (m + n)) local alignment with an explicit gap-length loop.
long long reference_score_cubic(std::string_view a, std::string_view b, const AlignParams& params);

std::set<std::string> distinct_kmers(std::string_view s, int k);
std::size_t shared_kmers(std::string_view a, std::string_view b, int k);

/// All pairs i < j: shared distinct k-mers >= threshold, then reference
/// alignment, then identity and coverage thresholds. Sorted by (i, j).
std::vector<SimilarityEdge> brute_force_edges(std::span<const SequenceRecord> seqs, const KmerParams& kp,
                                              const AlignParams& ap);

}  // namespace pastis::oracle

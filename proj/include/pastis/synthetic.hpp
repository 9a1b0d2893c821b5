#pragma once

#include <cstdint>
#include <vector>

#include "pastis/seqio.hpp"

namespace pastis {

/// Protein families: each family has a random root; members are mutated,
/// indel-edited, end-trimmed copies. Records are shuffled so families spread
/// across output blocks.
struct CorpusSpec {
  std::size_t n = 1000;
  int min_len = 50;
  int max_len = 500;
  int family_size = 4;
  double substitution_rate = 0.15;
  double indel_rate = 0.02;
  double max_trim = 0.25;  // fraction of the root that may be cut from either end
  std::uint64_t seed = 42;

  void validate() const;
};

/// Deterministic for a given spec on every platform. Headers are "s00000",
/// "s00001", ... in output order.
std::vector<SequenceRecord> generate_corpus(const CorpusSpec& spec);

}  // namespace pastis

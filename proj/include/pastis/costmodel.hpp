#pragma once

#include <cstdint>

#include "pastis/summa.hpp"

namespace pastis {

/// Alpha-beta communication model of SUMMA with tree broadcasts.
struct CostParams {
  double alpha = 0.0;   // message startup, seconds per message
  double beta = 0.0;    // transfer, seconds per word
  double s = 0.0;       // nonzeros per n/sqrt(p) x n/sqrt(p) sub-matrix
  int p = 1;
  int word_bytes = 8;

  void validate() const;
};

struct CostEstimate {
  double latency_term = 0.0;
  double bandwidth_term = 0.0;
  double total = 0.0;
  double messages = 0.0;   // coefficient of alpha
  double words = 0.0;      // coefficient of beta
  std::uint64_t broadcasts = 0;  // per worker, row + column
  std::uint64_t tree_hops = 0;   // broadcasts * ceil(log2 sqrt(p))
};

/// 2 a sqrt(p) log2 sqrt(p) + 2 b s sqrt(p) log2 sqrt(p)
CostEstimate plain_summa_cost(const CostParams& cp);

/// 2 a (br bc) sqrt(p) log2 sqrt(p) + b s (br + bc) sqrt(p) log2 sqrt(p)
CostEstimate blocked_summa_cost(const CostParams& cp, BlockingFactor bf);

}  // namespace pastis

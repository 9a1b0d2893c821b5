#include "pastis/costmodel.hpp"

#include <cmath>

#include "pastis/error.hpp"
#include "pastis/grid.hpp"

namespace pastis {

void CostParams::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("alpha and beta must be >= 0");
  if (!(s >= 0.0)) throw ConfigError("s must be >= 0");
  if (!is_perfect_square(p)) throw ConfigError("p must be a perfect square");
  if (word_bytes < 1) throw ConfigError("word size must be >= 1 byte");
}

namespace {

CostEstimate evaluate(const CostParams& cp, double latency_mult, double bandwidth_mult,
                      std::uint64_t broadcasts_per_stage_group) {
  cp.validate();
  const int q = make_grid_config(cp.p).q;
  const double sq = static_cast<double>(q);
  const double lg = std::log2(sq);
  CostEstimate e;
  e.messages = latency_mult * sq * lg;
  e.words = bandwidth_mult * cp.s * sq * lg;
  e.latency_term = cp.alpha * e.messages;
  e.bandwidth_term = cp.beta * e.words;
  e.total = e.latency_term + e.bandwidth_term;
  e.broadcasts = broadcasts_per_stage_group * static_cast<std::uint64_t>(q);
  e.tree_hops = e.broadcasts * static_cast<std::uint64_t>(tree_depth(q));
  return e;
}

}  // namespace

CostEstimate plain_summa_cost(const CostParams& cp) { return evaluate(cp, 2.0, 2.0, 2); }

CostEstimate blocked_summa_cost(const CostParams& cp, BlockingFactor bf) {
  bf.validate();
  const auto blocks = static_cast<double>(bf.br) * static_cast<double>(bf.bc);
  return evaluate(cp, 2.0 * blocks, static_cast<double>(bf.br + bf.bc),
                  2 * static_cast<std::uint64_t>(bf.br) * static_cast<std::uint64_t>(bf.bc));
}

}  // namespace pastis

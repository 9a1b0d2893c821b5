#include "pastis/balance.hpp"

#include "pastis/error.hpp"

namespace pastis {

std::string_view to_string(BalanceScheme s) noexcept {
  return s == BalanceScheme::index ? "index" : "triangularity";
}

std::string_view to_string(BlockClass c) noexcept {
  switch (c) {
    case BlockClass::full:
      return "full";
    case BlockClass::partial:
      return "partial";
    case BlockClass::avoidable:
      return "avoidable";
    case BlockClass::all:
      return "all";
  }
  return "?";
}

BalanceScheme parse_scheme(std::string_view name) {
  if (name == "index") return BalanceScheme::index;
  if (name == "triangularity" || name == "triangular") return BalanceScheme::triangularity;
  throw ConfigError("unknown load balancing scheme '" + std::string(name) + "'");
}

std::vector<BlockId> BlockPlan::order() const {
  std::vector<BlockId> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.id);
  return ids;
}

BlockClass classify_block(BlockId id, int b) {
  if (b < 1) throw ConfigError("blocking factor must be >= 1");
  if (id.r < 0 || id.r >= b || id.c < 0 || id.c >= b) {
    throw ConfigError("block " + id.str() + " outside " + std::to_string(b) + "x" + std::to_string(b));
  }
  if (id.c > id.r) return BlockClass::full;
  if (id.c == id.r) return BlockClass::partial;
  return BlockClass::avoidable;
}

BlockPlan make_plan(BalanceScheme scheme, BlockingFactor bf) {
  bf.validate();
  BlockPlan plan;
  plan.scheme = scheme;
  plan.bf = bf;
  if (scheme == BalanceScheme::triangularity && bf.br != bf.bc) {
    throw ConfigError("triangularity-based balancing needs square blocking, got " +
                      std::to_string(bf.br) + "x" + std::to_string(bf.bc));
  }
  for (int r = 0; r < bf.br; ++r) {
    for (int c = 0; c < bf.bc; ++c) {
      BlockId id{r, c};
      if (scheme == BalanceScheme::index) {
        plan.entries.push_back({id, BlockClass::all});
        continue;
      }
      auto cls = classify_block(id, bf.br);
      if (cls != BlockClass::avoidable) plan.entries.push_back({id, cls});
    }
  }
  return plan;
}

}  // namespace pastis

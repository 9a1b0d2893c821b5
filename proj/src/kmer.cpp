#include "pastis/kmer.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "pastis/alphabet.hpp"
#include "pastis/error.hpp"

namespace pastis {

Index KmerParams::code_space() const {
  Index space = 1;
  for (int i = 0; i < k; ++i) space *= alphabet_size;
  return space;
}

void KmerParams::validate() const {
  if (k < 1) throw ConfigError("k-mer length must be >= 1");
  if (alphabet_size != kAlphabetSize) {
    throw ConfigError("alphabet size must be " + std::to_string(kAlphabetSize));
  }
  // 25^13 < 2^63 <= 25^14
  if (k > 13) throw ConfigError("k-mer length " + std::to_string(k) + " overflows the column index");
  if (common_kmer_threshold < 1) throw ConfigError("common k-mer threshold must be >= 1");
}

namespace {

bool seed_less(const Seed& a, const Seed& b) {
  if (a.code != b.code) return a.code < b.code;
  if (a.pos_i != b.pos_i) return a.pos_i < b.pos_i;
  return a.pos_j < b.pos_j;
}

}  // namespace

OverlapPayload merge_overlap(const OverlapPayload& x, const OverlapPayload& y) {
  std::array<Seed, 4> seeds{x.seed1, x.seed2, y.seed1, y.seed2};
  std::sort(seeds.begin(), seeds.end(), seed_less);
  OverlapPayload out;
  out.count = x.count + y.count;
  // Two smallest distinct seeds; absent seeds sort last.
  out.seed1 = seeds[0];
  for (std::size_t k = 1; k < seeds.size(); ++k) {
    if (!(seeds[k] == out.seed1)) {
      out.seed2 = seeds[k];
      break;
    }
  }
  return out;
}

Index encode_kmer(std::string_view residues) {
  Index code = 0;
  for (char c : residues) {
    auto rank = residue_rank(c);
    if (rank == kInvalidRank) {
      throw InputError(std::string("byte '") + c + "' is not in the residue alphabet");
    }
    code = code * kAlphabetSize + rank;
  }
  return code;
}

OverlapSemiring overlap_semiring(const KmerParams& params) {
  params.validate();
  return {};
}

LocalSparse<KmerEntry> build_kmer_matrix(std::span<const SequenceRecord> seqs,
                                         const KmerParams& params, KmerBuildStats* stats) {
  params.validate();
  const Index width = params.code_space();
  const auto k = static_cast<std::size_t>(params.k);
  Index top = 1;  // weight of the leading digit
  for (std::size_t i = 1; i < k; ++i) top *= kAlphabetSize;

  std::vector<Triplet<KmerEntry>> entries;
  std::vector<std::pair<Index, std::uint32_t>> row;
  std::size_t short_seqs = 0;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const auto& res = seqs[s].residues;
    if (res.size() < k) {
      ++short_seqs;
      continue;
    }
    row.clear();
    Index code = encode_kmer(std::string_view(res).substr(0, k));
    row.emplace_back(code, 0);
    for (std::size_t pos = 1; pos + k <= res.size(); ++pos) {
      code = (code - top * residue_rank(res[pos - 1])) * kAlphabetSize + residue_rank(res[pos + k - 1]);
      row.emplace_back(code, static_cast<std::uint32_t>(pos));
    }
    std::sort(row.begin(), row.end());
    Index last = -1;
    for (const auto& [c, pos] : row) {
      if (c == last) continue;
      entries.push_back({static_cast<Index>(s), c, KmerEntry{pos}});
      last = c;
    }
  }
  if (stats) stats->short_sequences = short_seqs;
  return LocalSparse<KmerEntry>::from_triplets(static_cast<Index>(seqs.size()), width,
                                               std::move(entries));
}

std::string describe(const OverlapPayload& p) {
  std::ostringstream os;
  os << "count=" << p.count;
  for (const Seed* s : {&p.seed1, &p.seed2}) {
    if (s->present()) os << " seed=(" << s->pos_i << ',' << s->pos_j << ',' << s->code << ')';
  }
  return os.str();
}

}  // namespace pastis

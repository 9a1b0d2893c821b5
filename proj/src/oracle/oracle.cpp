#include "oracle/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pastis::oracle {

namespace {

constexpr long long kNegInf = std::numeric_limits<long long>::min() / 4;

int sub(const AlignParams& p, char x, char y) {
  auto ix = kAlphabet.find(x);
  auto iy = kAlphabet.find(y);
  if (ix == std::string_view::npos || iy == std::string_view::npos) {
    throw std::invalid_argument("oracle: residue outside the alphabet");
  }
  return p.matrix.score[ix][iy];
}

using Table = std::vector<std::vector<long long>>;

}  // namespace

ReferenceAlignment reference_align(std::string_view a, std::string_view b, const AlignParams& params) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  const long long go = params.gap_open;
  const long long ge = params.gap_extend;
  Table h(m + 1, std::vector<long long>(n + 1, 0));
  Table up(m + 1, std::vector<long long>(n + 1, kNegInf));
  Table left(m + 1, std::vector<long long>(n + 1, kNegInf));

  long long best = 0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      up[i][j] = std::max(h[i - 1][j] - go, up[i - 1][j] - ge);
      left[i][j] = std::max(h[i][j - 1] - go, left[i][j - 1] - ge);
      long long diag = h[i - 1][j - 1] + sub(params, a[i - 1], b[j - 1]);
      h[i][j] = std::max({0LL, diag, up[i][j], left[i][j]});
      if (h[i][j] > best) {
        best = h[i][j];
        bi = i;
        bj = j;
      }
    }
  }

  ReferenceAlignment r;
  r.score = best;
  if (best == 0) return r;
  r.i_end = static_cast<int>(bi) - 1;
  r.j_end = static_cast<int>(bj) - 1;
  enum { kH, kUp, kLeft } state = kH;
  std::size_t i = bi, j = bj;
  while (i > 0 && j > 0) {
    if (state == kH) {
      if (h[i][j] == 0) break;
      if (h[i][j] == h[i - 1][j - 1] + sub(params, a[i - 1], b[j - 1])) {
        r.matches += a[i - 1] == b[j - 1];
        ++r.aln_len;
        r.i_begin = static_cast<int>(i) - 1;
        r.j_begin = static_cast<int>(j) - 1;
        --i;
        --j;
      } else if (h[i][j] == up[i][j]) {
        state = kUp;
      } else {
        state = kLeft;
      }
    } else if (state == kUp) {
      ++r.aln_len;
      if (up[i][j] == h[i - 1][j] - go) state = kH;
      --i;
    } else {
      ++r.aln_len;
      if (left[i][j] == h[i][j - 1] - go) state = kH;
      --j;
    }
  }
  return r;
}

long long reference_score_cubic(std::string_view a, std::string_view b, const AlignParams& params) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  auto gap = [&](std::size_t len) {
    return static_cast<long long>(params.gap_open) + static_cast<long long>(len - 1) * params.gap_extend;
  };
  Table h(m + 1, std::vector<long long>(n + 1, 0));
  long long best = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      long long v = std::max(0LL, h[i - 1][j - 1] + sub(params, a[i - 1], b[j - 1]));
      for (std::size_t k = 1; k <= i; ++k) v = std::max(v, h[i - k][j] - gap(k));
      for (std::size_t l = 1; l <= j; ++l) v = std::max(v, h[i][j - l] - gap(l));
      h[i][j] = v;
      best = std::max(best, v);
    }
  }
  return best;
}

std::set<std::string> distinct_kmers(std::string_view s, int k) {
  std::set<std::string> out;
  const auto uk = static_cast<std::size_t>(k);
  for (std::size_t i = 0; i + uk <= s.size(); ++i) out.emplace(s.substr(i, uk));
  return out;
}

std::size_t shared_kmers(std::string_view a, std::string_view b, int k) {
  auto x = distinct_kmers(a, k);
  auto y = distinct_kmers(b, k);
  std::vector<std::string> common;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
  return common.size();
}

std::vector<SimilarityEdge> brute_force_edges(std::span<const SequenceRecord> seqs, const KmerParams& kp,
                                              const AlignParams& ap) {
  std::vector<std::set<std::string>> kmers;
  kmers.reserve(seqs.size());
  for (const auto& s : seqs) kmers.push_back(distinct_kmers(s.residues, kp.k));

  std::vector<SimilarityEdge> edges;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t j = i + 1; j < seqs.size(); ++j) {
      std::size_t shared = 0;
      for (const auto& km : kmers[i]) shared += kmers[j].count(km);
      if (shared < static_cast<std::size_t>(kp.common_kmer_threshold)) continue;
      const auto& a = seqs[i].residues;
      const auto& b = seqs[j].residues;
      auto r = reference_align(a, b, ap);
      if (r.aln_len == 0) continue;
      double identity = static_cast<double>(r.matches) / r.aln_len;
      double cov_i = static_cast<double>(r.i_end - r.i_begin + 1) / static_cast<double>(a.size());
      double cov_j = static_cast<double>(r.j_end - r.j_begin + 1) / static_cast<double>(b.size());
      if (identity < ap.ani_threshold || cov_i < ap.coverage_threshold || cov_j < ap.coverage_threshold) continue;
      edges.push_back({static_cast<SeqId>(i), static_cast<SeqId>(j), static_cast<int>(r.score), identity, cov_i,
                       cov_j});
    }
  }
  return edges;
}

}  // namespace pastis::oracle

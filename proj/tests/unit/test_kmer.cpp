#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "oracle/oracle.hpp"
#include "pastis/error.hpp"
#include "pastis/kmer.hpp"
#include "support.hpp"

using namespace pastis;
using pastis::testing::decode_kmer;
using pastis::testing::random_protein;

namespace {

std::vector<SequenceRecord> records(std::initializer_list<std::string> residues) {
  std::vector<SequenceRecord> out;
  for (const auto& r : residues) out.push_back({static_cast<SeqId>(out.size()), "s" + std::to_string(out.size()), r});
  return out;
}

LocalSparse<OverlapPayload> overlap(const std::vector<SequenceRecord>& seqs, const KmerParams& kp) {
  auto a = build_kmer_matrix(seqs, kp);
  auto at = local_transpose(a);
  return local_spgemm(a, at, overlap_semiring(kp));
}

std::optional<OverlapPayload> entry(const LocalSparse<OverlapPayload>& m, Index i, Index j) {
  auto col = m.find_column(j);
  if (!col) return std::nullopt;
  auto view = m.column_at(*col);
  auto it = std::lower_bound(view.rows.begin(), view.rows.end(), i);
  if (it == view.rows.end() || *it != i) return std::nullopt;
  return view.values[static_cast<std::size_t>(it - view.rows.begin())];
}

OverlapPayload random_payload(std::mt19937_64& rng) {
  OverlapPayload p;
  int seeds = static_cast<int>(rng() % 3);
  p.count = static_cast<std::uint32_t>(seeds + rng() % 3);
  std::vector<Seed> s;
  for (int k = 0; k < seeds; ++k) {
    s.push_back({static_cast<std::uint32_t>(rng() % 4), static_cast<std::uint32_t>(rng() % 4),
                 static_cast<Index>(rng() % 6)});
  }
  std::sort(s.begin(), s.end(), [](const Seed& a, const Seed& b) {
    return std::tie(a.code, a.pos_i, a.pos_j) < std::tie(b.code, b.pos_i, b.pos_j);
  });
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (!s.empty()) p.seed1 = s[0];
  if (s.size() > 1) p.seed2 = s[1];
  return p;
}

}  // namespace

TEST_CASE("code space") {
  KmerParams kp;
  CHECK(kp.code_space() == 244'140'625);
  kp.k = 1;
  CHECK(kp.code_space() == 25);
  CHECK(encode_kmer("A") == 0);
  CHECK(encode_kmer("*") == 24);
  CHECK(encode_kmer("RA") == 25);
}

TEST_CASE("encoding round-trips through an independent decoder") {
  std::mt19937_64 rng(21);
  std::set<Index> seen;
  for (int trial = 0; trial < 1000; ++trial) {
    std::string kmer = random_protein(rng, 6, kAlphabet);
    Index code = encode_kmer(kmer);
    CHECK(code >= 0);
    CHECK(code < 244'140'625);
    CHECK(decode_kmer(code, 6) == kmer);
    seen.insert(code);
  }
  CHECK(encode_kmer("******") == 244'140'624);
}

TEST_CASE("invalid parameters and residues are rejected") {
  CHECK_THROWS_AS(encode_kmer("AB1"), InputError);
  KmerParams kp;
  kp.k = 0;
  CHECK_THROWS_AS(kp.validate(), ConfigError);
  kp.k = 14;
  CHECK_THROWS_AS(kp.validate(), ConfigError);
  kp.k = 6;
  kp.alphabet_size = 20;
  CHECK_THROWS_AS(kp.validate(), ConfigError);
  kp.alphabet_size = 25;
  kp.common_kmer_threshold = 0;
  CHECK_THROWS_AS(kp.validate(), ConfigError);
}

TEST_CASE("repeated k-mers collapse to the first occurrence") {
  KmerParams kp;
  kp.k = 3;
  auto m = build_kmer_matrix(records({"AAAA"}), kp);
  REQUIRE(m.nnz() == 1);
  CHECK(m.col_ids()[0] == encode_kmer("AAA"));
  CHECK(m.values()[0].pos == 0);
  CHECK(m.ncols() == 25 * 25 * 25);
}

TEST_CASE("two sequences share a 2-mer column") {
  KmerParams kp;
  kp.k = 2;
  auto m = build_kmer_matrix(records({"MKV", "KVL"}), kp);
  auto col = m.find_column(encode_kmer("KV"));
  REQUIRE(col.has_value());
  auto view = m.column_at(*col);
  CHECK(std::vector<Index>(view.rows.begin(), view.rows.end()) == std::vector<Index>{0, 1});
  CHECK(view.values[0].pos == 1);
  CHECK(view.values[1].pos == 0);
}

TEST_CASE("sequences shorter than k contribute empty rows") {
  KmerParams kp;
  KmerBuildStats stats;
  auto m = build_kmer_matrix(records({"MKV", "MKVLAGH"}), kp, &stats);
  CHECK(stats.short_sequences == 1);
  CHECK(m.nrows() == 2);
  CHECK(m.nnz() == 2);
}

TEST_CASE("matrix nnz equals the distinct k-mer count per sequence") {
  std::mt19937_64 rng(22);
  std::vector<SequenceRecord> seqs;
  for (int k = 0; k < 20; ++k) seqs.push_back({k, "s", random_protein(rng, 5 + rng() % 60, "ACDG")});
  for (int k : {1, 2, 3, 6}) {
    KmerParams kp;
    kp.k = k;
    auto m = build_kmer_matrix(seqs, kp);
    std::size_t expected = 0;
    for (const auto& s : seqs) expected += oracle::distinct_kmers(s.residues, k).size();
    CHECK(m.nnz() == expected);
  }
}

TEST_CASE("one shared k-mer gives count 1 with a seed") {
  KmerParams kp;
  kp.k = 3;
  auto c = overlap(records({"MKVWW", "CCMKV"}), kp);
  auto p = entry(c, 0, 1);
  REQUIRE(p.has_value());
  CHECK(p->count == 1);
  CHECK(p->seed1 == Seed{0, 2, encode_kmer("MKV")});
  CHECK_FALSE(p->seed2.present());
}

TEST_CASE("three shared k-mers keep the two smallest codes") {
  KmerParams kp;
  kp.k = 2;
  // Shared 2-mers: WA, AC, YW (distinct codes).
  auto seqs = records({"WACYW", "YWAC"});
  auto c = overlap(seqs, kp);
  auto p = entry(c, 0, 1);
  REQUIRE(p.has_value());
  std::vector<Index> codes{encode_kmer("WA"), encode_kmer("AC"), encode_kmer("YW")};
  std::sort(codes.begin(), codes.end());
  CHECK(p->count == 3);
  CHECK(p->seed1.code == codes[0]);
  CHECK(p->seed2.code == codes[1]);
  CHECK(decode_kmer(p->seed1.code, 2) == seqs[0].residues.substr(p->seed1.pos_i, 2));
  CHECK(decode_kmer(p->seed1.code, 2) == seqs[1].residues.substr(p->seed1.pos_j, 2));
}

TEST_CASE("overlap counts equal set intersections on random sequences") {
  std::mt19937_64 rng(23);
  std::vector<SequenceRecord> seqs;
  for (int k = 0; k < 40; ++k) seqs.push_back({k, "s", random_protein(rng, 10 + rng() % 50, "ACDEG")});
  KmerParams kp;
  kp.k = 3;
  auto c = overlap(seqs, kp);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      auto shared = oracle::shared_kmers(seqs[i].residues, seqs[j].residues, 3);
      auto p = entry(c, static_cast<Index>(i), static_cast<Index>(j));
      CHECK((p ? p->count : 0u) == shared);
    }
  }
}

TEST_CASE("overlap merge is a commutative monoid") {
  std::mt19937_64 rng(24);
  const OverlapPayload zero{};
  for (int trial = 0; trial < 2000; ++trial) {
    auto x = random_payload(rng), y = random_payload(rng), z = random_payload(rng);
    CHECK(merge_overlap(x, y) == merge_overlap(y, x));
    CHECK(merge_overlap(merge_overlap(x, y), z) == merge_overlap(x, merge_overlap(y, z)));
    CHECK(merge_overlap(x, zero) == x);
  }
}

TEST_CASE("merging payload lists in any order gives the same payload") {
  std::mt19937_64 rng(25);
  std::vector<OverlapPayload> items;
  for (int k = 0; k < 12; ++k) items.push_back(random_payload(rng));
  auto fold = [&] {
    OverlapPayload acc{};
    for (const auto& p : items) acc = merge_overlap(acc, p);
    return acc;
  };
  auto reference = fold();
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(items.begin(), items.end(), rng);
    CHECK(fold() == reference);
  }
}

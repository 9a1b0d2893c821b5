#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pastis/alphabet.hpp"
#include "pastis/kmer.hpp"
#include "pastis/sparse.hpp"

namespace pastis::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pastis-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

using Dense = std::vector<std::vector<long long>>;

/// Random integer matrix with the given fill probability; values in [1, 9].
inline LocalSparse<long long> random_matrix(std::mt19937_64& rng, Index nr, Index nc, double density) {
  std::vector<Triplet<long long>> t;
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<long long> val(1, 9);
  for (Index c = 0; c < nc; ++c) {
    for (Index r = 0; r < nr; ++r) {
      if (keep(rng)) t.push_back({r, c, val(rng)});
    }
  }
  return LocalSparse<long long>::from_triplets(nr, nc, std::move(t));
}

inline Dense to_dense(const LocalSparse<long long>& m) {
  Dense d(static_cast<std::size_t>(m.nrows()), std::vector<long long>(static_cast<std::size_t>(m.ncols()), 0));
  m.for_each([&](Index r, Index c, long long v) { d[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = v; });
  return d;
}

inline Dense dense_multiply(const Dense& a, const Dense& b) {
  std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Dense c(n, std::vector<long long>(m, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][t] * b[t][j];
    }
  }
  return c;
}

/// Inverse of encode_kmer, written independently from the encoder.
inline std::string decode_kmer(Index code, int k) {
  std::string s(static_cast<std::size_t>(k), '?');
  for (int pos = k - 1; pos >= 0; --pos) {
    s[static_cast<std::size_t>(pos)] = kAlphabet[static_cast<std::size_t>(code % kAlphabetSize)];
    code /= kAlphabetSize;
  }
  return s;
}

inline std::string random_protein(std::mt19937_64& rng, std::size_t len, std::string_view alphabet = "ARNDCQEGHILKMFPSTWYV") {
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s(len, 'A');
  for (char& c : s) c = alphabet[pick(rng)];
  return s;
}

}  // namespace pastis::testing

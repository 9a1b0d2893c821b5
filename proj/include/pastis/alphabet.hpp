#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace pastis {

// 20 standard amino acids followed by the ambiguity/rare codes B, Z, X, U and
// the stop symbol. Rank order defines both k-mer digits and matrix rows.
inline constexpr std::string_view kAlphabet = "ARNDCQEGHILKMFPSTWYVBZXU*";
inline constexpr int kAlphabetSize = static_cast<int>(kAlphabet.size());
inline constexpr std::uint8_t kInvalidRank = 0xFF;

namespace detail {
constexpr std::array<std::uint8_t, 256> make_rank_table() {
  std::array<std::uint8_t, 256> table{};
  for (auto& v : table) v = kInvalidRank;
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) {
    auto c = static_cast<unsigned char>(kAlphabet[i]);
    table[c] = static_cast<std::uint8_t>(i);
    if (c >= 'A' && c <= 'Z') table[c - 'A' + 'a'] = static_cast<std::uint8_t>(i);
  }
  return table;
}
}  // namespace detail

inline constexpr std::array<std::uint8_t, 256> kResidueRank = detail::make_rank_table();

/// Rank of a residue byte in kAlphabet, or kInvalidRank. Lower case accepted.
constexpr std::uint8_t residue_rank(char c) noexcept {
  return kResidueRank[static_cast<unsigned char>(c)];
}

constexpr bool in_alphabet(char c) noexcept { return residue_rank(c) != kInvalidRank; }

}  // namespace pastis

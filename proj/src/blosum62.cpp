#include <cstdio>
#include <string_view>

#include "pastis/align.hpp"

namespace pastis {

namespace {

// NCBI BLOSUM62, half-bit units.
constexpr std::string_view kNcbiOrder = "ARNDCQEGHILKMFPSTWYVBZX*";
constexpr int kNcbi[24][24] = {
    // A   R   N   D   C   Q   E   G   H   I   L   K   M   F   P   S   T   W   Y   V   B   Z   X   *
    { 4, -1, -2, -2,  0, -1, -1,  0, -2, -1, -1, -1, -1, -2, -1,  1,  0, -3, -2,  0, -2, -1,  0, -4},
    {-1,  5,  0, -2, -3,  1,  0, -2,  0, -3, -2,  2, -1, -3, -2, -1, -1, -3, -2, -3, -1,  0, -1, -4},
    {-2,  0,  6,  1, -3,  0,  0,  0,  1, -3, -3,  0, -2, -3, -2,  1,  0, -4, -2, -3,  3,  0, -1, -4},
    {-2, -2,  1,  6, -3,  0,  2, -1, -1, -3, -4, -1, -3, -3, -1,  0, -1, -4, -3, -3,  4,  1, -1, -4},
    { 0, -3, -3, -3,  9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1, -3, -3, -2, -4},
    {-1,  1,  0,  0, -3,  5,  2, -2,  0, -3, -2,  1,  0, -3, -1,  0, -1, -2, -1, -2,  0,  3, -1, -4},
    {-1,  0,  0,  2, -4,  2,  5, -2,  0, -3, -3,  1, -2, -3, -1,  0, -1, -3, -2, -2,  1,  4, -1, -4},
    { 0, -2,  0, -1, -3, -2, -2,  6, -2, -4, -4, -2, -3, -3, -2,  0, -2, -2, -3, -3, -1, -2, -1, -4},
    {-2,  0,  1, -1, -3,  0,  0, -2,  8, -3, -3, -1, -2, -1, -2, -1, -2, -2,  2, -3,  0,  0, -1, -4},
    {-1, -3, -3, -3, -1, -3, -3, -4, -3,  4,  2, -3,  1,  0, -3, -2, -1, -3, -1,  3, -3, -3, -1, -4},
    {-1, -2, -3, -4, -1, -2, -3, -4, -3,  2,  4, -2,  2,  0, -3, -2, -1, -2, -1,  1, -4, -3, -1, -4},
    {-1,  2,  0, -1, -3,  1,  1, -2, -1, -3, -2,  5, -1, -3, -1,  0, -1, -3, -2, -2,  0,  1, -1, -4},
    {-1, -1, -2, -3, -1,  0, -2, -3, -2,  1,  2, -1,  5,  0, -2, -1, -1, -1, -1,  1, -3, -1, -1, -4},
    {-2, -3, -3, -3, -2, -3, -3, -3, -1,  0,  0, -3,  0,  6, -4, -2, -2,  1,  3, -1, -3, -3, -1, -4},
    {-1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4,  7, -1, -1, -4, -3, -2, -2, -1, -2, -4},
    { 1, -1,  1,  0, -1,  0,  0,  0, -1, -2, -2,  0, -1, -2, -1,  4,  1, -3, -2, -2,  0,  0,  0, -4},
    { 0, -1,  0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1,  1,  5, -2, -2,  0, -1, -1,  0, -4},
    {-3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1,  1, -4, -3, -2, 11,  2, -3, -4, -3, -2, -4},
    {-2, -2, -2, -3, -2, -1, -2, -3,  2, -1, -1, -2, -1,  3, -3, -2, -2,  2,  7, -1, -3, -2, -1, -4},
    { 0, -3, -3, -3, -1, -2, -2, -3, -3,  3,  1, -2,  1, -1, -2, -2,  0, -3, -1,  4, -3, -2, -1, -4},
    {-2, -1,  3,  4, -3,  0,  1, -1,  0, -3, -4,  0, -3, -3, -2,  0, -1, -4, -3, -3,  4,  1, -1, -4},
    {-1,  0,  0,  1, -3,  3,  4, -2,  0, -3, -3,  1, -1, -3, -1,  0, -1, -3, -2, -2,  1,  4, -1, -4},
    { 0, -1, -1, -1, -2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -2,  0,  0, -2, -1, -1, -1, -1, -1, -4},
    {-4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4, -4,  1},
};

int ncbi_index(char c) {
  // Selenocysteine has no row of its own; NCBI scores it as X.
  if (c == 'U') c = 'X';
  return static_cast<int>(kNcbiOrder.find(c));
}

SubstitutionMatrix build_blosum62() {
  SubstitutionMatrix m;
  for (int a = 0; a < kAlphabetSize; ++a) {
    for (int b = 0; b < kAlphabetSize; ++b) {
      m.score[a][b] = kNcbi[ncbi_index(kAlphabet[a])][ncbi_index(kAlphabet[b])];
    }
  }
  return m;
}

}  // namespace

bool SubstitutionMatrix::symmetric() const noexcept {
  for (int a = 0; a < kAlphabetSize; ++a) {
    for (int b = 0; b < a; ++b) {
      if (score[a][b] != score[b][a]) return false;
    }
  }
  return true;
}

const SubstitutionMatrix& blosum62() {
  static const SubstitutionMatrix m = build_blosum62();
  return m;
}

std::string dump_matrix(const SubstitutionMatrix& m) {
  std::string out = "#  Substitution matrix over " + std::string(kAlphabet) + "\n   ";
  char cell[8];
  for (char c : kAlphabet) {
    std::snprintf(cell, sizeof cell, "%3c", c);
    out += cell;
  }
  out += '\n';
  for (int a = 0; a < kAlphabetSize; ++a) {
    out += kAlphabet[static_cast<std::size_t>(a)];
    out += "  ";
    for (int b = 0; b < kAlphabetSize; ++b) {
      std::snprintf(cell, sizeof cell, "%3d", m.score[a][b]);
      out += cell;
    }
    out += '\n';
  }
  return out;
}

}  // namespace pastis

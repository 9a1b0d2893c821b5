#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pastis/alphabet.hpp"
#include "pastis/kmer.hpp"
#include "pastis/seqio.hpp"

namespace pastis {

/// Square integer substitution table indexed by alphabet rank.
struct SubstitutionMatrix {
  std::array<std::array<int, kAlphabetSize>, kAlphabetSize> score{};

  int operator()(std::uint8_t a, std::uint8_t b) const noexcept { return score[a][b]; }
  bool symmetric() const noexcept;
  bool operator==(const SubstitutionMatrix&) const = default;
};

/// BLOSUM62 over kAlphabet: the NCBI 24-letter table with U scored as X.
const SubstitutionMatrix& blosum62();

/// NCBI-style text rendering: a '#' comment line, a header row of symbols,
/// then one row per symbol, each cell right-aligned in 3 columns.
std::string dump_matrix(const SubstitutionMatrix& m);

struct AlignParams {
  int gap_open = 11;    // cost of the first residue of a gap
  int gap_extend = 2;   // cost of each further residue
  SubstitutionMatrix matrix = blosum62();
  double ani_threshold = 0.30;
  double coverage_threshold = 0.70;

  void validate() const;
};

/// Optimal local alignment; spans are 0-based inclusive, -1 when empty.
struct AlignmentResult {
  int score = 0;
  int i_begin = -1;
  int i_end = -1;
  int j_begin = -1;
  int j_end = -1;
  int matches = 0;
  int aln_len = 0;
  std::uint64_t cells = 0;

  bool empty() const noexcept { return aln_len == 0; }
  bool operator==(const AlignmentResult&) const = default;
};

/// Gotoh affine-gap Smith-Waterman with traceback. The reported cell is the
/// first maximum in row-major order; traceback prefers diagonal, then up
/// (gap in b), then left (gap in a); a gap whose open and extend scores tie
/// is traced as opened.
/// `kernel_seconds`, when given, accumulates time spent filling the matrix.
AlignmentResult smith_waterman(std::string_view a, std::string_view b, const AlignParams& params,
                               double* kernel_seconds = nullptr);

/// Applies identity and coverage thresholds. Returns a canonical edge (i < j)
/// or nothing when rejected; empty alignments are always rejected.
std::optional<SimilarityEdge> evaluate_pair(SeqId i, SeqId j, std::string_view a, std::string_view b,
                                            const AlignmentResult& result, const AlignParams& params);

struct AlignTask {
  SeqId i = 0;
  SeqId j = 0;
  OverlapPayload payload{};
};

struct BatchCounters {
  std::uint64_t alignments = 0;
  std::uint64_t cells = 0;
  double kernel_seconds = 0.0;
};

struct BatchResult {
  std::vector<AlignmentResult> results;  // same order as the tasks
  std::vector<std::string> errors;       // per task; empty string on success
  BatchCounters counters;
};

/// Aligns every task, fanning out over `lanes` threads. Results come back in
/// task order regardless of lane scheduling.
BatchResult align_batch(std::span<const AlignTask> tasks, std::span<const SequenceRecord> seqs,
                        const AlignParams& params, int lanes = 1);

}  // namespace pastis

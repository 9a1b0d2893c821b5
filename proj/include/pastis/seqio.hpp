#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pastis {

using SeqId = std::int64_t;

struct SequenceRecord {
  SeqId id = 0;
  std::string header;    // first whitespace-delimited token of the '>' line
  std::string residues;  // upper case, every byte in kAlphabet

  bool operator==(const SequenceRecord&) const = default;
};

/// One canonical similarity-graph edge; always i < j.
struct SimilarityEdge {
  SeqId i = 0;
  SeqId j = 0;
  int score = 0;
  double identity = 0.0;
  double coverage_i = 0.0;
  double coverage_j = 0.0;

  bool operator==(const SimilarityEdge&) const = default;
};

struct FastaStats {
  std::size_t records = 0;
  std::size_t residues = 0;
  std::size_t remapped_bytes = 0;  // bytes outside the alphabet, stored as 'X'
};

std::vector<SequenceRecord> parse_fasta(std::istream& in, FastaStats* stats = nullptr);

/// Reads a FASTA file into records with dense ids in file order.
/// Throws InputError on I/O failure, an empty file, or a record without residues.
std::vector<SequenceRecord> read_fasta(const std::filesystem::path& path,
                                       FastaStats* stats = nullptr);

/// Writes records as FASTA, 60 residues per line.
void write_fasta(const std::filesystem::path& path, std::span<const SequenceRecord> records);

/// Formats a fraction with exactly four decimals (ties round to even).
std::string format_fraction(double value);

/// One output line without the trailing newline.
std::string format_edge(const SimilarityEdge& edge, std::string_view header_i,
                        std::string_view header_j);

/// Streams edges into a triplet file. Each append is flushed as a block so the
/// pipeline never buffers the whole graph.
class EdgeWriter {
 public:
  EdgeWriter(const std::filesystem::path& path, std::span<const SequenceRecord> records);
  ~EdgeWriter();
  EdgeWriter(const EdgeWriter&) = delete;
  EdgeWriter& operator=(const EdgeWriter&) = delete;

  void append(std::span<const SimilarityEdge> edges);
  std::size_t lines_written() const noexcept { return lines_; }
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::span<const SequenceRecord> records_;
  std::size_t lines_ = 0;
};

/// Writes all edges in the given order; returns the number of lines written.
std::size_t write_edges(const std::filesystem::path& path, std::span<const SimilarityEdge> edges,
                        std::span<const SequenceRecord> records);

/// Sorts the lines of an edge file lexicographically (byte order).
void canonicalize_output(const std::filesystem::path& in, const std::filesystem::path& out);

/// Canonical form of a set of lines, for in-memory comparisons.
std::vector<std::string> canonical_lines(std::vector<std::string> lines);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace pastis

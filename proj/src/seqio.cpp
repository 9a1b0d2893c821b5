#include "pastis/seqio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "pastis/alphabet.hpp"
#include "pastis/error.hpp"

namespace pastis {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string first_token(std::string_view line) {
  std::size_t b = 0;
  while (b < line.size() && is_space(line[b])) ++b;
  std::size_t e = b;
  while (e < line.size() && !is_space(line[e])) ++e;
  return std::string(line.substr(b, e - b));
}

}  // namespace

std::vector<SequenceRecord> parse_fasta(std::istream& in, FastaStats* stats) {
  std::vector<SequenceRecord> records;
  FastaStats local;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;

  auto finish_record = [&]() {
    if (!records.empty() && records.back().residues.empty()) {
      throw InputError("FASTA record '" + records.back().header + "' has an empty sequence");
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '>') {
      finish_record();
      SequenceRecord rec;
      rec.id = static_cast<SeqId>(records.size());
      rec.header = first_token(std::string_view(line).substr(1));
      records.push_back(std::move(rec));
      seen_header = true;
      continue;
    }
    bool blank = std::all_of(line.begin(), line.end(), is_space);
    if (blank) continue;
    if (!seen_header) {
      throw InputError("FASTA line " + std::to_string(line_no) + " precedes the first '>' header");
    }
    auto& residues = records.back().residues;
    for (char c : line) {
      if (is_space(c)) continue;
      auto rank = residue_rank(c);
      if (rank == kInvalidRank) {
        ++local.remapped_bytes;
        residues.push_back('X');
      } else {
        residues.push_back(kAlphabet[rank]);
      }
    }
  }
  if (in.bad()) throw InputError("I/O failure while reading FASTA");
  if (records.empty()) throw InputError("FASTA input contains no records");
  finish_record();

  local.records = records.size();
  for (const auto& r : records) local.residues += r.residues.size();
  if (stats) *stats = local;
  return records;
}

std::vector<SequenceRecord> read_fasta(const std::filesystem::path& path, FastaStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open FASTA file " + path.string());
  return parse_fasta(in, stats);
}

void write_fasta(const std::filesystem::path& path, std::span<const SequenceRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot create " + path.string());
  for (const auto& r : records) {
    out << '>' << r.header << '\n';
    for (std::size_t pos = 0; pos < r.residues.size(); pos += 60) {
      out << std::string_view(r.residues).substr(pos, 60) << '\n';
    }
  }
  if (!out) throw InputError("write failure on " + path.string());
}

std::string format_fraction(double value) {
  // glibc printf converts the exact binary value, so exact decimal ties
  // round to even.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

std::string format_edge(const SimilarityEdge& edge, std::string_view header_i,
                        std::string_view header_j) {
  std::string line;
  line.reserve(header_i.size() + header_j.size() + 40);
  line.append(header_i).push_back('\t');
  line.append(header_j).push_back('\t');
  line.append(std::to_string(edge.score)).push_back('\t');
  line.append(format_fraction(edge.identity)).push_back('\t');
  line.append(format_fraction(edge.coverage_i)).push_back('\t');
  line.append(format_fraction(edge.coverage_j));
  return line;
}

struct EdgeWriter::Impl {
  std::ofstream out;
  std::filesystem::path path;
};

EdgeWriter::EdgeWriter(const std::filesystem::path& path, std::span<const SequenceRecord> records)
    : impl_(std::make_unique<Impl>()), records_(records) {
  impl_->path = path;
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw InputError("cannot create output file " + path.string());
}

EdgeWriter::~EdgeWriter() {
  if (impl_ && impl_->out.is_open()) impl_->out.close();
}

void EdgeWriter::append(std::span<const SimilarityEdge> edges) {
  std::string chunk;
  for (const auto& e : edges) {
    if (e.i >= e.j) throw Error("non-canonical edge passed to writer");
    const auto& hi = records_[static_cast<std::size_t>(e.i)].header;
    const auto& hj = records_[static_cast<std::size_t>(e.j)].header;
    chunk += format_edge(e, hi, hj);
    chunk.push_back('\n');
  }
  impl_->out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  if (!impl_->out) throw InputError("write failure on " + impl_->path.string());
  lines_ += edges.size();
}

void EdgeWriter::close() {
  impl_->out.flush();
  if (!impl_->out) throw InputError("write failure on " + impl_->path.string());
  impl_->out.close();
}

std::size_t write_edges(const std::filesystem::path& path, std::span<const SimilarityEdge> edges,
                        std::span<const SequenceRecord> records) {
  EdgeWriter writer(path, records);
  writer.append(edges);
  writer.close();
  return writer.lines_written();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (in.bad()) throw InputError("I/O failure while reading " + path.string());
  return lines;
}

std::vector<std::string> canonical_lines(std::vector<std::string> lines) {
  std::sort(lines.begin(), lines.end());
  return lines;
}

void canonicalize_output(const std::filesystem::path& in, const std::filesystem::path& out) {
  auto lines = canonical_lines(read_lines(in));
  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot create " + out.string());
  for (const auto& l : lines) os << l << '\n';
  if (!os) throw InputError("write failure on " + out.string());
}

}  // namespace pastis

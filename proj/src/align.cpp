#include "pastis/align.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <thread>

#include "pastis/error.hpp"

namespace pastis {

void AlignParams::validate() const {
  if (gap_extend < 0 || gap_open < gap_extend) {
    throw ConfigError("gap penalties must satisfy gap_open >= gap_extend >= 0");
  }
  if (!matrix.symmetric()) throw ConfigError("substitution matrix is not symmetric");
  if (!(ani_threshold >= 0.0 && ani_threshold <= 1.0)) throw ConfigError("ANI threshold must be in [0,1]");
  if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0)) {
    throw ConfigError("coverage threshold must be in [0,1]");
  }
}

namespace {

constexpr int kNegInf = std::numeric_limits<int>::min() / 4;

// Traceback byte layout.
constexpr std::uint8_t kFromZero = 0;
constexpr std::uint8_t kFromDiag = 1;
constexpr std::uint8_t kFromUp = 2;
constexpr std::uint8_t kFromLeft = 3;
constexpr std::uint8_t kUpOpened = 1 << 2;
constexpr std::uint8_t kLeftOpened = 1 << 3;

void encode_ranks(std::string_view s, std::vector<std::uint8_t>& out) {
  out.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    auto r = residue_rank(s[k]);
    if (r == kInvalidRank) throw InputError(std::string("residue '") + s[k] + "' outside the alphabet");
    out[k] = r;
  }
}

}  // namespace

AlignmentResult smith_waterman(std::string_view a, std::string_view b, const AlignParams& params,
                               double* kernel_seconds) {
  if (a.empty() || b.empty()) throw InputError("smith_waterman: empty sequence");
  thread_local std::vector<std::uint8_t> ra, rb, trace;
  thread_local std::vector<int> h_prev, h_cur, f_col;
  encode_ranks(a, ra);
  encode_ranks(b, rb);
  const std::size_t m = ra.size();
  const std::size_t n = rb.size();
  const int go = params.gap_open;
  const int ge = params.gap_extend;
  const auto& sub = params.matrix;

  trace.assign(m * n, 0);
  h_prev.assign(n + 1, 0);
  h_cur.assign(n + 1, 0);
  f_col.assign(n + 1, kNegInf);

  int best = 0;
  std::size_t best_i = 0, best_j = 0;

  auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 1; i <= m; ++i) {
    const auto& row = sub.score[ra[i - 1]];
    std::uint8_t* tr = trace.data() + (i - 1) * n;
    int e = kNegInf;
    h_cur[0] = 0;
    for (std::size_t j = 1; j <= n; ++j) {
      std::uint8_t bits = 0;
      // Gap in b (vertical move): consumes a[i-1].
      int f_open = h_prev[j] - go;
      int f_ext = f_col[j] - ge;
      int f = f_open >= f_ext ? f_open : f_ext;
      if (f_open >= f_ext) bits |= kUpOpened;
      f_col[j] = f;
      // Gap in a (horizontal move): consumes b[j-1].
      int e_open = h_cur[j - 1] - go;
      int e_ext = e - ge;
      e = e_open >= e_ext ? e_open : e_ext;
      if (e_open >= e_ext) bits |= kLeftOpened;

      int diag = h_prev[j - 1] + row[rb[j - 1]];
      int h = 0;
      std::uint8_t src = kFromZero;
      if (diag > h) {
        h = diag;
        src = kFromDiag;
      }
      if (f > h) {
        h = f;
        src = kFromUp;
      }
      if (e > h) {
        h = e;
        src = kFromLeft;
      }
      h_cur[j] = h;
      tr[j - 1] = static_cast<std::uint8_t>(bits | src);
      if (h > best) {
        best = h;
        best_i = i;
        best_j = j;
      }
    }
    std::swap(h_prev, h_cur);
  }
  if (kernel_seconds) {
    *kernel_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  AlignmentResult res;
  res.cells = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n);
  res.score = best;
  if (best == 0) return res;

  enum class State { h, up, left };
  State state = State::h;
  std::size_t i = best_i, j = best_j;
  res.i_end = static_cast<int>(best_i) - 1;
  res.j_end = static_cast<int>(best_j) - 1;
  while (i > 0 && j > 0) {
    std::uint8_t cell = trace[(i - 1) * n + (j - 1)];
    if (state == State::h) {
      std::uint8_t src = cell & 3;
      if (src == kFromZero) break;
      if (src == kFromDiag) {
        res.matches += ra[i - 1] == rb[j - 1] ? 1 : 0;
        ++res.aln_len;
        res.i_begin = static_cast<int>(i) - 1;
        res.j_begin = static_cast<int>(j) - 1;
        --i;
        --j;
        continue;
      }
      state = src == kFromUp ? State::up : State::left;
      continue;
    }
    ++res.aln_len;
    if (state == State::up) {
      if (cell & kUpOpened) state = State::h;
      --i;
    } else {
      if (cell & kLeftOpened) state = State::h;
      --j;
    }
  }
  return res;
}

std::optional<SimilarityEdge> evaluate_pair(SeqId i, SeqId j, std::string_view a, std::string_view b,
                                            const AlignmentResult& result, const AlignParams& params) {
  if (i == j || result.empty() || a.empty() || b.empty()) return std::nullopt;
  double identity = static_cast<double>(result.matches) / static_cast<double>(result.aln_len);
  double cov_a = static_cast<double>(result.i_end - result.i_begin + 1) / static_cast<double>(a.size());
  double cov_b = static_cast<double>(result.j_end - result.j_begin + 1) / static_cast<double>(b.size());
  if (identity < params.ani_threshold || std::min(cov_a, cov_b) < params.coverage_threshold) {
    return std::nullopt;
  }
  if (i < j) return SimilarityEdge{i, j, result.score, identity, cov_a, cov_b};
  return SimilarityEdge{j, i, result.score, identity, cov_b, cov_a};
}

BatchResult align_batch(std::span<const AlignTask> tasks, std::span<const SequenceRecord> seqs,
                        const AlignParams& params, int lanes) {
  BatchResult out;
  out.results.resize(tasks.size());
  out.errors.resize(tasks.size());
  if (tasks.empty()) return out;

  const int workers = std::max(1, std::min<int>(lanes, static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  std::vector<BatchCounters> lane_counters(static_cast<std::size_t>(workers));

  auto lane = [&](int id) {
    auto& c = lane_counters[static_cast<std::size_t>(id)];
    for (std::size_t k = next.fetch_add(1); k < tasks.size(); k = next.fetch_add(1)) {
      const auto& t = tasks[k];
      try {
        if (t.i < 0 || t.j < 0 || static_cast<std::size_t>(t.i) >= seqs.size() ||
            static_cast<std::size_t>(t.j) >= seqs.size()) {
          throw InputError("task refers to unknown sequence id");
        }
        out.results[k] = smith_waterman(seqs[static_cast<std::size_t>(t.i)].residues,
                                        seqs[static_cast<std::size_t>(t.j)].residues, params,
                                        &c.kernel_seconds);
        c.alignments += 1;
        c.cells += out.results[k].cells;
      } catch (const std::exception& e) {
        out.errors[k] = e.what();
      }
    }
  };

  if (workers == 1) {
    lane(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(lane, w);
  }
  for (const auto& c : lane_counters) {
    out.counters.alignments += c.alignments;
    out.counters.cells += c.cells;
    out.counters.kernel_seconds += c.kernel_seconds;
  }
  return out;
}

}  // namespace pastis

#include "pastis/synthetic.hpp"

#include <cstdio>
#include <random>
#include <string>
#include <string_view>

#include "pastis/error.hpp"

namespace pastis {

namespace {

constexpr std::string_view kStandard = "ARNDCQEGHILKMFPSTWYV";

// std::uniform_*_distribution are implementation-defined; these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  char residue() { return kStandard[below(kStandard.size())]; }

 private:
  std::mt19937_64 engine_;
};

std::string mutate(const std::string& root, const CorpusSpec& spec, Rng& rng) {
  const auto len = static_cast<int>(root.size());
  int trim_max = static_cast<int>(spec.max_trim * len);
  int lo = rng.between(0, trim_max);
  int hi = len - rng.between(0, trim_max);
  std::string out;
  out.reserve(root.size() + 16);
  for (int k = lo; k < hi; ++k) {
    double u = rng.unit();
    if (u < spec.indel_rate / 2) continue;  // deletion
    if (u < spec.indel_rate) out += rng.residue();  // insertion before this residue
    out += rng.unit() < spec.substitution_rate ? rng.residue() : root[static_cast<std::size_t>(k)];
  }
  while (static_cast<int>(out.size()) < spec.min_len) out += rng.residue();
  if (static_cast<int>(out.size()) > spec.max_len) out.resize(static_cast<std::size_t>(spec.max_len));
  return out;
}

}  // namespace

void CorpusSpec::validate() const {
  if (min_len < 1 || max_len < min_len) throw ConfigError("corpus lengths must satisfy 1 <= min <= max");
  if (family_size < 1) throw ConfigError("family size must be >= 1");
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(substitution_rate) || !rate_ok(indel_rate) || !rate_ok(max_trim)) {
    throw ConfigError("corpus rates must be in [0,1]");
  }
}

std::vector<SequenceRecord> generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<std::string> residues;
  residues.reserve(spec.n);
  while (residues.size() < spec.n) {
    std::string root(static_cast<std::size_t>(rng.between(spec.min_len, spec.max_len)), 'A');
    for (char& c : root) c = rng.residue();
    residues.push_back(root);
    for (int m = 1; m < spec.family_size && residues.size() < spec.n; ++m) {
      residues.push_back(mutate(root, spec, rng));
    }
  }
  for (std::size_t k = residues.size(); k > 1; --k) {
    std::swap(residues[k - 1], residues[rng.below(k)]);
  }
  std::vector<SequenceRecord> out;
  out.reserve(spec.n);
  char header[32];
  for (std::size_t k = 0; k < residues.size(); ++k) {
    std::snprintf(header, sizeof header, "s%05zu", k);
    out.push_back({static_cast<SeqId>(k), header, std::move(residues[k])});
  }
  return out;
}

}  // namespace pastis

#pragma once

// Black-box probing through the Classifier interface only: each token is
// occluded by spaces and the drop in the seed's predicted-class confidence
// measures its contribution.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "advtext/saliency.hpp"

namespace advtext {

/// One probe per token, in token order. Each code point of the token
/// becomes one space; everything else is untouched.
std::vector<std::string> gen_probes(const Doc& doc);

struct DeviationTable {
  ConfVector seed;
  std::size_t seed_class = 0;
  std::vector<ConfVector> probe_conf;  // per token
  std::vector<double> deviation;       // seed[seed_class] - probe[seed_class]
  std::size_t calls = 0;               // classifications spent

  bool operator==(const DeviationTable&) const = default;
};

/// A probe classification failed; the whole table is discarded.
class ProbeError : public Error {
 public:
  ProbeError(std::size_t token, const std::string& what);
  std::size_t token() const { return token_; }

 private:
  std::size_t token_;
};

struct OcclusionConfig {
  std::size_t jobs = 1;
  std::size_t top_k = 3;
};

/// Classifies the seed once and every probe once. `order`, when given, is
/// a permutation of token indices fixing the evaluation order.
DeviationTable deviations(const Classifier& model, const Doc& doc, std::size_t jobs = 1,
                          std::span<const std::size_t> order = {});

/// Top-k tokens by deviation (ties: earlier token); adjacent ones merge.
std::vector<HotSpan> hsps_black(const DeviationTable& table, const Doc& doc, std::size_t k = 3);
std::vector<HotSpan> hsps_black(const Classifier& model, const Doc& doc, const OcclusionConfig& config = {});

/// Index of the largest-deviation token (ties: earlier), or -1 without tokens.
std::ptrdiff_t top_token(const DeviationTable& table);

/// Counts each sample's single largest-deviation word toward its label.
MiningResult mine_htps_black(const Classifier& model, const std::vector<Doc>& training, std::size_t top_n = 10,
                             const OcclusionConfig& config = {});

/// `index<TAB>probe` per line.
void write_probe_dump(std::ostream& out, const Doc& doc);

}  // namespace advtext

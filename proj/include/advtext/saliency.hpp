#pragma once

// White-box identification of classification-important text: gradient
// scores per character or word, hot characters -> hot words -> hot phrases,
// corpus-level hot training phrases, and the sign-gradient baseline.

#include <optional>
#include <string>
#include <vector>

#include "advtext/models.hpp"

namespace advtext {

struct CharScore {
  std::size_t offset = 0;  // byte offset of the character
  double score = 0.0;      // max over alphabet dimensions of |dJ/dx|
};

enum class SpanKind { word, phrase };

/// A run of tokens [begin, end) and the exact text it covers.
struct HotSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string surface;
  double score = 0.0;
  SpanKind kind = SpanKind::word;

  bool operator==(const HotSpan&) const = default;
};

struct HotItems {
  std::vector<std::size_t> hot_chars;  // byte offsets, best first
  std::vector<std::size_t> hot_words;  // token indices, ascending
  std::vector<HotSpan> phrases;        // descending score
  std::vector<double> token_scores;    // per token: the score phrases sum
};

struct SaliencyConfig {
  std::size_t char_top_k = 50;
  std::size_t min_hot_chars = 3;
  std::size_t word_top_k = 5;
  std::size_t jobs = 1;
};

/// One score per encoded character of `doc` (characters past the input
/// window are dropped). Requires a character model.
std::vector<CharScore> char_scores(const Classifier& model, const Doc& doc, std::size_t class_index);

/// Top-k characters by score (ties: smaller offset), tokens with at least
/// `min_hot_chars` of them, and maximal runs of adjacent hot tokens.
/// A hot token's score is the sum of its hot characters' scores.
HotItems hot_items(const Doc& doc, const std::vector<CharScore>& scores, std::size_t k = 50,
                   std::size_t min_hot_chars = 3);

/// Per token: max |dJ/de| over its embedding row; 0 for tokens past the
/// input window. Requires a word model.
std::vector<double> word_scores(const Classifier& model, const Doc& doc, std::size_t class_index);

/// Top-k tokens by score (ties: earlier token) assembled into phrases.
HotItems hot_words(const Doc& doc, const std::vector<double>& scores, std::size_t k = 5);

/// Groups hot tokens into maximal adjacent runs scored by the sum of
/// member scores, sorted by descending score (ties: earlier span).
std::vector<HotSpan> assemble_phrases(const Doc& doc, std::vector<std::size_t> hot_tokens,
                                      const std::vector<double>& token_score);

/// Hot characters, words and phrases of `doc` w.r.t. `class_index` for any
/// neural model; throws "no gradients available" for external ones.
HotItems saliency_items(const Classifier& model, const Doc& doc, std::size_t class_index,
                        const SaliencyConfig& config = {});

/// Hot phrases of `doc` w.r.t. `class_index` for any neural model.
std::vector<HotSpan> hot_phrases(const Classifier& model, const Doc& doc, std::size_t class_index,
                                 const SaliencyConfig& config = {});

/// Hot sample phrases w.r.t. the model's current prediction.
std::vector<HotSpan> hsps(const Classifier& model, const Doc& doc, const SaliencyConfig& config = {});

struct HtpEntry {
  std::string phrase;
  std::string cls;
  std::size_t frequency = 0;
  std::size_t rank = 0;

  bool operator==(const HtpEntry&) const = default;
};

struct ClassHtps {
  std::string cls;
  std::vector<HtpEntry> entries;

  bool operator==(const ClassHtps&) const = default;
};

struct HtpTable {
  std::vector<ClassHtps> classes;

  const std::vector<HtpEntry>* find(const std::string& cls) const;
  bool operator==(const HtpTable&) const = default;
};

/// Hot phrases emitted for one training sample.
struct PhraseDump {
  std::string sample_id;
  std::string cls;
  std::vector<std::string> phrases;
};

struct MiningResult {
  HtpTable table;
  std::vector<PhraseDump> dump;
};

/// Lowercase, internal whitespace collapsed to single spaces, trimmed.
std::string normalize_phrase(std::string_view phrase);

/// Counts normalized phrases per class; top `top_n` per class by frequency
/// (ties: phrase order). `classes` fixes the class order of the table.
HtpTable count_htps(const std::vector<PhraseDump>& dump, const std::vector<std::string>& classes,
                    std::size_t top_n);

/// Hot phrases of every labeled sample w.r.t. its true label, counted.
MiningResult mine_htps(const Classifier& model, const std::vector<Doc>& training, std::size_t top_n = 10,
                       const SaliencyConfig& config = {});

struct FgsmResult {
  double epsilon = 0.0;
  std::size_t source_class = 0;
  std::optional<std::size_t> target_class;
  nn::Tensor perturbed;
  std::string text;  // rendering of `perturbed`
  ConfVector original_conf;
  ConfVector perturbed_conf;
  double changed_fraction = 0.0;  // encoded characters whose reading changed
  bool gibberish = false;         // at least 30% of characters changed
  std::size_t flips = 0;
  std::string flipped_text;  // n-position variant
  ConfVector flipped_conf;
};

/// Sign-gradient perturbation of a character grid. Untargeted it ascends
/// the cost of the true (or predicted) class; with a target it descends the
/// target cost. The grid is clipped to [0, 1]. `flips` selects how many of
/// the highest-gradient positions the sparse variant rewrites.
FgsmResult fgsm_baseline(const Classifier& model, const Doc& doc, double epsilon, std::size_t flips = 0,
                         std::optional<std::size_t> target = std::nullopt);

}  // namespace advtext

#pragma once

// Insertion, modification and removal edits on Docs. Every edit is a splice
// (offset, removed text, inserted text), so applying and reverting are exact
// inverses and a stale edit is detected by comparing the spliced text.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "advtext/saliency.hpp"

namespace advtext {

enum class PerturbKind { insert, modify, remove };
enum class PerturbMethod { htp_token, parenthetical, user_snippet, misspelling, homoglyph, paraphrase, dispensable_removal };

std::string to_string(PerturbKind kind);
std::string to_string(PerturbMethod method);
PerturbKind parse_perturb_kind(const std::string& name);
PerturbMethod parse_perturb_method(const std::string& name);

/// Typo-class methods change the spelling of a single word.
bool is_typo(PerturbMethod method);

struct Perturbation {
  PerturbKind kind = PerturbKind::insert;
  PerturbMethod method = PerturbMethod::htp_token;
  std::size_t start = 0;  // byte offset of the splice
  std::string removed;    // text at `start` before the edit
  std::string inserted;   // text at `start` after the edit
  std::size_t token_begin = 0;  // token range touched (insert: token at the anchor)
  std::size_t token_end = 0;
  std::string provenance;  // the HTP, HSP or lexicon entry that produced it
  std::string base;        // fingerprint of the text it was proposed for

  /// Code points changed: inserted or removed length, or the edit distance.
  std::size_t changed_chars() const;
  bool operator==(const Perturbation&) const = default;
};

/// fnv1a of the text, as hex.
std::string fingerprint(std::string_view text);

/// Throws InvalidArgument ("stale") when `p` was proposed for another text.
Doc apply(const Doc& doc, const Perturbation& p);
/// Inverse of apply on the text it produced.
Doc revert(const Doc& doc, const Perturbation& p);

struct PerturbLexicons {
  std::map<std::string, std::vector<std::string>> misspellings;  // lowercase word -> variants
  std::vector<std::pair<char32_t, char32_t>> homoglyphs;          // char -> look-alike, multimap
  std::vector<std::pair<std::string, std::string>> paraphrases;   // phrase -> replacement
  std::set<std::string> dispensable;                              // lowercase words
  std::vector<std::string> templates;                             // with <htp> and <year> slots
  int year = 1996;

  bool operator==(const PerturbLexicons&) const = default;
};

/// Insertion payload at an offset, typed by the user.
struct Snippet {
  std::size_t offset = 0;
  std::string text;
};

/// Fills the `<htp>` slots in order and `<year>` with the configured year.
std::string instantiate_template(const std::string& tmpl, const std::vector<std::string>& htps, int year);
std::size_t template_slots(const std::string& tmpl);

/// Builds an insert of `payload` at `offset`, padded with single spaces
/// where the neighbors are not spaces. A payload starting with , ; : or .
/// gets no leading space.
Perturbation make_insertion(const Doc& doc, std::size_t offset, std::string payload, PerturbMethod method,
                            std::string provenance);

/// Single HTP tokens before and after each HSP, templates after each HSP,
/// and user snippets; at most `m`, duplicates dropped. Without HSPs the
/// anchors are the text start and end.
std::vector<Perturbation> propose_insertions(const Doc& doc, const std::vector<HotSpan>& hsps,
                                             const std::vector<std::string>& htps, const PerturbLexicons& lex,
                                             std::size_t m, const std::vector<Snippet>& snippets = {});

/// Byte ranges of words that already carry a typo.
using TypoLocks = std::vector<std::pair<std::size_t, std::size_t>>;

/// Misspellings and one-character homoglyph variants of HSP words, and
/// paraphrases of phrases overlapping an HSP; at most `m`. Words overlapping
/// a lock get no further typos.
std::vector<Perturbation> propose_modifications(const Doc& doc, const std::vector<HotSpan>& hsps,
                                                const PerturbLexicons& lex, std::size_t m,
                                                const TypoLocks& locks = {});

/// One removal per HSP word in the dispensable lexicon; at most `m`. The word
/// goes with its trailing space, or its leading one when it ends the text.
std::vector<Perturbation> propose_removals(const Doc& doc, const std::vector<HotSpan>& hsps,
                                           const PerturbLexicons& lex, std::size_t m);

/// Moves locks past an applied edit. Locks the edit overlaps are dropped; a
/// typo edit adds a lock over its own span.
void update_locks(TypoLocks& locks, const Perturbation& p);

struct GridDelta {
  std::size_t row = 0;
  std::size_t column = 0;
  double delta = 0.0;
};

struct DirectionCheck {
  double source = 0.0;  // grad J(t, c) . dx
  double target = 0.0;  // grad J(t, c') . dx
  bool passes = false;  // source > 0 and target < 0
  std::vector<GridDelta> changes;
};

/// Directional derivatives of both costs along the grid change of `p`.
/// Requires a character model and a modify edit.
DirectionCheck direction_check(const Classifier& model, const Doc& doc, const Perturbation& p, std::size_t source,
                               std::size_t target);

/// Levenshtein distance over code points.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// edit_distance(original, edited) / code points of original.
double changed_fraction(std::string_view original, std::string_view edited);

}  // namespace advtext

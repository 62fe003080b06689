#include "advtext/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "advtext/utf8.hpp"

namespace advtext {

namespace {

const char* const kind_names[] = {"insert", "modify", "remove"};
const char* const method_names[] = {"htp-token",  "parenthetical", "user-snippet",       "misspelling",
                                    "homoglyph", "paraphrase",    "dispensable-removal"};

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

// Byte range of a token without leading/trailing ASCII punctuation.
struct Core {
  std::size_t begin;
  std::size_t end;
};

Core core_of(const Token& t) {
  std::size_t b = 0;
  std::size_t e = t.word.size();
  while (b < e && is_ascii_punct(t.word[b])) ++b;
  while (e > b && is_ascii_punct(t.word[e - 1])) --e;
  return {t.begin + b, t.begin + e};
}

std::string lower(std::string_view s) { return utf8::to_lower_ascii(s); }

std::string match_case(const std::string& variant, std::string_view original) {
  std::string out = variant;
  if (!original.empty() && !out.empty() && std::isupper(static_cast<unsigned char>(original[0]))) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

Perturbation splice(const Doc& doc, PerturbKind kind, PerturbMethod method, std::size_t start, std::size_t end,
                    std::string inserted, std::size_t tb, std::size_t te, std::string provenance) {
  Perturbation p;
  p.kind = kind;
  p.method = method;
  p.start = start;
  p.removed = doc.text.substr(start, end - start);
  p.inserted = std::move(inserted);
  p.token_begin = tb;
  p.token_end = te;
  p.provenance = std::move(provenance);
  p.base = fingerprint(doc.text);
  return p;
}

// Accumulates candidates, dropping duplicates and stopping at the cap.
class Pool {
 public:
  explicit Pool(std::size_t cap) : cap_(cap) {}
  bool full() const { return out_.size() >= cap_; }
  void add(Perturbation p) {
    if (full()) return;
    if (p.removed == p.inserted) return;
    std::string key = std::to_string(p.start) + '\x1f' + p.removed + '\x1f' + p.inserted;
    if (seen_.insert(std::move(key)).second) out_.push_back(std::move(p));
  }
  std::vector<Perturbation> take() { return std::move(out_); }

 private:
  std::size_t cap_;
  std::unordered_set<std::string> seen_;
  std::vector<Perturbation> out_;
};

// Round-robin over several candidate lists.
void interleave(Pool& pool, std::vector<std::vector<Perturbation>> lists) {
  std::size_t i = 0;
  bool any = true;
  while (any && !pool.full()) {
    any = false;
    for (auto& l : lists) {
      if (i < l.size()) {
        pool.add(std::move(l[i]));
        any = true;
      }
    }
    ++i;
  }
}

// Ordered selections of `slots` distinct items among the first `pool` ones.
void selections(std::size_t pool, std::size_t slots, std::vector<std::size_t>& cur,
                std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == slots) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = 0; i < pool; ++i) {
    if (std::find(cur.begin(), cur.end(), i) != cur.end()) continue;
    cur.push_back(i);
    selections(pool, slots, cur, out);
    cur.pop_back();
  }
}

bool locked(const TypoLocks& locks, std::size_t b, std::size_t e) {
  for (const auto& [lb, le] : locks) {
    if (b < le && lb < e) return true;
  }
  return false;
}

}  // namespace

std::string to_string(PerturbKind kind) { return kind_names[static_cast<int>(kind)]; }
std::string to_string(PerturbMethod method) { return method_names[static_cast<int>(method)]; }

PerturbKind parse_perturb_kind(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == kind_names[i]) return static_cast<PerturbKind>(i);
  }
  throw InvalidArgument("unknown perturbation kind '" + name + "'");
}

PerturbMethod parse_perturb_method(const std::string& name) {
  for (int i = 0; i < 7; ++i) {
    if (name == method_names[i]) return static_cast<PerturbMethod>(i);
  }
  throw InvalidArgument("unknown perturbation method '" + name + "'");
}

bool is_typo(PerturbMethod method) { return method == PerturbMethod::misspelling || method == PerturbMethod::homoglyph; }

std::size_t Perturbation::changed_chars() const {
  switch (kind) {
    case PerturbKind::insert:
      return utf8::length(inserted);
    case PerturbKind::remove:
      return utf8::length(removed);
    case PerturbKind::modify:
      break;
  }
  return edit_distance(removed, inserted);
}

std::string fingerprint(std::string_view text) { return hex64(fnv1a(text)); }

Doc apply(const Doc& doc, const Perturbation& p) {
  if (p.base != fingerprint(doc.text) || p.start > doc.text.size() ||
      doc.text.compare(p.start, p.removed.size(), p.removed) != 0) {
    throw InvalidArgument("stale perturbation: the text changed since it was proposed");
  }
  std::string text = doc.text;
  text.replace(p.start, p.removed.size(), p.inserted);
  return Doc::make(doc.id, std::move(text), doc.label);
}

Doc revert(const Doc& doc, const Perturbation& p) {
  if (p.start > doc.text.size() || doc.text.compare(p.start, p.inserted.size(), p.inserted) != 0) {
    throw InvalidArgument("stale perturbation: the text does not carry this edit");
  }
  std::string text = doc.text;
  text.replace(p.start, p.inserted.size(), p.removed);
  if (fingerprint(text) != p.base) throw InvalidArgument("stale perturbation: reverting does not restore its base");
  return Doc::make(doc.id, std::move(text), doc.label);
}

std::size_t template_slots(const std::string& tmpl) {
  std::size_t n = 0;
  for (auto pos = tmpl.find("<htp>"); pos != std::string::npos; pos = tmpl.find("<htp>", pos + 5)) ++n;
  return n;
}

std::string instantiate_template(const std::string& tmpl, const std::vector<std::string>& htps, int year) {
  std::string out;
  std::size_t slot = 0;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 5, "<htp>") == 0) {
      if (slot >= htps.size()) throw InvalidArgument("template '" + tmpl + "' has more slots than phrases");
      out += htps[slot++];
      i += 5;
    } else if (tmpl.compare(i, 6, "<year>") == 0) {
      out += std::to_string(year);
      i += 6;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

Perturbation make_insertion(const Doc& doc, std::size_t offset, std::string payload, PerturbMethod method,
                            std::string provenance) {
  if (offset > doc.text.size()) throw InvalidArgument("insertion offset past the end of the text");
  if (payload.empty()) throw InvalidArgument("insertion payload is empty");
  const std::string& t = doc.text;
  const bool joins_left = payload[0] == ',' || payload[0] == ';' || payload[0] == ':' || payload[0] == '.';
  if (offset > 0 && !utf8::is_space(t[offset - 1]) && !joins_left && !utf8::is_space(payload.front())) {
    payload.insert(payload.begin(), ' ');
  }
  if (offset < t.size() && !utf8::is_space(t[offset]) && !utf8::is_space(payload.back())) payload += ' ';
  std::size_t anchor = 0;
  while (anchor + 1 < doc.tokens.size() && doc.tokens[anchor].end < offset) ++anchor;
  return splice(doc, PerturbKind::insert, method, offset, offset, std::move(payload), anchor, anchor,
                std::move(provenance));
}

std::vector<Perturbation> propose_insertions(const Doc& doc, const std::vector<HotSpan>& hsps,
                                             const std::vector<std::string>& htps, const PerturbLexicons& lex,
                                             std::size_t m, const std::vector<Snippet>& snippets) {
  Pool pool(m);
  for (const auto& s : snippets) {
    if (s.text.empty()) continue;
    pool.add(make_insertion(doc, s.offset, s.text, PerturbMethod::user_snippet, "user"));
  }
  if (htps.empty()) return pool.take();

  // Anchors: (before offset, after offset) per HSP, or the text ends.
  std::vector<std::pair<std::size_t, std::size_t>> anchors;
  for (const auto& h : hsps) anchors.emplace_back(doc.tokens.at(h.begin).begin, doc.tokens.at(h.end - 1).end);
  if (anchors.empty()) anchors.emplace_back(0, doc.text.size());

  std::vector<Perturbation> singles;
  for (const auto& htp : htps) {
    for (const auto& [before, after] : anchors) {
      singles.push_back(make_insertion(doc, before, htp, PerturbMethod::htp_token, htp));
      singles.push_back(make_insertion(doc, after, htp, PerturbMethod::htp_token, htp));
    }
  }
  std::vector<Perturbation> parens;
  const std::size_t top = std::min<std::size_t>(htps.size(), 4);
  for (const auto& [before, after] : anchors) {
    for (const auto& tmpl : lex.templates) {
      const std::size_t slots = template_slots(tmpl);
      if (slots == 0 || slots > 3 || slots > top) continue;
      std::vector<std::vector<std::size_t>> picks;
      std::vector<std::size_t> cur;
      selections(top, slots, cur, picks);
      for (const auto& pick : picks) {
        std::vector<std::string> fill;
        std::string prov;
        for (std::size_t i : pick) {
          fill.push_back(htps[i]);
          prov += (prov.empty() ? "" : "+") + htps[i];
        }
        parens.push_back(make_insertion(doc, after, instantiate_template(tmpl, fill, lex.year),
                                        PerturbMethod::parenthetical, prov));
      }
    }
  }
  interleave(pool, {std::move(singles), std::move(parens)});
  return pool.take();
}

std::vector<Perturbation> propose_modifications(const Doc& doc, const std::vector<HotSpan>& hsps,
                                                const PerturbLexicons& lex, std::size_t m, const TypoLocks& locks) {
  std::vector<Perturbation> miss;
  std::vector<Perturbation> glyph;
  std::vector<Perturbation> para;
  std::set<std::size_t> done;
  for (const auto& h : hsps) {
    for (std::size_t t = h.begin; t < h.end; ++t) {
      if (!done.insert(t).second) continue;
      const Core c = core_of(doc.tokens[t]);
      if (c.begin == c.end || locked(locks, c.begin, c.end)) continue;
      const std::string word = doc.text.substr(c.begin, c.end - c.begin);
      if (auto it = lex.misspellings.find(lower(word)); it != lex.misspellings.end()) {
        for (const auto& v : it->second) {
          miss.push_back(splice(doc, PerturbKind::modify, PerturbMethod::misspelling, c.begin, c.end,
                                match_case(v, word), t, t + 1, lower(word) + "->" + v));
        }
      }
      for (const auto& cp : utf8::decode(word)) {
        for (const auto& [from, to] : lex.homoglyphs) {
          if (from != cp.value) continue;
          std::string v = word;
          v.replace(cp.offset, cp.length, utf8::encode(to));
          glyph.push_back(splice(doc, PerturbKind::modify, PerturbMethod::homoglyph, c.begin, c.end, v, t, t + 1,
                                 utf8::encode(from) + "->" + utf8::encode(to)));
        }
      }
    }
  }
  for (const auto& [phrase, replacement] : lex.paraphrases) {
    std::vector<std::string> key;
    for (const auto& tok : tokenize(phrase)) key.push_back(lower(tok.word));
    if (key.empty() || key.size() > doc.tokens.size()) continue;
    for (std::size_t i = 0; i + key.size() <= doc.tokens.size(); ++i) {
      bool match = true;
      for (std::size_t k = 0; k < key.size() && match; ++k) {
        const Core c = core_of(doc.tokens[i + k]);
        match = lower(std::string_view(doc.text).substr(c.begin, c.end - c.begin)) == key[k];
      }
      if (!match) continue;
      const std::size_t j = i + key.size();
      const bool hot = std::any_of(hsps.begin(), hsps.end(), [&](const HotSpan& h) { return i < h.end && h.begin < j; });
      if (!hot) continue;
      const std::size_t b = core_of(doc.tokens[i]).begin;
      const std::size_t e = core_of(doc.tokens[j - 1]).end;
      para.push_back(splice(doc, PerturbKind::modify, PerturbMethod::paraphrase, b, e, replacement, i, j,
                            phrase + "->" + replacement));
    }
  }
  Pool pool(m);
  interleave(pool, {std::move(para), std::move(miss), std::move(glyph)});
  return pool.take();
}

std::vector<Perturbation> propose_removals(const Doc& doc, const std::vector<HotSpan>& hsps,
                                           const PerturbLexicons& lex, std::size_t m) {
  Pool pool(m);
  std::set<std::size_t> done;
  const std::string& text = doc.text;
  for (const auto& h : hsps) {
    for (std::size_t t = h.begin; t < h.end; ++t) {
      if (!done.insert(t).second) continue;
      const Token& tok = doc.tokens[t];
      const Core c = core_of(tok);
      if (c.begin == c.end || c.begin != tok.begin) continue;
      const std::string word = text.substr(c.begin, c.end - c.begin);
      if (!lex.dispensable.count(lower(word))) continue;
      std::size_t b = c.begin;
      std::size_t e = c.end;
      if (c.end == tok.end && e < text.size() && utf8::is_space(text[e])) {
        ++e;
      } else if (b > 0 && utf8::is_space(text[b - 1])) {
        --b;
      }
      pool.add(splice(doc, PerturbKind::remove, PerturbMethod::dispensable_removal, b, e, "", t, t + 1, lower(word)));
    }
  }
  return pool.take();
}

void update_locks(TypoLocks& locks, const Perturbation& p) {
  const std::size_t end = p.start + p.removed.size();
  const auto shift = static_cast<std::ptrdiff_t>(p.inserted.size()) - static_cast<std::ptrdiff_t>(p.removed.size());
  TypoLocks out;
  for (const auto& [b, e] : locks) {
    if (e <= p.start) {
      out.emplace_back(b, e);
    } else if (b >= end) {
      out.emplace_back(b + shift, e + shift);
    }
  }
  if (is_typo(p.method)) out.emplace_back(p.start, p.start + p.inserted.size());
  locks = std::move(out);
}

DirectionCheck direction_check(const Classifier& model, const Doc& doc, const Perturbation& p, std::size_t source,
                               std::size_t target) {
  const auto* m = dynamic_cast<const CharCnn*>(&model);
  if (!m) throw InvalidArgument("direction check needs a character model");
  if (p.kind != PerturbKind::modify) throw InvalidArgument("direction check applies to modifications only");
  if (source >= model.class_count() || target >= model.class_count()) {
    throw InvalidArgument("class index out of range");
  }
  const Doc after = apply(doc, p);
  const nn::Tensor x0 = m->encode_grid(doc.text).grid;
  const nn::Tensor x1 = m->encode_grid(after.text).grid;
  const InputGradient gs = m->input_gradient(doc, source);
  const InputGradient gt = m->input_gradient(doc, target);
  DirectionCheck out;
  const std::size_t cols = x0.dim(1);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double d = x1[i] - x0[i];
    if (d == 0.0) continue;
    out.changes.push_back({i / cols, i % cols, d});
    out.source += gs.grad[i] * d;
    out.target += gt.grad[i] * d;
  }
  out.passes = out.source > 0.0 && out.target < 0.0;
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<char32_t> x;
  std::vector<char32_t> y;
  for (const auto& c : utf8::decode(a)) x.push_back(c.value);
  for (const auto& c : utf8::decode(b)) y.push_back(c.value);
  std::vector<std::size_t> prev(y.size() + 1);
  std::vector<std::size_t> cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

double changed_fraction(std::string_view original, std::string_view edited) {
  const std::size_t n = utf8::length(original);
  if (n == 0) return edited.empty() ? 0.0 : 1.0;
  return static_cast<double>(edit_distance(original, edited)) / static_cast<double>(n);
}

}  // namespace advtext

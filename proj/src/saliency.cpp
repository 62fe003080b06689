#include "advtext/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "advtext/parallel.hpp"
#include "advtext/utf8.hpp"

namespace advtext {

namespace {

const CharCnn& require_char(const Classifier& model) {
  const auto* c = dynamic_cast<const CharCnn*>(&model);
  if (!c) throw InvalidArgument("model '" + model.id() + "' is not a character model (use word_scores)");
  return *c;
}

const WordCnn& require_word(const Classifier& model) {
  const auto* w = dynamic_cast<const WordCnn*>(&model);
  if (!w) throw InvalidArgument("model '" + model.id() + "' is not a word model (use char_scores)");
  return *w;
}

void check_class(const Classifier& model, std::size_t cls) {
  if (cls >= model.class_count()) {
    throw InvalidArgument("class index " + std::to_string(cls) + " out of range for " +
                          std::to_string(model.class_count()) + " classes");
  }
}

double row_max_abs(std::span<const double> row) {
  double m = 0.0;
  for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

// Token index containing byte `offset`, or -1 when it falls on whitespace.
std::ptrdiff_t token_at(const std::vector<Token>& tokens, std::size_t offset) {
  auto it = std::upper_bound(tokens.begin(), tokens.end(), offset,
                             [](std::size_t off, const Token& t) { return off < t.begin; });
  if (it == tokens.begin()) return -1;
  --it;
  return offset < it->end ? it - tokens.begin() : -1;
}

}  // namespace

std::vector<CharScore> char_scores(const Classifier& model, const Doc& doc, std::size_t class_index) {
  const CharCnn& m = require_char(model);
  check_class(model, class_index);
  const InputGradient g = m.input_gradient(doc, class_index);
  std::vector<CharScore> out;
  for (std::size_t r = 0; r < g.row_source.size(); ++r) {
    if (g.row_source[r] < 0) break;
    out.push_back({static_cast<std::size_t>(g.row_source[r]), row_max_abs(g.grad.row(r))});
  }
  return out;
}

std::vector<HotSpan> assemble_phrases(const Doc& doc, std::vector<std::size_t> hot_tokens,
                                      const std::vector<double>& token_score) {
  std::sort(hot_tokens.begin(), hot_tokens.end());
  hot_tokens.erase(std::unique(hot_tokens.begin(), hot_tokens.end()), hot_tokens.end());
  std::vector<HotSpan> spans;
  for (std::size_t i = 0; i < hot_tokens.size();) {
    std::size_t j = i + 1;
    while (j < hot_tokens.size() && hot_tokens[j] == hot_tokens[j - 1] + 1) ++j;
    HotSpan s;
    s.begin = hot_tokens[i];
    s.end = hot_tokens[j - 1] + 1;
    for (std::size_t t = s.begin; t < s.end; ++t) s.score += token_score.at(t);
    const std::size_t b = doc.tokens.at(s.begin).begin;
    s.surface = doc.text.substr(b, doc.tokens.at(s.end - 1).end - b);
    s.kind = s.end - s.begin > 1 ? SpanKind::phrase : SpanKind::word;
    spans.push_back(std::move(s));
    i = j;
  }
  std::stable_sort(spans.begin(), spans.end(), [](const HotSpan& a, const HotSpan& b) { return a.score > b.score; });
  return spans;
}

HotItems hot_items(const Doc& doc, const std::vector<CharScore>& scores, std::size_t k, std::size_t min_hot_chars) {
  if (k == 0) throw InvalidArgument("top-k must be at least 1");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
    return scores[a].offset < scores[b].offset;
  });
  order.resize(std::min(k, order.size()));

  HotItems out;
  std::vector<std::size_t> count(doc.tokens.size(), 0);
  std::vector<double> word_score(doc.tokens.size(), 0.0);
  for (std::size_t i : order) {
    out.hot_chars.push_back(scores[i].offset);
    const auto t = token_at(doc.tokens, scores[i].offset);
    if (t < 0) continue;
    ++count[t];
    word_score[t] += scores[i].score;
  }
  for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
    if (count[t] >= min_hot_chars) out.hot_words.push_back(t);
  }
  out.phrases = assemble_phrases(doc, out.hot_words, word_score);
  out.token_scores = std::move(word_score);
  return out;
}

std::vector<double> word_scores(const Classifier& model, const Doc& doc, std::size_t class_index) {
  const WordCnn& m = require_word(model);
  check_class(model, class_index);
  const InputGradient g = m.input_gradient(doc, class_index);
  std::vector<double> out(doc.tokens.size(), 0.0);
  for (std::size_t r = 0; r < g.row_source.size(); ++r) {
    if (g.row_source[r] < 0) continue;
    out.at(static_cast<std::size_t>(g.row_source[r])) = row_max_abs(g.grad.row(r));
  }
  return out;
}

HotItems hot_words(const Doc& doc, const std::vector<double>& scores, std::size_t k) {
  if (k == 0) throw InvalidArgument("top-k must be at least 1");
  if (scores.size() != doc.tokens.size()) throw InvalidArgument("one score per token expected");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(k, order.size()));
  HotItems out;
  out.hot_words = order;
  std::sort(out.hot_words.begin(), out.hot_words.end());
  out.phrases = assemble_phrases(doc, out.hot_words, scores);
  out.token_scores = scores;
  return out;
}

HotItems saliency_items(const Classifier& model, const Doc& doc, std::size_t class_index,
                        const SaliencyConfig& config) {
  switch (model.kind()) {
    case ModelKind::char_cnn:
      return hot_items(doc, char_scores(model, doc, class_index), config.char_top_k, config.min_hot_chars);
    case ModelKind::word_cnn:
      if (doc.tokens.empty()) return {};
      return hot_words(doc, word_scores(model, doc, class_index), config.word_top_k);
    case ModelKind::external:
      break;
  }
  throw InvalidArgument("no gradients available for external model '" + model.id() + "'");
}

std::vector<HotSpan> hot_phrases(const Classifier& model, const Doc& doc, std::size_t class_index,
                                 const SaliencyConfig& config) {
  return saliency_items(model, doc, class_index, config).phrases;
}

std::vector<HotSpan> hsps(const Classifier& model, const Doc& doc, const SaliencyConfig& config) {
  if (model.kind() == ModelKind::external) {
    throw InvalidArgument("no gradients available for external model '" + model.id() + "'");
  }
  if (doc.tokens.empty()) return {};
  return hot_phrases(model, doc, argmax(model.classify(doc.text)), config);
}

const std::vector<HtpEntry>* HtpTable::find(const std::string& cls) const {
  for (const auto& c : classes) {
    if (c.cls == cls) return &c.entries;
  }
  return nullptr;
}

std::string normalize_phrase(std::string_view phrase) {
  std::string out;
  bool pending_space = false;
  for (char c : phrase) {
    if (utf8::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

HtpTable count_htps(const std::vector<PhraseDump>& dump, const std::vector<std::string>& classes, std::size_t top_n) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& d : dump) {
    for (const auto& p : d.phrases) ++counts[d.cls][normalize_phrase(p)];
  }
  HtpTable table;
  for (const auto& cls : classes) {
    ClassHtps row{cls, {}};
    std::vector<std::pair<std::string, std::size_t>> items(counts[cls].begin(), counts[cls].end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < items.size() && i < top_n; ++i) {
      row.entries.push_back({items[i].first, cls, items[i].second, i + 1});
    }
    table.classes.push_back(std::move(row));
  }
  return table;
}

MiningResult mine_htps(const Classifier& model, const std::vector<Doc>& training, std::size_t top_n,
                       const SaliencyConfig& config) {
  if (training.empty()) throw InvalidArgument("HTP mining needs a nonempty training set");
  MiningResult out;
  out.dump.resize(training.size());
  parallel_for(training.size(), config.jobs, [&](std::size_t i) {
    const Doc& d = training[i];
    if (!d.label) throw InvalidArgument("doc '" + d.id + "' has no label");
    PhraseDump& pd = out.dump[i];
    pd.sample_id = d.id;
    pd.cls = *d.label;
    for (const auto& s : hot_phrases(model, d, model.class_index(*d.label), config)) pd.phrases.push_back(s.surface);
  });
  out.table = count_htps(out.dump, model.classes(), top_n);
  return out;
}

namespace {

// The character a grid row reads as, or U+0020 when it reads as nothing.
char32_t reading(std::span<const double> row, const Alphabet& alphabet) {
  const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  return row[best] > 0.5 ? alphabet.at(best) : U' ';
}

// Original text with every changed row replaced by its new reading.
std::string render(const std::string& text, const CharGrid& before, const nn::Tensor& after,
                   const Alphabet& alphabet, std::size_t* changed) {
  const auto cps = utf8::decode(text);
  std::string out;
  *changed = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (i < before.used_rows) {
      const char32_t was = reading(before.grid.row(i), alphabet);
      const char32_t now = reading(after.row(i), alphabet);
      if (was != now) {
        ++*changed;
        out += utf8::encode(now);
        continue;
      }
    }
    out.append(text, cps[i].offset, cps[i].length);
  }
  return out;
}

}  // namespace

FgsmResult fgsm_baseline(const Classifier& model, const Doc& doc, double epsilon, std::size_t flips,
                         std::optional<std::size_t> target) {
  const CharCnn& m = require_char(model);
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  FgsmResult r;
  r.epsilon = epsilon;
  r.flips = flips;
  r.target_class = target;
  const CharGrid grid = m.encode_grid(doc.text);
  r.original_conf = m.network().forward(grid.grid);
  r.source_class = doc.label ? model.class_index(*doc.label) : argmax(r.original_conf);
  if (target) check_class(model, *target);

  // Untargeted: ascend the source cost. Targeted: descend the target cost.
  const std::size_t cls = target ? *target : r.source_class;
  const double dir = target ? -1.0 : 1.0;
  const nn::Tensor g = m.network().loss_and_gradients(grid.grid, cls, nn::Mode::infer, nullptr, false, true).wrt_input;

  r.perturbed = grid.grid;
  for (std::size_t i = 0; i < r.perturbed.size(); ++i) {
    const double s = g[i] > 0 ? 1.0 : (g[i] < 0 ? -1.0 : 0.0);
    r.perturbed[i] = std::clamp(grid.grid[i] + dir * epsilon * s, 0.0, 1.0);
  }
  r.perturbed_conf = m.network().forward(r.perturbed);
  std::size_t changed = 0;
  r.text = render(doc.text, grid, r.perturbed, m.alphabet(), &changed);
  r.changed_fraction = grid.used_rows ? static_cast<double>(changed) / static_cast<double>(grid.used_rows) : 0.0;
  r.gibberish = r.changed_fraction >= 0.3;

  // Sparse variant: rewrite the `flips` rows with the largest gradients.
  std::vector<std::size_t> rows(grid.used_rows);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> mag(grid.used_rows);
  for (std::size_t i = 0; i < grid.used_rows; ++i) mag[i] = row_max_abs(g.row(i));
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
  rows.resize(std::min(flips, rows.size()));
  nn::Tensor flipped = grid.grid;
  for (std::size_t row : rows) {
    const auto gr = g.row(row);
    std::size_t best = 0;
    for (std::size_t c = 1; c < gr.size(); ++c) {
      if (dir * gr[c] > dir * gr[best]) best = c;
    }
    for (double& v : flipped.row(row)) v = 0.0;
    flipped.at(row, best) = 1.0;
  }
  r.flipped_conf = m.network().forward(flipped);
  r.flipped_text = render(doc.text, grid, flipped, m.alphabet(), &changed);
  return r;
}

}  // namespace advtext

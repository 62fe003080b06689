#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "support.hpp"

using namespace advtext;
using testing::Fixtures;

namespace {

// Rule-level oracle: sort every (offset, score) pair, keep k, count per token
// with a linear scan, then walk tokens left to right collecting runs.
std::vector<HotSpan> phrases_by_rules(const Doc& doc, std::vector<CharScore> scores, std::size_t k,
                                      std::size_t min_hot) {
  std::sort(scores.begin(), scores.end(), [](const CharScore& a, const CharScore& b) {
    return a.score != b.score ? a.score > b.score : a.offset < b.offset;
  });
  if (scores.size() > k) scores.resize(k);
  std::vector<std::size_t> count(doc.tokens.size(), 0);
  std::vector<double> sum(doc.tokens.size(), 0.0);
  for (const auto& s : scores) {
    for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
      if (s.offset >= doc.tokens[t].begin && s.offset < doc.tokens[t].end) {
        ++count[t];
        sum[t] += s.score;
      }
    }
  }
  std::vector<HotSpan> out;
  for (std::size_t t = 0; t < doc.tokens.size();) {
    if (count[t] < min_hot) {
      ++t;
      continue;
    }
    HotSpan s;
    s.begin = t;
    while (t < doc.tokens.size() && count[t] >= min_hot) s.score += sum[t++];
    s.end = t;
    s.surface = doc.text.substr(doc.tokens[s.begin].begin, doc.tokens[s.end - 1].end - doc.tokens[s.begin].begin);
    s.kind = s.end - s.begin > 1 ? SpanKind::phrase : SpanKind::word;
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(), [](const HotSpan& a, const HotSpan& b) { return a.score > b.score; });
  return out;
}

}  // namespace

TEST_CASE("hot_items agrees with the rule oracle") {
  Rng rng(17);
  const std::vector<std::string> words = {"the", "historic", "church", "in", "paris", "built", "a", "bridge"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (std::size_t i = 0, n = 1 + rng.below(12); i < n; ++i) {
      text += (i ? std::string(1 + rng.below(2), ' ') : "") + words[rng.below(words.size())];
    }
    const Doc doc = Doc::make("d", text);
    std::vector<CharScore> scores;
    for (const auto& cp : utf8::decode(text)) {
      // Coarse values force ties, which must break toward smaller offsets.
      scores.push_back({cp.offset, static_cast<double>(rng.below(5))});
    }
    const std::size_t k = 1 + rng.below(20);
    const std::size_t min_hot = 1 + rng.below(3);
    CHECK(hot_items(doc, scores, k, min_hot).phrases == phrases_by_rules(doc, scores, k, min_hot));
  }
}

TEST_CASE("hot_items edge cases") {
  const Doc doc = Doc::make("d", "ab cd");
  const std::vector<CharScore> scores = {{0, 1.0}, {1, 1.0}, {3, 0.5}, {4, 0.5}};
  CHECK(hot_items(doc, scores, 50, 3).phrases.empty());
  const HotItems items = hot_items(doc, scores, 50, 2);
  REQUIRE(items.phrases.size() == 1);
  CHECK(items.phrases[0].surface == "ab cd");
  CHECK(items.phrases[0].kind == SpanKind::phrase);
  CHECK(items.phrases[0].score == doctest::Approx(3.0));
  CHECK(hot_items(doc, scores, 1, 1).hot_chars == std::vector<std::size_t>{0});
}

TEST_CASE("char_scores match finite differences") {
  const auto& f = Fixtures::get();
  const CharCnn& m = *f.topic_char;
  const Doc& doc = f.topic.test[0];
  const std::size_t cls = m.class_index(*doc.label);
  const auto scores = char_scores(m, doc, cls);
  CHECK(scores.size() == std::min<std::size_t>(utf8::length(doc.text), m.length()));

  const CharGrid grid = m.encode_grid(doc.text);
  Rng rng(4);
  for (int i = 0; i < 5; ++i) {
    const std::size_t row = rng.below(scores.size());
    double best = 0.0;
    for (std::size_t c = 0; c < m.alphabet().size(); ++c) {
      nn::Tensor x = grid.grid;
      const double h = 1e-5;
      x.at(row, c) += h;
      const double up = m.network().loss_and_gradients(x, cls).loss;
      x.at(row, c) -= 2 * h;
      const double down = m.network().loss_and_gradients(x, cls).loss;
      best = std::max(best, std::abs((up - down) / (2 * h)));
    }
    CHECK(scores[row].offset == static_cast<std::size_t>(grid.row_offset[row]));
    CHECK(scores[row].score == doctest::Approx(best).epsilon(1e-4));
  }
  CHECK_THROWS_AS(char_scores(*f.sentiment_word, f.sentiment.test[0], 0), InvalidArgument);
  CHECK_THROWS_AS(char_scores(m, doc, 9), InvalidArgument);
}

TEST_CASE("word_scores match finite differences") {
  const auto& f = Fixtures::get();
  const WordCnn& m = *f.sentiment_word;
  const Doc& doc = f.sentiment.test[1];
  const auto scores = word_scores(m, doc, 0);
  REQUIRE(scores.size() == doc.tokens.size());
  const nn::Tensor rows = m.network().embed(m.encode(doc));
  const std::size_t dim = rows.dim(1);
  Rng rng(8);
  for (int i = 0; i < 5; ++i) {
    const std::size_t t = rng.below(std::min(doc.tokens.size(), m.length()));
    double best = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      nn::Tensor x = rows;
      const double h = 1e-5;
      x.at(t, d) += h;
      const double up = -std::log(m.network().forward_embedded(x)[0]);
      x.at(t, d) -= 2 * h;
      const double down = -std::log(m.network().forward_embedded(x)[0]);
      best = std::max(best, std::abs((up - down) / (2 * h)));
    }
    CHECK(scores[t] == doctest::Approx(best).epsilon(1e-4));
  }
  CHECK(hot_words(doc, scores, 1).hot_words.size() == 1);
}

TEST_CASE("untrained symmetric models score zero") {
  CharArch ca;
  ca.zero_output = true;
  const auto c = build_char_cnn("z", {"a", "b"}, Alphabet::standard(), 32, ca);
  for (const auto& s : char_scores(*c, Doc::make("1", "abc def"), 0)) CHECK(s.score == 0.0);
  WordArch wa;
  wa.zero_output = true;
  const auto w = build_word_cnn("z", {"a", "b"}, Vocabulary({"abc", "def"}), 8, wa);
  for (double s : word_scores(*w, Doc::make("1", "abc def"), 1)) CHECK(s == 0.0);
}

TEST_CASE("saliency on external models has no gradients") {
  const auto stub = testing::sentiment_stub();
  CHECK_THROWS_WITH_AS(saliency_items(*stub, Doc::make("1", "great"), 0), doctest::Contains("no gradients"),
                       InvalidArgument);
}

TEST_CASE("normalize_phrase") {
  CHECK(normalize_phrase("  Historic\t  Church ") == "historic church");
  CHECK(normalize_phrase("") == "");
}

TEST_CASE("mine_htps matches a recount of its own dump") {
  const auto& f = Fixtures::get();
  const std::vector<Doc> train(f.sentiment.train.begin(), f.sentiment.train.begin() + 60);
  const MiningResult r = mine_htps(*f.sentiment_word, train, 5);
  REQUIRE(r.dump.size() == train.size());

  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (std::size_t i = 0; i < train.size(); ++i) {
    CHECK(r.dump[i].cls == *train[i].label);
    for (const auto& span : hot_phrases(*f.sentiment_word, train[i], f.sentiment_word->class_index(*train[i].label))) {
      ++counts[*train[i].label][normalize_phrase(span.surface)];
    }
  }
  for (const auto& ch : r.table.classes) {
    std::size_t prev = SIZE_MAX;
    for (std::size_t k = 0; k < ch.entries.size(); ++k) {
      const auto& e = ch.entries[k];
      CHECK(e.rank == k + 1);
      CHECK(e.frequency == counts[ch.cls][e.phrase]);
      CHECK(e.frequency <= prev);
      prev = e.frequency;
    }
    // Nothing left out outranks the last entry.
    if (ch.entries.size() == 5) {
      for (const auto& [phrase, n] : counts[ch.cls]) {
        if (std::none_of(ch.entries.begin(), ch.entries.end(), [&](const HtpEntry& e) { return e.phrase == phrase; })) {
          CHECK(n <= ch.entries.back().frequency);
        }
      }
    }
  }
}

TEST_CASE("count_htps ranks and breaks ties by first appearance") {
  const std::vector<PhraseDump> dump = {{"1", "Building", {"Historic", "church"}},
                                        {"2", "Building", {"historic", "tower"}},
                                        {"3", "Company", {"founded"}}};
  const HtpTable t = count_htps(dump, {"Building", "Company", "Film"}, 2);
  REQUIRE(t.classes.size() == 3);
  CHECK(t.classes[0].entries == std::vector<HtpEntry>{{"historic", "Building", 2, 1}, {"church", "Building", 1, 2}});
  CHECK(t.find("Company")->at(0).phrase == "founded");
  CHECK(t.find("Film")->empty());
  CHECK(t.find("Nope") == nullptr);
}

TEST_CASE("fgsm baseline") {
  const auto& f = Fixtures::get();
  const Doc& doc = f.topic.test[2];
  const FgsmResult zero = fgsm_baseline(*f.topic_char, doc, 0.0);
  CHECK(zero.changed_fraction == 0.0);
  CHECK(zero.perturbed_conf == zero.original_conf);
  const FgsmResult one = fgsm_baseline(*f.topic_char, doc, 1.0);
  CHECK(one.changed_fraction > 0.3);
  CHECK(one.gibberish);
  for (double v : one.perturbed.data) CHECK((v >= 0.0 && v <= 1.0));
  const FgsmResult sparse = fgsm_baseline(*f.topic_char, doc, 0.0, 3, 1);
  CHECK(edit_distance(sparse.flipped_text, doc.text.substr(0, sparse.flipped_text.size())) <= 3);
  CHECK_THROWS_AS(fgsm_baseline(*f.topic_char, doc, 1.5), InvalidArgument);
  CHECK_THROWS_AS(fgsm_baseline(*f.sentiment_word, f.sentiment.test[0], 0.5), InvalidArgument);
}

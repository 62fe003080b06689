#include <algorithm>

#include "doctest.h"
#include "support.hpp"

using namespace advtext;
using testing::Fixtures;

namespace {

const std::string company_text = "TY.O Entertainment Group Co. Ltd. is the UK subsidiary of a maker of toys.";

bool has(const std::vector<Perturbation>& ps, std::size_t start, const std::string& removed, const std::string& inserted) {
  return std::any_of(ps.begin(), ps.end(), [&](const Perturbation& p) {
    return p.start == start && p.removed == removed && p.inserted == inserted;
  });
}

HotSpan span_of(const Doc& doc, std::size_t begin, std::size_t end) {
  const std::size_t b = doc.tokens[begin].begin;
  return {begin, end, doc.text.substr(b, doc.tokens[end - 1].end - b), 1.0,
          end - begin > 1 ? SpanKind::phrase : SpanKind::word};
}

}  // namespace

TEST_CASE("apply and revert are inverse splices") {
  const Doc doc = Doc::make("1", "old house");
  const Perturbation ins = make_insertion(doc, 0, "historic", PerturbMethod::htp_token, "historic");
  CHECK(ins.inserted == "historic ");
  const Doc after = apply(doc, ins);
  CHECK(after.text == "historic old house");
  CHECK(after.tokens.size() == 3);
  CHECK(revert(after, ins) == doc);
  CHECK(ins.changed_chars() == 9);
  CHECK_THROWS_WITH_AS(apply(after, ins), doctest::Contains("stale"), InvalidArgument);
}

TEST_CASE("insertion before a hot span at offset 42") {
  const Doc doc = Doc::make("1", "The Grand Hotel was completed in 1897 and church tower stands in the centre.");
  const auto tok = std::find_if(doc.tokens.begin(), doc.tokens.end(), [](const Token& t) { return t.begin == 42; });
  REQUIRE(tok != doc.tokens.end());
  const std::size_t t = static_cast<std::size_t>(tok - doc.tokens.begin());
  const auto ps = propose_insertions(doc, {span_of(doc, t, t + 2)}, {"historic"}, {}, 50);
  CHECK(has(ps, 42, "", "historic "));
  CHECK(apply(doc, ps.front()).text.find("historic church") != std::string::npos);
}

TEST_CASE("templates fill slots in rank order") {
  CHECK(template_slots(", an <htp> <htp> founded in <year>,") == 2);
  CHECK(instantiate_template(", an <htp> <htp> founded in <year>,", {"entertainment", "company"}, 1996) ==
        ", an entertainment company founded in 1996,");
  CHECK_THROWS_AS(instantiate_template("<htp> <htp>", {"one"}, 1996), InvalidArgument);

  const Doc doc = Doc::make("1", company_text);
  PerturbLexicons lex;
  lex.templates = {", an <htp> <htp> founded in <year>,"};
  const auto ps = propose_insertions(doc, {span_of(doc, 0, 3)}, {"entertainment", "company"}, lex, 50);
  const std::size_t after = doc.tokens[2].end;
  CHECK(has(ps, after, "", ", an entertainment company founded in 1996,"));
}

TEST_CASE("insertion spacing and snippets") {
  const Doc doc = Doc::make("1", "abc def");
  CHECK(make_insertion(doc, 3, "x", PerturbMethod::user_snippet, "u").inserted == " x");
  CHECK(make_insertion(doc, 4, "x", PerturbMethod::user_snippet, "u").inserted == "x ");
  CHECK(make_insertion(doc, 3, ", x,", PerturbMethod::user_snippet, "u").inserted == ", x,");
  CHECK_THROWS_AS(make_insertion(doc, 8, "x", PerturbMethod::user_snippet, "u"), InvalidArgument);
  const auto ps = propose_insertions(doc, {}, {}, {}, 10, {{7, "ghi"}});
  REQUIRE(ps.size() == 1);
  CHECK(apply(doc, ps[0]).text == "abc def ghi");
  CHECK(propose_insertions(doc, {}, {"x", "y"}, {}, 1).size() == 1);
}

TEST_CASE("modifications") {
  PerturbLexicons lex;
  lex.misspellings["film"] = {"flim"};
  lex.homoglyphs = {{U'l', U'1'}, {U'l', U'I'}};
  lex.paraphrases = {{"different from", "not"}};
  const Doc doc = Doc::make("1", "A Film, different from this film.");
  const auto hot = std::vector<HotSpan>{span_of(doc, 1, 3)};
  const auto ps = propose_modifications(doc, hot, lex, 50);
  CHECK(has(ps, 2, "Film", "Flim"));  // case follows the original
  CHECK(has(ps, 2, "Film", "Fi1m"));
  CHECK(has(ps, 2, "Film", "FiIm"));
  CHECK(has(ps, 8, "different from", "not"));
  CHECK_FALSE(has(ps, 28, "film", "flim"));  // not hot

  const Doc plain = Doc::make("2", "the film");
  const auto mods = propose_modifications(plain, {span_of(plain, 1, 2)}, lex, 50);
  REQUIRE(has(mods, 4, "film", "flim"));
  const auto it = std::find_if(mods.begin(), mods.end(), [](const Perturbation& p) { return p.inserted == "flim"; });
  CHECK(it->method == PerturbMethod::misspelling);
  CHECK(is_typo(it->method));
  CHECK(revert(apply(plain, *it), *it).text == "the film");

  TypoLocks locks;
  update_locks(locks, *it);
  CHECK(locks == TypoLocks{{4, 8}});
  const Doc typoed = apply(plain, *it);
  CHECK(propose_modifications(typoed, {span_of(typoed, 1, 2)}, lex, 50, locks).empty());
  CHECK(propose_modifications(plain, {span_of(plain, 1, 2)}, lex, 1).size() == 1);
}

TEST_CASE("locks move with earlier edits and drop on overlap") {
  TypoLocks locks = {{10, 14}, {20, 24}};
  Perturbation ins;
  ins.kind = PerturbKind::insert;
  ins.start = 0;
  ins.inserted = "abc ";
  update_locks(locks, ins);
  CHECK(locks == TypoLocks{{14, 18}, {24, 28}});
  Perturbation rm;
  rm.kind = PerturbKind::remove;
  rm.method = PerturbMethod::dispensable_removal;
  rm.start = 13;
  rm.removed = "xyz";
  update_locks(locks, rm);
  CHECK(locks == TypoLocks{{21, 25}});
}

TEST_CASE("removals take one adjacent space") {
  PerturbLexicons lex;
  lex.dispensable = {"very", "old"};
  const Doc doc = Doc::make("1", "a very nice old");
  const auto ps = propose_removals(doc, {span_of(doc, 0, 4)}, lex, 10);
  REQUIRE(ps.size() == 2);
  CHECK(apply(doc, ps[0]).text == "a nice old");
  CHECK(apply(doc, ps[1]).text == "a very nice");
  CHECK(propose_removals(doc, {span_of(doc, 2, 3)}, lex, 10).empty());
}

TEST_CASE("edit distance over code points") {
  CHECK(edit_distance("film", "flim") == 2);
  CHECK(edit_distance("café", "cafe") == 1);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(changed_fraction("film", "flim") == doctest::Approx(0.5));
  CHECK(changed_fraction("", "") == 0.0);
}

TEST_CASE("direction check equals the dense directional derivative") {
  const auto& f = Fixtures::get();
  const CharCnn& m = *f.topic_char;
  const Doc doc = Doc::make("1", "A film directed by a young director, released in cinemas.");
  PerturbLexicons lex;
  lex.misspellings["film"] = {"flim"};
  const auto ps = propose_modifications(doc, {span_of(doc, 1, 2)}, lex, 5);
  REQUIRE(ps.size() == 1);
  const DirectionCheck d = direction_check(m, doc, ps[0], 0, 2);
  const nn::Tensor x0 = m.encode_grid(doc.text).grid;
  const nn::Tensor x1 = m.encode_grid(apply(doc, ps[0]).text).grid;
  for (std::size_t cls : {0u, 2u}) {
    const nn::Tensor g = m.network().loss_and_gradients(x0, cls).wrt_input;
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sum += g.data[i] * (x1.data[i] - x0.data[i]);
    CHECK(std::abs(sum - (cls == 0 ? d.source : d.target)) <= 1e-12);
  }
  CHECK(d.changes.size() == 4);  // i and l each leave one column and enter another
  CHECK(d.passes == (d.source > 0 && d.target < 0));
  CHECK_THROWS_AS(direction_check(*f.sentiment_word, doc, ps[0], 0, 1), InvalidArgument);
}

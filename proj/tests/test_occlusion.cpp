#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace advtext;

namespace {

class FailingClassifier : public Classifier {
 public:
  FailingClassifier() : Classifier("fails", {"a", "b"}) {}
  ModelKind kind() const override { return ModelKind::external; }
  ConfVector classify(std::string_view text) const override {
    if (text.find("ok") == std::string_view::npos) throw Error("oracle down");
    return {0.5, 0.5};
  }
};

}  // namespace

TEST_CASE("probes blank one token each") {
  const Doc doc = Doc::make("1", "the café is great");
  const auto probes = gen_probes(doc);
  REQUIRE(probes.size() == 4);
  CHECK(probes[0] == "    café is great");
  CHECK(probes[1] == "the      is great");
  CHECK(utf8::length(probes[1]) == utf8::length(doc.text));
  CHECK(probes[3] == "the café is      ");
  CHECK(gen_probes(Doc::make("2", "   ")).empty());
  std::ostringstream dump;
  write_probe_dump(dump, Doc::make("3", "a b"));
  CHECK(dump.str() == "0\t  b\n1\ta  \n");
}

TEST_CASE("deviations spend one call per token plus the seed") {
  const auto stub = testing::sentiment_stub();
  const Doc doc = Doc::make("1", "the plot is great but the end is bad");
  const DeviationTable t = deviations(*stub, doc);
  CHECK(stub->calls == doc.tokens.size() + 1);
  CHECK(t.calls == doc.tokens.size() + 1);
  CHECK(t.seed_class == 1);
  REQUIRE(t.deviation.size() == doc.tokens.size());
  CHECK(t.deviation[3] > 0.0);  // great supports the prediction
  CHECK(t.deviation[8] < 0.0);  // bad opposes it; deviations stay signed
  CHECK(t.deviation[0] == 0.0);
  CHECK(top_token(t) == 3);

  const DeviationTable empty = deviations(*stub, Doc::make("2", ""));
  CHECK(empty.calls == 1);
  CHECK(top_token(empty) == -1);
}

TEST_CASE("deviations do not depend on evaluation order or threads") {
  const auto stub = testing::sentiment_stub();
  const Doc doc = Doc::make("1", "good bad great terrible love the film");
  const DeviationTable base = deviations(*stub, doc);
  const std::vector<std::size_t> order = {6, 2, 0, 5, 1, 4, 3};
  CHECK(deviations(*stub, doc, 1, order) == base);
  CHECK(deviations(*stub, doc, 4) == base);
  CHECK(deviations(*stub, doc, 3, order) == base);
  const std::vector<std::size_t> bad = {0, 0, 1, 2, 3, 4, 5};
  CHECK_THROWS_AS(deviations(*stub, doc, 1, bad), InvalidArgument);
}

TEST_CASE("a failing probe names its token") {
  const FailingClassifier f;
  try {
    deviations(f, Doc::make("1", "ok fine boom"));
    FAIL("expected ProbeError");
  } catch (const ProbeError& e) {
    CHECK(e.token() == 0);
  }
}

TEST_CASE("black-box hot spans") {
  const auto stub = testing::sentiment_stub();
  const Doc doc = Doc::make("1", "i love this great film");
  const DeviationTable t = deviations(*stub, doc);
  const auto spans = hsps_black(t, doc, 2);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].surface == "great");
  CHECK(spans[1].surface == "love");
  const auto merged = hsps_black(deviations(*stub, Doc::make("2", "great love film")), Doc::make("2", "great love film"), 2);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].surface == "great love");
  CHECK(merged[0].kind == SpanKind::phrase);
}

TEST_CASE("black-box mining counts each sample's top word") {
  const auto stub = testing::sentiment_stub();
  const std::vector<Doc> train = {Doc::make("1", "a great film", "Positive"), Doc::make("2", "great fun", "Positive"),
                                  Doc::make("3", "terrible plot", "Negative"), Doc::make("4", "love it", "Positive")};
  const MiningResult r = mine_htps_black(*stub, train, 5);
  const auto* pos = r.table.find("Positive");
  REQUIRE(pos);
  CHECK(pos->at(0) == HtpEntry{"great", "Positive", 2, 1});
  CHECK(pos->at(1) == HtpEntry{"love", "Positive", 1, 2});
  CHECK(r.table.find("Negative")->at(0).phrase == "terrible");
}

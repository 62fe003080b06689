#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace advtext;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("advtext_store_" + hex64(Rng(std::random_device{}()).next()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

CheckpointErrorKind kind_of(const std::string& bytes) {
  try {
    checkpoint_from_bytes(bytes);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  FAIL("expected CheckpointError");
  return CheckpointErrorKind::malformed;
}

}  // namespace

TEST_CASE("datasets are CSV with quoting") {
  const std::vector<Doc> docs = {Doc::make("1", "plain", "A"), Doc::make("2", "has, comma and \"quotes\"\nnewline", "B")};
  std::ostringstream out;
  write_dataset(out, docs);
  std::istringstream in(out.str());
  const auto back = read_dataset(in);
  REQUIRE(back.size() == 2);
  CHECK(back[1].text == docs[1].text);
  CHECK(back[1].label == "B");
  CHECK(back[1].id == "2");

  std::istringstream bad_header("text,label\nx,y\n");
  CHECK_THROWS_AS(read_dataset(bad_header), FormatError);
  std::istringstream unterminated("label,text\nA,\"open\n");
  CHECK_THROWS_AS(read_dataset(unterminated), FormatError);
  std::istringstream three("label,text\nA,b,c\n");
  CHECK_THROWS_WITH(read_dataset(three), doctest::Contains("row 1"));
  CHECK_THROWS_AS(load_dataset("/nonexistent/file.csv"), FormatError);
}

TEST_CASE("checkpoints") {
  const auto& f = testing::Fixtures::get();
  const std::string bytes = checkpoint_bytes(*f.sentiment_word);
  const auto back = checkpoint_from_bytes(bytes);
  CHECK(checkpoint_bytes(*back) == bytes);
  CHECK(back->classify("great phone") == f.sentiment_word->classify("great phone"));

  CHECK(kind_of(bytes.substr(0, 5)) == CheckpointErrorKind::truncated);
  CHECK(kind_of("NOTACKPT" + bytes.substr(8)) == CheckpointErrorKind::malformed);
  std::string version = bytes;
  version[8] = 9;
  CHECK(kind_of(version) == CheckpointErrorKind::version_mismatch);
  CHECK(kind_of(bytes.substr(0, bytes.size() - 8)) == CheckpointErrorKind::truncated);
  CHECK(kind_of(bytes + "x") == CheckpointErrorKind::malformed);
  std::string shapes = bytes;
  const auto at = shapes.find("\"parameter_shapes\":[[");
  REQUIRE(at != std::string::npos);
  const auto digit = at + 21;
  shapes[digit] = shapes[digit] == '9' ? '8' : '9';
  CHECK(kind_of(shapes) == CheckpointErrorKind::shape_mismatch);

  TempDir dir;
  save_checkpoint(dir.path / "m.ckpt", *f.sentiment_char);
  CHECK(checkpoint_bytes(*load_checkpoint(dir.path / "m.ckpt")) == checkpoint_bytes(*f.sentiment_char));
  write_file(dir.path / "cut.ckpt", bytes.substr(0, 100));
  CHECK_THROWS_WITH(load_checkpoint(dir.path / "cut.ckpt"), doctest::Contains("cut.ckpt"));
}

TEST_CASE("HTP tables keep the Building example") {
  HtpTable t;
  t.classes.push_back({"Building", {{"historic", "Building", 7279, 1}}});
  t.classes.push_back({"Film", {}});
  const HtpTable back = htp_table_from_json(htp_table_json(t));
  CHECK(back == t);
  CHECK(back.find("Building")->front().frequency == 7279);
  CHECK_THROWS_AS(htp_table_from_json("{\"nope\": 1}"), FormatError);
  CHECK_THROWS_AS(htp_table_from_json("not json"), FormatError);
}

TEST_CASE("phrase dumps") {
  const std::vector<PhraseDump> dump = {{"7", "Film", {"critics praised", "released"}}, {"8", "Film", {}}};
  std::stringstream s;
  write_phrase_dump(s, dump);
  CHECK(s.str() == "7\tFilm\tcritics praised\treleased\n8\tFilm\n");
  const auto back = read_phrase_dump(s);
  REQUIRE(back.size() == 2);
  CHECK(back[0].phrases == dump[0].phrases);
  CHECK(back[1].phrases.empty());
}

TEST_CASE("traces roundtrip through JSON") {
  const auto stub = testing::sentiment_stub();
  AttackConfig cfg;
  cfg.target = "Positive";
  cfg.knowledge = Knowledge::black;
  cfg.record_pool = true;
  HtpTable htps;
  htps.classes.push_back({"Positive", {{"great", "Positive", 3, 1}}});
  const AttackTrace t = attack(*stub, Doc::make("1", "a bad film", "Negative"), htps, testing::shipped_lexicons(), cfg);
  const std::string j = trace_json(t);
  CHECK(trace_json(trace_from_json(j)) == j);
  TempDir dir;
  save_trace(dir.path / "t.json", t);
  CHECK(trace_json(load_trace(dir.path / "t.json")) == j);
}

TEST_CASE("lexicon files") {
  const PerturbLexicons shipped = testing::shipped_lexicons();
  CHECK(shipped.misspellings.at("film") == std::vector<std::string>{"flim", "fiim"});
  CHECK(shipped.paraphrases.size() == 20);
  CHECK(shipped.dispensable.count("historic"));
  CHECK_FALSE(shipped.templates.empty());
  CHECK(shipped.year == 1996);
  CHECK(load_lexicons(LexiconPaths::in(default_data_dir()), 2001).year == 2001);

  TempDir dir;
  const auto paths = LexiconPaths::in(dir.path);
  save_lexicons(paths, shipped);
  CHECK(load_lexicons(paths) == shipped);

  write_file(paths.homoglyphs, "# comment\n\nab\t1\n");
  CHECK_THROWS_WITH_AS(load_lexicons(paths), doctest::Contains("single character"), FormatError);
  write_file(paths.homoglyphs, "a\n");
  CHECK_THROWS_WITH_AS(load_lexicons(paths), doctest::Contains("tab"), FormatError);
  write_file(paths.homoglyphs, "");
  write_file(paths.templates, "no slot here\n");
  CHECK_THROWS_AS(load_lexicons(paths), FormatError);
}

TEST_CASE("alphabet files") {
  TempDir dir;
  Alphabet::standard().save(dir.path / "alphabet.txt");
  CHECK(Alphabet::load(dir.path / "alphabet.txt") == Alphabet::standard());
  CHECK(Alphabet::load(default_data_dir() / "alphabet.txt") == Alphabet::standard());
}

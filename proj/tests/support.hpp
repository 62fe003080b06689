#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "advtext/store.hpp"
#include "advtext/toydata.hpp"
#include "advtext/utf8.hpp"

namespace testing {

using namespace advtext;

/// Scores each class by the keywords the text contains, then softmax.
class KeywordClassifier : public Classifier {
 public:
  KeywordClassifier(std::vector<std::string> classes, std::map<std::string, std::pair<std::size_t, double>> weights)
      : Classifier("keywords", std::move(classes)), weights_(std::move(weights)) {}

  ModelKind kind() const override { return ModelKind::external; }

  ConfVector classify(std::string_view text) const override {
    ++calls;
    std::vector<double> logits(class_count(), 0.0);
    for (const auto& t : tokenize(text)) {
      auto it = weights_.find(utf8::to_lower_ascii(t.word));
      if (it != weights_.end()) logits[it->second.first] += it->second.second;
    }
    return nn::softmax(logits);
  }

  mutable std::atomic<std::size_t> calls{0};

 private:
  std::map<std::string, std::pair<std::size_t, double>> weights_;
};

inline std::shared_ptr<KeywordClassifier> sentiment_stub() {
  return std::make_shared<KeywordClassifier>(
      std::vector<std::string>{"Negative", "Positive"},
      std::map<std::string, std::pair<std::size_t, double>>{{"great", {1, 3.0}},
                                                            {"good", {1, 1.5}},
                                                            {"love", {1, 2.0}},
                                                            {"terrible", {0, 3.0}},
                                                            {"bad", {0, 1.5}},
                                                            {"flim", {0, 0.5}}});
}

/// Forwards to another classifier and counts calls.
class CountingClassifier : public Classifier {
 public:
  explicit CountingClassifier(ClassifierHandle inner)
      : Classifier(inner->id(), inner->classes()), inner_(std::move(inner)) {}
  ModelKind kind() const override { return ModelKind::external; }
  ConfVector classify(std::string_view text) const override {
    ++calls;
    return inner_->classify(text);
  }
  mutable std::atomic<std::size_t> calls{0};

 private:
  ClassifierHandle inner_;
};

/// Small corpora and models trained once per test binary.
struct Fixtures {
  ToySplit sentiment = make_sentiment_corpus(200, 60, 11);
  ToySplit topic = make_topic_corpus(200, 60, 7);
  std::shared_ptr<WordCnn> sentiment_word;
  std::shared_ptr<CharCnn> sentiment_char;
  std::shared_ptr<CharCnn> topic_char;

  Fixtures() {
    WordArch wa;
    wa.dim = 16;
    wa.maps = 8;
    sentiment_word = build_word_cnn("sent-word", collect_classes(sentiment.train), Vocabulary::build(sentiment.train),
                                    48, wa);
    sentiment_word->fit(sentiment.train, {5, 0.05, 16, 1});

    CharArch ca;
    ca.convs = {{5, 16, 3}, {3, 16, 0}};
    ca.hidden = {32};
    sentiment_char = build_char_cnn("sent-char", collect_classes(sentiment.train), Alphabet::standard(), 128, ca);
    sentiment_char->fit(sentiment.train, {4, 0.05, 16, 1});
    topic_char = build_char_cnn("topic-char", collect_classes(topic.train), Alphabet::standard(), 256, ca);
    topic_char->fit(topic.train, {4, 0.05, 16, 1});
  }

  static const Fixtures& get() {
    static const Fixtures f;
    return f;
  }
};

inline PerturbLexicons shipped_lexicons() { return load_lexicons(LexiconPaths::in(default_data_dir())); }

}  // namespace testing

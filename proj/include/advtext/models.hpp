#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "advtext/codec.hpp"
#include "advtext/nn.hpp"
#include "advtext/train.hpp"

namespace advtext {

enum class ModelKind { char_cnn, word_cnn, external };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Anything that maps a text to a probability vector over named classes.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;
  virtual ConfVector classify(std::string_view text) const = 0;

  const std::string& id() const { return id_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t class_count() const { return classes_.size(); }
  /// Throws InvalidArgument naming the class when it is unknown.
  std::size_t class_index(std::string_view name) const;

 protected:
  Classifier(std::string id, std::vector<std::string> classes);

 private:
  std::string id_;
  std::vector<std::string> classes_;
};

using ClassifierHandle = std::shared_ptr<const Classifier>;

/// Cost gradient w.r.t. the encoded input, with each row traced back to the
/// text: a byte offset for character grids, a token index for word rows.
struct InputGradient {
  nn::Tensor grad;
  std::vector<std::ptrdiff_t> row_source;  // -1 for padding rows
  double loss = 0.0;
};

/// A classifier backed by an nn::Network, so gradients are available.
class NeuralClassifier : public Classifier {
 public:
  const nn::Network& network() const { return net_; }
  nn::Network& network() { return net_; }

  /// Network input for `doc`.
  virtual nn::Tensor encode(const Doc& doc) const = 0;
  virtual InputGradient input_gradient(const Doc& doc, std::size_t class_index) const = 0;

  ConfVector classify(std::string_view text) const override;
  ConfVector classify(const Doc& doc) const;

  /// Trains on labeled docs; every label must name one of the classes.
  nn::TrainResult fit(const std::vector<Doc>& docs, const nn::TrainConfig& config,
                      const std::function<void(std::size_t, double)>& on_epoch = {});

 protected:
  NeuralClassifier(std::string id, std::vector<std::string> classes, nn::Network net);

  nn::Network net_;
};

struct ConvStage {
  std::size_t kernel = 3;
  std::size_t maps = 32;
  std::size_t pool = 0;  // 0: no pooling after this stage
};

struct CharArch {
  std::vector<ConvStage> convs{{7, 32, 3}, {3, 32, 0}};
  bool pool_over_time = true;  // otherwise the last feature map is flattened
  std::vector<std::size_t> hidden{64};
  double dropout = 0.0;
  std::uint64_t seed = 1;
  bool zero_output = false;

  /// Two convolutions and two dense layers.
  static CharArch desk() { return {}; }
  /// Six convolutions and three dense layers.
  static CharArch full_scale();
};

struct WordArch {
  std::size_t dim = 32;
  std::vector<std::size_t> kernels{3, 4, 5};
  std::size_t maps = 16;
  double dropout = 0.5;
  std::uint64_t seed = 1;
  bool zero_output = false;
};

class CharCnn : public NeuralClassifier {
 public:
  CharCnn(std::string id, std::vector<std::string> classes, Alphabet alphabet, std::size_t length,
          nn::Network net);

  ModelKind kind() const override { return ModelKind::char_cnn; }
  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t length() const { return length_; }

  CharGrid encode_grid(std::string_view text) const;
  nn::Tensor encode(const Doc& doc) const override;
  InputGradient input_gradient(const Doc& doc, std::size_t class_index) const override;

 private:
  Alphabet alphabet_;
  std::size_t length_;
};

class WordCnn : public NeuralClassifier {
 public:
  WordCnn(std::string id, std::vector<std::string> classes, Vocabulary vocab, std::size_t length,
          nn::Network net);

  ModelKind kind() const override { return ModelKind::word_cnn; }
  const Vocabulary& vocabulary() const { return vocab_; }
  std::size_t length() const { return length_; }

  nn::Tensor encode(const Doc& doc) const override;
  /// Gradient over the embedded rows [T x D].
  InputGradient input_gradient(const Doc& doc, std::size_t class_index) const override;

 private:
  Vocabulary vocab_;
  std::size_t length_;
};

std::vector<nn::LayerSpec> char_cnn_layers(std::size_t classes, const CharArch& arch);
std::vector<nn::LayerSpec> word_cnn_layers(std::size_t classes, std::size_t vocab, const WordArch& arch);

std::shared_ptr<CharCnn> build_char_cnn(std::string id, std::vector<std::string> classes, Alphabet alphabet,
                                        std::size_t length, const CharArch& arch = {});
std::shared_ptr<WordCnn> build_word_cnn(std::string id, std::vector<std::string> classes, Vocabulary vocab,
                                        std::size_t length, const WordArch& arch = {});

struct EvalReport {
  std::vector<std::string> classes;
  double accuracy = 0.0;
  std::size_t total = 0;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

/// Throws on an empty dataset, unlabeled docs or labels outside the classes.
EvalReport evaluate(const Classifier& model, const std::vector<Doc>& docs);

/// Distinct labels, sorted.
std::vector<std::string> collect_classes(const std::vector<Doc>& docs);

}  // namespace advtext

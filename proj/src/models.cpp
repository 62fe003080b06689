#include "advtext/models.hpp"

#include <algorithm>
#include <set>

namespace advtext {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::char_cnn: return "char";
    case ModelKind::word_cnn: return "word";
    case ModelKind::external: return "external";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "char") return ModelKind::char_cnn;
  if (name == "word") return ModelKind::word_cnn;
  if (name == "external") return ModelKind::external;
  throw InvalidArgument("unknown model kind '" + name + "' (expected char, word or external)");
}

Classifier::Classifier(std::string id, std::vector<std::string> classes)
    : id_(std::move(id)), classes_(std::move(classes)) {
  if (classes_.size() < 2) throw InvalidArgument("a classifier needs at least two classes");
  std::set<std::string> seen;
  for (const auto& c : classes_) {
    if (c.empty()) throw InvalidArgument("class names must be nonempty");
    if (!seen.insert(c).second) throw InvalidArgument("duplicate class name '" + c + "'");
  }
}

std::size_t Classifier::class_index(std::string_view name) const {
  auto it = std::find(classes_.begin(), classes_.end(), name);
  if (it == classes_.end()) {
    throw InvalidArgument("unknown class '" + std::string(name) + "' for model '" + id_ + "'");
  }
  return static_cast<std::size_t>(it - classes_.begin());
}

NeuralClassifier::NeuralClassifier(std::string id, std::vector<std::string> classes, nn::Network net)
    : Classifier(std::move(id), std::move(classes)), net_(std::move(net)) {
  if (net_.output_size() != class_count()) {
    throw nn::ShapeError("network produces " + std::to_string(net_.output_size()) + " outputs for " +
                         std::to_string(class_count()) + " classes");
  }
}

ConfVector NeuralClassifier::classify(std::string_view text) const {
  return classify(Doc::make("", std::string(text)));
}

ConfVector NeuralClassifier::classify(const Doc& doc) const { return net_.forward(encode(doc)); }

nn::TrainResult NeuralClassifier::fit(const std::vector<Doc>& docs, const nn::TrainConfig& config,
                                      const std::function<void(std::size_t, double)>& on_epoch) {
  std::vector<nn::Example> examples;
  examples.reserve(docs.size());
  for (const auto& d : docs) {
    if (!d.label) throw InvalidArgument("training doc '" + d.id + "' has no label");
    examples.push_back({encode(d), class_index(*d.label)});
  }
  return nn::train(net_, examples, config, on_epoch);
}

CharArch CharArch::full_scale() {
  CharArch a;
  a.convs = {{7, 256, 3}, {7, 256, 3}, {3, 256, 0}, {3, 256, 0}, {3, 256, 0}, {3, 256, 3}};
  a.pool_over_time = false;
  a.hidden = {1024, 1024};
  a.dropout = 0.5;
  return a;
}

std::vector<nn::LayerSpec> char_cnn_layers(std::size_t classes, const CharArch& arch) {
  using nn::LayerSpec;
  std::vector<LayerSpec> layers;
  for (const auto& stage : arch.convs) {
    layers.push_back(LayerSpec::conv1d(stage.kernel, stage.maps));
    layers.push_back(LayerSpec::relu());
    if (stage.pool > 0) layers.push_back(LayerSpec::maxpool(stage.pool));
  }
  if (arch.pool_over_time) layers.push_back(LayerSpec::maxpool_time());
  for (auto units : arch.hidden) {
    layers.push_back(LayerSpec::dense(units));
    layers.push_back(LayerSpec::relu());
    if (arch.dropout > 0.0) layers.push_back(LayerSpec::dropout(arch.dropout));
  }
  layers.push_back(LayerSpec::dense(classes));
  layers.push_back(LayerSpec::softmax());
  return layers;
}

std::vector<nn::LayerSpec> word_cnn_layers(std::size_t classes, std::size_t vocab, const WordArch& arch) {
  using nn::LayerSpec;
  std::vector<std::vector<LayerSpec>> banks;
  for (auto k : arch.kernels) {
    banks.push_back({LayerSpec::conv1d(k, arch.maps), LayerSpec::relu(), LayerSpec::maxpool_time()});
  }
  std::vector<LayerSpec> layers{LayerSpec::embedding(vocab, arch.dim), LayerSpec::parallel(std::move(banks))};
  if (arch.dropout > 0.0) layers.push_back(LayerSpec::dropout(arch.dropout));
  layers.push_back(LayerSpec::dense(classes));
  layers.push_back(LayerSpec::softmax());
  return layers;
}

CharCnn::CharCnn(std::string id, std::vector<std::string> classes, Alphabet alphabet, std::size_t length,
                 nn::Network net)
    : NeuralClassifier(std::move(id), std::move(classes), std::move(net)),
      alphabet_(std::move(alphabet)),
      length_(length) {
  const nn::Shape expected{length_, alphabet_.size()};
  if (net_.input_shape() != expected) {
    throw nn::ShapeError("character network input " + nn::to_string(net_.input_shape()) + " does not match " +
                         nn::to_string(expected));
  }
}

CharGrid CharCnn::encode_grid(std::string_view text) const { return encode_chars(text, alphabet_, length_); }

nn::Tensor CharCnn::encode(const Doc& doc) const { return encode_grid(doc.text).grid; }

InputGradient CharCnn::input_gradient(const Doc& doc, std::size_t class_index) const {
  CharGrid g = encode_grid(doc.text);
  nn::CostGradient cg = net_.loss_and_gradients(g.grid, class_index, nn::Mode::infer, nullptr, false, true);
  return {std::move(cg.wrt_input), std::move(g.row_offset), cg.loss};
}

WordCnn::WordCnn(std::string id, std::vector<std::string> classes, Vocabulary vocab, std::size_t length,
                 nn::Network net)
    : NeuralClassifier(std::move(id), std::move(classes), std::move(net)), vocab_(std::move(vocab)), length_(length) {
  if (!net_.embeds_input() || net_.input_shape() != nn::Shape{length_}) {
    throw nn::ShapeError("word network must start with an embedding over " + std::to_string(length_) + " rows");
  }
  if (net_.layers().front().spec().vocab != vocab_.size()) {
    throw nn::ShapeError("embedding has " + std::to_string(net_.layers().front().spec().vocab) +
                         " rows for a vocabulary of " + std::to_string(vocab_.size()));
  }
}

nn::Tensor WordCnn::encode(const Doc& doc) const { return encode_words(doc, vocab_, length_).indices; }

InputGradient WordCnn::input_gradient(const Doc& doc, std::size_t class_index) const {
  WordSeq seq = encode_words(doc, vocab_, length_);
  nn::CostGradient cg = net_.loss_and_gradients(seq.indices, class_index, nn::Mode::infer, nullptr, false, true);
  return {std::move(cg.wrt_input), std::move(seq.row_token), cg.loss};
}

std::shared_ptr<CharCnn> build_char_cnn(std::string id, std::vector<std::string> classes, Alphabet alphabet,
                                        std::size_t length, const CharArch& arch) {
  if (classes.size() < 2) throw InvalidArgument("a classifier needs at least two classes");
  nn::Network net({length, alphabet.size()}, char_cnn_layers(classes.size(), arch), arch.seed);
  if (arch.zero_output) net.zero_output_layer();
  return std::make_shared<CharCnn>(std::move(id), std::move(classes), std::move(alphabet), length, std::move(net));
}

std::shared_ptr<WordCnn> build_word_cnn(std::string id, std::vector<std::string> classes, Vocabulary vocab,
                                        std::size_t length, const WordArch& arch) {
  if (classes.size() < 2) throw InvalidArgument("a classifier needs at least two classes");
  nn::Network net({length}, word_cnn_layers(classes.size(), vocab.size(), arch), arch.seed);
  if (arch.zero_output) net.zero_output_layer();
  return std::make_shared<WordCnn>(std::move(id), std::move(classes), std::move(vocab), length, std::move(net));
}

EvalReport evaluate(const Classifier& model, const std::vector<Doc>& docs) {
  if (docs.empty()) throw InvalidArgument("cannot evaluate on an empty dataset (accuracy undefined)");
  EvalReport r;
  r.classes = model.classes();
  r.confusion.assign(r.classes.size(), std::vector<std::size_t>(r.classes.size(), 0));
  std::size_t correct = 0;
  for (const auto& d : docs) {
    if (!d.label) throw InvalidArgument("doc '" + d.id + "' has no label");
    const std::size_t truth = model.class_index(*d.label);
    const std::size_t pred = argmax(model.classify(d.text));
    ++r.confusion[truth][pred];
    if (truth == pred) ++correct;
  }
  r.total = docs.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  return r;
}

std::vector<std::string> collect_classes(const std::vector<Doc>& docs) {
  std::set<std::string> seen;
  for (const auto& d : docs) {
    if (d.label) seen.insert(*d.label);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace advtext

#pragma once

// Minimal convolutional network engine.
//
// Activations are rank-1 vectors or rank-2 [time x channels] sequences. A
// network is an ordered list of layers; the `parallel` kind runs several
// sub-stacks on the same input and concatenates their flattened outputs,
// which is enough to express multi-width convolution banks.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advtext/tensor.hpp"

namespace advtext::nn {

enum class LayerKind { embedding, conv1d, relu, maxpool, maxpool_time, dense, dropout, softmax, parallel };

std::string to_string(LayerKind kind);
LayerKind parse_layer_kind(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t kernel = 0;    // conv1d width, maxpool window
  std::size_t stride = 1;    // conv1d / maxpool stride
  std::size_t channels = 0;  // conv1d output maps
  std::size_t units = 0;     // dense outputs
  std::size_t vocab = 0;     // embedding rows
  std::size_t dim = 0;       // embedding width
  double drop = 0.0;         // dropout probability
  std::vector<std::vector<LayerSpec>> branches;

  static LayerSpec embedding(std::size_t vocab, std::size_t dim);
  static LayerSpec conv1d(std::size_t kernel, std::size_t channels, std::size_t stride = 1);
  static LayerSpec relu();
  static LayerSpec maxpool(std::size_t window, std::size_t stride = 0);
  static LayerSpec maxpool_time();
  static LayerSpec dense(std::size_t units);
  static LayerSpec dropout(double p);
  static LayerSpec softmax();
  static LayerSpec parallel(std::vector<std::vector<LayerSpec>> branches);

  bool operator==(const LayerSpec&) const = default;
};

enum class Mode { train, infer };

/// Values a layer keeps from its forward pass for the backward pass.
struct Trace {
  Tensor input;
  Tensor output;
  std::vector<std::size_t> index;  // maxpool argmax positions
  std::vector<double> mask;        // dropout scale per element
  std::vector<std::vector<Trace>> branches;
};

class Layer {
 public:
  /// Builds the layer for `input` and draws initial parameters from `init`.
  /// Throws ShapeError when the input shape cannot feed this kind.
  Layer(LayerSpec spec, const Shape& input, Rng& init);

  const LayerSpec& spec() const { return spec_; }
  const Shape& input_shape() const { return in_; }
  const Shape& output_shape() const { return out_; }

  /// Parameter tensors of this layer and its branches, in a fixed order.
  void collect(std::vector<Tensor*>& out);
  void collect(std::vector<const Tensor*>& out) const;
  std::size_t parameter_tensors() const;

  Tensor forward(const Tensor& in, Mode mode, Rng* rng, Trace* trace) const;
  /// Accumulates parameter gradients into `grads` (this layer's slice) and
  /// returns the gradient w.r.t. the layer input when `need_input` is set.
  Tensor backward(const Tensor& grad_out, const Trace& trace, std::span<Tensor> grads,
                  bool need_input) const;

 private:
  LayerSpec spec_;
  Shape in_;
  Shape out_;
  std::vector<Tensor> params_;
  std::vector<std::vector<Layer>> branches_;
};

/// Gradient of the cross-entropy cost of one labeled input.
///
/// `wrt_input` is taken w.r.t. the dense input of the layer stack: the input
/// tensor itself, or the embedded rows [T x D] when the network starts with
/// an embedding layer (indices are not differentiable).
struct CostGradient {
  Tensor wrt_input;
  std::vector<Tensor> wrt_params;
  double loss = 0.0;
};

class Network {
 public:
  Network() = default;
  Network(Shape input_shape, std::vector<LayerSpec> specs, std::uint64_t seed);

  const Shape& input_shape() const { return input_shape_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t output_size() const;
  /// Shape of the tensor `wrt_input` refers to.
  const Shape& dense_input_shape() const;
  bool embeds_input() const;

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  /// Inference. Deterministic; dropout is the identity.
  ConfVector forward(const Tensor& input) const;
  /// Inference from already-embedded rows (skips a leading embedding layer).
  ConfVector forward_embedded(const Tensor& rows) const;
  Tensor embed(const Tensor& indices) const;

  CostGradient loss_and_gradients(const Tensor& input, std::size_t label) const;
  /// Training-time variant: dropout active when `mode` is train, and either
  /// half of the gradient can be skipped.
  CostGradient loss_and_gradients(const Tensor& input, std::size_t label, Mode mode, Rng* rng,
                                  bool want_params, bool want_input) const;

  /// Zeroes the weights and bias of the last dense layer.
  void zero_output_layer();

 private:
  void check_input(const Tensor& input) const;
  Tensor run(const Tensor& input, std::size_t first, Mode mode, Rng* rng,
             std::vector<Trace>* traces) const;

  Shape input_shape_;
  std::vector<LayerSpec> specs_;
  std::vector<Layer> layers_;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace advtext::nn

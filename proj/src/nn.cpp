#include "advtext/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace advtext::nn {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::embedding: return "embedding";
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::maxpool_time: return "maxpool-over-time";
    case LayerKind::dense: return "dense";
    case LayerKind::dropout: return "dropout";
    case LayerKind::softmax: return "softmax";
    case LayerKind::parallel: return "parallel";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& name) {
  for (auto k : {LayerKind::embedding, LayerKind::conv1d, LayerKind::relu, LayerKind::maxpool,
                 LayerKind::maxpool_time, LayerKind::dense, LayerKind::dropout, LayerKind::softmax,
                 LayerKind::parallel}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::embedding(std::size_t vocab, std::size_t dim) {
  LayerSpec s;
  s.kind = LayerKind::embedding;
  s.vocab = vocab;
  s.dim = dim;
  return s;
}

LayerSpec LayerSpec::conv1d(std::size_t kernel, std::size_t channels, std::size_t stride) {
  LayerSpec s;
  s.kind = LayerKind::conv1d;
  s.kernel = kernel;
  s.channels = channels;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::relu() { return LayerSpec{}; }

LayerSpec LayerSpec::maxpool(std::size_t window, std::size_t stride) {
  LayerSpec s;
  s.kind = LayerKind::maxpool;
  s.kernel = window;
  s.stride = stride == 0 ? window : stride;
  return s;
}

LayerSpec LayerSpec::maxpool_time() {
  LayerSpec s;
  s.kind = LayerKind::maxpool_time;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t units) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::dropout(double p) {
  LayerSpec s;
  s.kind = LayerKind::dropout;
  s.drop = p;
  return s;
}

LayerSpec LayerSpec::softmax() {
  LayerSpec s;
  s.kind = LayerKind::softmax;
  return s;
}

LayerSpec LayerSpec::parallel(std::vector<std::vector<LayerSpec>> branches) {
  LayerSpec s;
  s.kind = LayerKind::parallel;
  s.branches = std::move(branches);
  return s;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

namespace {

void init_uniform(Tensor& t, double fan_in, double fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.data) v = rng.uniform(-limit, limit);
}

void require_rank(const Shape& in, std::size_t rank, LayerKind kind) {
  if (in.size() != rank) {
    throw ShapeError(to_string(kind) + " needs a rank-" + std::to_string(rank) + " input, got " +
                     to_string(in));
  }
}

}  // namespace

Layer::Layer(LayerSpec spec, const Shape& input, Rng& init) : spec_(std::move(spec)), in_(input) {
  for (auto d : in_) {
    if (d == 0) throw ShapeError("zero extent in input shape " + to_string(in_));
  }
  switch (spec_.kind) {
    case LayerKind::embedding: {
      require_rank(in_, 1, spec_.kind);
      if (spec_.vocab == 0 || spec_.dim == 0) throw ShapeError("embedding needs vocab > 0 and dim > 0");
      out_ = {in_[0], spec_.dim};
      params_.emplace_back(Shape{spec_.vocab, spec_.dim});
      init_uniform(params_[0], 1.0, static_cast<double>(spec_.dim), init);
      break;
    }
    case LayerKind::conv1d: {
      require_rank(in_, 2, spec_.kind);
      if (spec_.kernel == 0 || spec_.channels == 0 || spec_.stride == 0) {
        throw ShapeError("conv1d needs kernel, channels and stride > 0");
      }
      if (in_[0] < spec_.kernel) {
        throw ShapeError("conv1d kernel " + std::to_string(spec_.kernel) + " exceeds input length " +
                         std::to_string(in_[0]));
      }
      out_ = {(in_[0] - spec_.kernel) / spec_.stride + 1, spec_.channels};
      const std::size_t fan = spec_.kernel * in_[1];
      params_.emplace_back(Shape{fan, spec_.channels});
      params_.emplace_back(Shape{spec_.channels});
      init_uniform(params_[0], static_cast<double>(fan),
                   static_cast<double>(spec_.kernel * spec_.channels), init);
      break;
    }
    case LayerKind::relu:
    case LayerKind::dropout:
      if (spec_.kind == LayerKind::dropout && !(spec_.drop >= 0.0 && spec_.drop < 1.0)) {
        throw ShapeError("dropout probability must lie in [0, 1)");
      }
      out_ = in_;
      break;
    case LayerKind::maxpool: {
      require_rank(in_, 2, spec_.kind);
      if (spec_.kernel == 0 || spec_.stride == 0) throw ShapeError("maxpool needs window and stride > 0");
      if (in_[0] < spec_.kernel) {
        throw ShapeError("maxpool window " + std::to_string(spec_.kernel) + " exceeds input length " +
                         std::to_string(in_[0]));
      }
      out_ = {(in_[0] - spec_.kernel) / spec_.stride + 1, in_[1]};
      break;
    }
    case LayerKind::maxpool_time:
      require_rank(in_, 2, spec_.kind);
      out_ = {in_[1]};
      break;
    case LayerKind::dense: {
      if (spec_.units == 0) throw ShapeError("dense needs units > 0");
      const std::size_t n = element_count(in_);
      out_ = {spec_.units};
      params_.emplace_back(Shape{spec_.units, n});
      params_.emplace_back(Shape{spec_.units});
      init_uniform(params_[0], static_cast<double>(n), static_cast<double>(spec_.units), init);
      break;
    }
    case LayerKind::softmax:
      require_rank(in_, 1, spec_.kind);
      out_ = in_;
      break;
    case LayerKind::parallel: {
      if (spec_.branches.empty()) throw ShapeError("parallel needs at least one branch");
      std::size_t total = 0;
      for (std::size_t b = 0; b < spec_.branches.size(); ++b) {
        std::vector<Layer> stack;
        Shape shape = in_;
        for (std::size_t i = 0; i < spec_.branches[b].size(); ++i) {
          try {
            stack.emplace_back(spec_.branches[b][i], shape, init);
          } catch (const ShapeError& e) {
            throw ShapeError("branch " + std::to_string(b) + " layer " + std::to_string(i) + ": " +
                             e.what());
          }
          shape = stack.back().output_shape();
        }
        total += element_count(shape);
        branches_.push_back(std::move(stack));
      }
      out_ = {total};
      break;
    }
  }
}

void Layer::collect(std::vector<Tensor*>& out) {
  for (auto& p : params_) out.push_back(&p);
  for (auto& stack : branches_) {
    for (auto& l : stack) l.collect(out);
  }
}

void Layer::collect(std::vector<const Tensor*>& out) const {
  for (const auto& p : params_) out.push_back(&p);
  for (const auto& stack : branches_) {
    for (const auto& l : stack) l.collect(out);
  }
}

std::size_t Layer::parameter_tensors() const {
  std::size_t n = params_.size();
  for (const auto& stack : branches_) {
    for (const auto& l : stack) n += l.parameter_tensors();
  }
  return n;
}

Tensor Layer::forward(const Tensor& in, Mode mode, Rng* rng, Trace* trace) const {
  Tensor out(out_);
  switch (spec_.kind) {
    case LayerKind::embedding: {
      const Tensor& table = params_[0];
      const std::size_t dim = spec_.dim;
      for (std::size_t t = 0; t < in_[0]; ++t) {
        const double raw = in.data[t];
        if (!(raw >= 0.0) || raw != std::floor(raw) || raw >= static_cast<double>(spec_.vocab)) {
          throw InvalidArgument("embedding index " + std::to_string(raw) + " out of range [0, " +
                                std::to_string(spec_.vocab) + ")");
        }
        const auto idx = static_cast<std::size_t>(raw);
        std::copy_n(table.data.begin() + static_cast<std::ptrdiff_t>(idx * dim), dim,
                    out.data.begin() + static_cast<std::ptrdiff_t>(t * dim));
      }
      break;
    }
    case LayerKind::conv1d: {
      const Tensor& w = params_[0];
      const Tensor& b = params_[1];
      const std::size_t channels = in_[1];
      const std::size_t maps = spec_.channels;
      const std::size_t window = spec_.kernel * channels;
      for (std::size_t t = 0; t < out_[0]; ++t) {
        double* acc = out.data.data() + t * maps;
        std::copy(b.data.begin(), b.data.end(), acc);
        const double* x = in.data.data() + t * spec_.stride * channels;
        // Zero inputs are skipped, which makes one-hot grids cheap.
        for (std::size_t jc = 0; jc < window; ++jc) {
          const double v = x[jc];
          if (v == 0.0) continue;
          const double* wr = w.data.data() + jc * maps;
          for (std::size_t o = 0; o < maps; ++o) acc[o] += v * wr[o];
        }
      }
      break;
    }
    case LayerKind::relu:
      for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > 0.0 ? in.data[i] : 0.0;
      break;
    case LayerKind::maxpool:
    case LayerKind::maxpool_time: {
      const std::size_t channels = in_[1];
      const std::size_t window = spec_.kind == LayerKind::maxpool ? spec_.kernel : in_[0];
      const std::size_t stride = spec_.kind == LayerKind::maxpool ? spec_.stride : in_[0];
      const std::size_t steps = spec_.kind == LayerKind::maxpool ? out_[0] : 1;
      std::vector<std::size_t> index(steps * channels);
      for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t c = 0; c < channels; ++c) {
          std::size_t best = t * stride;
          double best_v = in.data[best * channels + c];
          for (std::size_t j = 1; j < window; ++j) {
            const std::size_t r = t * stride + j;
            const double v = in.data[r * channels + c];
            if (v > best_v) {
              best_v = v;
              best = r;
            }
          }
          out.data[t * channels + c] = best_v;
          index[t * channels + c] = best;
        }
      }
      if (trace) trace->index = std::move(index);
      break;
    }
    case LayerKind::dense: {
      const Tensor& w = params_[0];
      const Tensor& b = params_[1];
      const std::size_t n = in.size();
      for (std::size_t o = 0; o < spec_.units; ++o) {
        const double* wr = w.data.data() + o * n;
        double acc = b.data[o];
        for (std::size_t i = 0; i < n; ++i) acc += wr[i] * in.data[i];
        out.data[o] = acc;
      }
      break;
    }
    case LayerKind::dropout: {
      if (mode == Mode::train && spec_.drop > 0.0) {
        if (!rng) throw InvalidArgument("dropout in train mode needs an Rng");
        const double keep = 1.0 - spec_.drop;
        std::vector<double> mask(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) {
          mask[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
          out.data[i] = in.data[i] * mask[i];
        }
        if (trace) trace->mask = std::move(mask);
      } else {
        out.data = in.data;
      }
      break;
    }
    case LayerKind::softmax:
      out.data = softmax(in.data);
      break;
    case LayerKind::parallel: {
      std::size_t offset = 0;
      if (trace) trace->branches.assign(branches_.size(), {});
      for (std::size_t b = 0; b < branches_.size(); ++b) {
        Tensor cur = in;
        if (trace) trace->branches[b].resize(branches_[b].size());
        for (std::size_t i = 0; i < branches_[b].size(); ++i) {
          cur = branches_[b][i].forward(cur, mode, rng, trace ? &trace->branches[b][i] : nullptr);
        }
        std::copy(cur.data.begin(), cur.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(offset));
        offset += cur.size();
      }
      break;
    }
  }
  if (trace) {
    trace->input = in;
    trace->output = out;
  }
  return out;
}

Tensor Layer::backward(const Tensor& grad_out, const Trace& trace, std::span<Tensor> grads,
                       bool need_input) const {
  const bool want_params = !grads.empty();
  Tensor grad_in;
  if (need_input) grad_in = Tensor(in_);
  const Tensor& in = trace.input;
  switch (spec_.kind) {
    case LayerKind::embedding: {
      if (want_params) {
        Tensor& dtable = grads[0];
        const std::size_t dim = spec_.dim;
        for (std::size_t t = 0; t < in_[0]; ++t) {
          const auto idx = static_cast<std::size_t>(in.data[t]);
          for (std::size_t d = 0; d < dim; ++d) dtable.data[idx * dim + d] += grad_out.data[t * dim + d];
        }
      }
      break;
    }
    case LayerKind::conv1d: {
      const Tensor& w = params_[0];
      const std::size_t channels = in_[1];
      const std::size_t maps = spec_.channels;
      const std::size_t window = spec_.kernel * channels;
      for (std::size_t t = 0; t < out_[0]; ++t) {
        const double* g = grad_out.data.data() + t * maps;
        const std::size_t base = t * spec_.stride * channels;
        if (want_params) {
          double* db = grads[1].data.data();
          for (std::size_t o = 0; o < maps; ++o) db[o] += g[o];
          const double* x = in.data.data() + base;
          double* dw = grads[0].data.data();
          for (std::size_t jc = 0; jc < window; ++jc) {
            const double v = x[jc];
            if (v == 0.0) continue;
            double* row = dw + jc * maps;
            for (std::size_t o = 0; o < maps; ++o) row[o] += v * g[o];
          }
        }
        if (need_input) {
          double* dx = grad_in.data.data() + base;
          for (std::size_t jc = 0; jc < window; ++jc) {
            const double* wr = w.data.data() + jc * maps;
            double acc = 0.0;
            for (std::size_t o = 0; o < maps; ++o) acc += wr[o] * g[o];
            dx[jc] += acc;
          }
        }
      }
      break;
    }
    case LayerKind::relu:
      if (need_input) {
        for (std::size_t i = 0; i < in.size(); ++i) grad_in.data[i] = in.data[i] > 0.0 ? grad_out.data[i] : 0.0;
      }
      break;
    case LayerKind::maxpool:
    case LayerKind::maxpool_time:
      if (need_input) {
        const std::size_t channels = in_[1];
        for (std::size_t k = 0; k < trace.index.size(); ++k) {
          const std::size_t c = k % channels;
          grad_in.data[trace.index[k] * channels + c] += grad_out.data[k];
        }
      }
      break;
    case LayerKind::dense: {
      const Tensor& w = params_[0];
      const std::size_t n = in.size();
      for (std::size_t o = 0; o < spec_.units; ++o) {
        const double g = grad_out.data[o];
        if (g == 0.0) continue;
        if (want_params) {
          grads[1].data[o] += g;
          double* dw = grads[0].data.data() + o * n;
          for (std::size_t i = 0; i < n; ++i) dw[i] += g * in.data[i];
        }
        if (need_input) {
          const double* wr = w.data.data() + o * n;
          for (std::size_t i = 0; i < n; ++i) grad_in.data[i] += g * wr[i];
        }
      }
      break;
    }
    case LayerKind::dropout:
      if (need_input) {
        if (trace.mask.empty()) {
          grad_in.data = grad_out.data;
        } else {
          for (std::size_t i = 0; i < in.size(); ++i) grad_in.data[i] = grad_out.data[i] * trace.mask[i];
        }
      }
      break;
    case LayerKind::softmax:
      if (need_input) {
        const auto& p = trace.output.data;
        double dot = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * grad_out.data[i];
        for (std::size_t i = 0; i < p.size(); ++i) grad_in.data[i] = p[i] * (grad_out.data[i] - dot);
      }
      break;
    case LayerKind::parallel: {
      std::size_t offset = 0;
      std::size_t pslot = 0;
      for (std::size_t b = 0; b < branches_.size(); ++b) {
        const auto& stack = branches_[b];
        Tensor g(stack.back().output_shape());
        std::copy_n(grad_out.data.begin() + static_cast<std::ptrdiff_t>(offset), g.size(), g.data.begin());
        offset += g.size();
        std::vector<std::size_t> starts(stack.size());
        for (std::size_t i = 0; i < stack.size(); ++i) {
          starts[i] = pslot;
          pslot += stack[i].parameter_tensors();
        }
        for (std::size_t i = stack.size(); i-- > 0;) {
          const std::size_t np = stack[i].parameter_tensors();
          std::span<Tensor> slice = want_params ? grads.subspan(starts[i], np) : std::span<Tensor>{};
          const bool need = i > 0 || need_input;
          g = stack[i].backward(g, trace.branches[b][i], slice, need);
          if (!need) break;
        }
        if (need_input) {
          for (std::size_t k = 0; k < g.size(); ++k) grad_in.data[k] += g.data[k];
        }
      }
      break;
    }
  }
  return grad_in;
}

Network::Network(Shape input_shape, std::vector<LayerSpec> specs, std::uint64_t seed)
    : input_shape_(std::move(input_shape)), specs_(std::move(specs)) {
  if (specs_.empty()) throw ShapeError("network has no layers");
  Rng init(seed);
  Shape shape = input_shape_;
  std::ostringstream trace;
  trace << to_string(shape);
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].kind == LayerKind::embedding && i != 0) {
      throw ShapeError("layer " + std::to_string(i) + " (embedding): only allowed as the first layer");
    }
    try {
      layers_.emplace_back(specs_[i], shape, init);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + to_string(specs_[i].kind) + "): " + e.what() +
                       "; shape trace: " + trace.str());
    }
    shape = layers_.back().output_shape();
    trace << " -> " << to_string(shape);
  }
}

std::size_t Network::output_size() const {
  return layers_.empty() ? 0 : element_count(layers_.back().output_shape());
}

bool Network::embeds_input() const {
  return !layers_.empty() && layers_.front().spec().kind == LayerKind::embedding;
}

const Shape& Network::dense_input_shape() const {
  return embeds_input() ? layers_.front().output_shape() : input_shape_;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) l.collect(out);
  return out;
}

std::vector<const Tensor*> Network::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) l.collect(out);
  return out;
}

void Network::check_input(const Tensor& input) const {
  if (input.shape != input_shape_) {
    throw ShapeError("layer 0 (" + to_string(specs_.front().kind) + ") expects input " +
                     to_string(input_shape_) + ", got " + to_string(input.shape));
  }
}

Tensor Network::run(const Tensor& input, std::size_t first, Mode mode, Rng* rng,
                    std::vector<Trace>* traces) const {
  Tensor cur = input;
  const std::size_t last = traces ? layers_.size() - 1 : layers_.size();
  for (std::size_t i = first; i < last; ++i) {
    cur = layers_[i].forward(cur, mode, rng, traces ? &(*traces)[i] : nullptr);
  }
  return cur;
}

ConfVector Network::forward(const Tensor& input) const {
  check_input(input);
  return run(input, 0, Mode::infer, nullptr, nullptr).data;
}

ConfVector Network::forward_embedded(const Tensor& rows) const {
  if (!embeds_input()) return forward(rows);
  if (rows.shape != dense_input_shape()) {
    throw ShapeError("layer 1 (" + to_string(specs_.at(1).kind) + ") expects input " +
                     to_string(dense_input_shape()) + ", got " + to_string(rows.shape));
  }
  return run(rows, 1, Mode::infer, nullptr, nullptr).data;
}

Tensor Network::embed(const Tensor& indices) const {
  if (!embeds_input()) throw InvalidArgument("network does not start with an embedding layer");
  check_input(indices);
  return layers_.front().forward(indices, Mode::infer, nullptr, nullptr);
}

CostGradient Network::loss_and_gradients(const Tensor& input, std::size_t label) const {
  return loss_and_gradients(input, label, Mode::infer, nullptr, true, true);
}

CostGradient Network::loss_and_gradients(const Tensor& input, std::size_t label, Mode mode, Rng* rng,
                                          bool want_params, bool want_input) const {
  check_input(input);
  if (layers_.back().spec().kind != LayerKind::softmax) {
    throw InvalidArgument("cross-entropy needs a network ending in softmax");
  }
  const std::size_t classes = output_size();
  if (label >= classes) {
    throw InvalidArgument("label " + std::to_string(label) + " out of range for " + std::to_string(classes) +
                          " classes");
  }
  std::vector<Trace> traces(layers_.size());
  const Tensor logits = run(input, 0, mode, rng, &traces);

  CostGradient out;
  const double m = *std::max_element(logits.data.begin(), logits.data.end());
  double sum = 0.0;
  for (double z : logits.data) sum += std::exp(z - m);
  out.loss = (m + std::log(sum)) - logits.data[label];
  if (out.loss < 0.0) out.loss = 0.0;  // rounding when p[label] == 1

  // Softmax and cross-entropy fold into p - onehot(label).
  Tensor grad(logits.shape);
  const auto p = softmax(logits.data);
  for (std::size_t k = 0; k < classes; ++k) grad.data[k] = p[k] - (k == label ? 1.0 : 0.0);

  std::vector<const Tensor*> params = parameters();
  if (want_params) {
    out.wrt_params.reserve(params.size());
    for (const Tensor* p_ : params) out.wrt_params.emplace_back(p_->shape);
  }
  std::vector<std::size_t> starts(layers_.size());
  std::size_t slot = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    starts[i] = slot;
    slot += layers_[i].parameter_tensors();
  }

  const std::size_t stop = embeds_input() ? 1 : 0;
  if (want_input && stop == layers_.size() - 1) out.wrt_input = grad;
  for (std::size_t i = layers_.size() - 1; i-- > 0;) {
    const std::size_t np = layers_[i].parameter_tensors();
    std::span<Tensor> slice =
        want_params ? std::span<Tensor>(out.wrt_params).subspan(starts[i], np) : std::span<Tensor>{};
    bool need_input = i > stop || (i == stop && (want_input || (want_params && stop == 1)));
    if (i == 0 && stop == 1) need_input = false;
    if (!want_params && i < stop) break;
    grad = layers_[i].backward(grad, traces[i], slice, need_input);
    if (i == stop && want_input) out.wrt_input = grad;
    if (!need_input) break;
  }
  if (want_input && out.wrt_input.shape.empty()) out.wrt_input = Tensor(dense_input_shape());
  return out;
}

void Network::zero_output_layer() {
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (layers_[i].spec().kind == LayerKind::dense) {
      std::vector<Tensor*> ps;
      layers_[i].collect(ps);
      for (Tensor* p : ps) p->fill(0.0);
      return;
    }
  }
  throw InvalidArgument("network has no dense layer to zero");
}

}  // namespace advtext::nn

#include "advtext/train.hpp"

#include <cmath>
#include <numeric>

namespace advtext::nn {

TrainingError::TrainingError(std::size_t epoch, const std::string& what)
    : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

TrainResult train(Network& net, std::span<const Example> data, const TrainConfig& config,
                  const std::function<void(std::size_t, double)>& on_epoch) {
  TrainResult result;
  if (config.epochs == 0) return result;
  if (data.empty()) throw InvalidArgument("training set is empty");
  if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (config.batch_size == 0) throw InvalidArgument("batch size must be positive");

  Rng rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Tensor*> params = net.parameters();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Tensor> acc;
      for (std::size_t k = start; k < end; ++k) {
        const Example& ex = data[order[k]];
        CostGradient g = net.loss_and_gradients(ex.input, ex.label, Mode::train, &rng, true, false);
        if (!std::isfinite(g.loss)) throw TrainingError(epoch, "non-finite loss");
        total += g.loss;
        if (acc.empty()) {
          acc = std::move(g.wrt_params);
        } else {
          for (std::size_t p = 0; p < acc.size(); ++p) {
            auto& a = acc[p].data;
            const auto& b = g.wrt_params[p].data;
            for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
          }
        }
      }
      const double step = config.learning_rate / static_cast<double>(end - start);
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto& w = params[p]->data;
        const auto& g = acc[p].data;
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= step * g[j];
      }
    }
    const double mean = total / static_cast<double>(data.size());
    if (!std::isfinite(mean)) throw TrainingError(epoch, "non-finite loss");
    result.loss_curve.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace advtext::nn

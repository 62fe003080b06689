#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "advtext/nn.hpp"

namespace advtext::nn {

struct Example {
  Tensor input;
  std::size_t label = 0;
};

struct TrainConfig {
  std::size_t epochs = 10;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
};

struct TrainResult {
  std::vector<double> loss_curve;  // mean loss per epoch
};

class TrainingError : public Error {
 public:
  TrainingError(std::size_t epoch, const std::string& what);
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Plain mini-batch SGD on the cross-entropy cost. Samples are shuffled each
/// epoch from `config.seed`, so a run is reproducible bit for bit.
/// `on_epoch` (optional) sees the epoch index and its mean loss.
TrainResult train(Network& net, std::span<const Example> data, const TrainConfig& config,
                  const std::function<void(std::size_t, double)>& on_epoch = {});

}  // namespace advtext::nn

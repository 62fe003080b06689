#include <cmath>
#include <limits>

#include "advtext/train.hpp"
#include "doctest.h"

using namespace advtext;
using namespace advtext::nn;

namespace {

double central_difference(const Network& net, Tensor x, std::size_t label, std::size_t j, double h = 1e-5) {
  const double keep = x.data[j];
  x.data[j] = keep + h;
  const double up = net.loss_and_gradients(x, label).loss;
  x.data[j] = keep - h;
  const double down = net.loss_and_gradients(x, label).loss;
  return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("softmax layer gradient is p minus onehot") {
  Network net({4}, {LayerSpec::softmax()}, 1);
  const Tensor z({4}, {0.3, -1.2, 2.0, 0.0});
  const auto p = softmax(z.data);
  for (std::size_t k = 0; k < 4; ++k) {
    const CostGradient g = net.loss_and_gradients(z, k);
    CHECK(g.loss == doctest::Approx(-std::log(p[k])).epsilon(1e-12));
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(g.wrt_input.data[i] == doctest::Approx(p[i] - (i == k ? 1.0 : 0.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("perfect prediction gives zero loss and gradient") {
  Network net({2}, {LayerSpec::softmax()}, 1);
  const CostGradient g = net.loss_and_gradients(Tensor({2}, {1000.0, 0.0}), 0);
  CHECK(g.loss == 0.0);
  CHECK(g.wrt_input.data[0] == 0.0);
  CHECK(g.wrt_input.data[1] == 0.0);
}

TEST_CASE("softmax is stable and normalized") {
  const auto p = softmax(std::vector<double>{1e4, 1e4 - 1.0, -1e4});
  double sum = 0.0;
  for (double v : p) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
  CHECK(p[0] > p[1]);
}

TEST_CASE("conv net input gradient matches finite differences") {
  Network net({10, 4},
              {LayerSpec::conv1d(3, 5), LayerSpec::relu(), LayerSpec::maxpool(2), LayerSpec::dense(3),
               LayerSpec::softmax()},
              11);
  Rng rng(3);
  Tensor x({10, 4});
  for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
  const CostGradient g = net.loss_and_gradients(x, 2);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double n = central_difference(net, x, 2, j);
    CHECK(std::abs(g.wrt_input.data[j] - n) <= std::max(1e-8, 1e-4 * std::max(std::abs(n), std::abs(g.wrt_input.data[j]))));
  }
}

TEST_CASE("infer mode is deterministic and dropout is the identity") {
  Network with({6}, {LayerSpec::dense(4), LayerSpec::dropout(0.5), LayerSpec::dense(2), LayerSpec::softmax()}, 5);
  Network without({6}, {LayerSpec::dense(4), LayerSpec::dense(2), LayerSpec::softmax()}, 5);
  const Tensor x({6}, {0.1, 0.2, -0.3, 0.4, 0.5, -0.6});
  CHECK(with.forward(x) == with.forward(x));
  CHECK(with.forward(x) == without.forward(x));
}

TEST_CASE("embedding gradient is taken over the embedded rows") {
  Network net({5}, {LayerSpec::embedding(7, 3), LayerSpec::conv1d(2, 4), LayerSpec::maxpool_time(),
                    LayerSpec::dense(2), LayerSpec::softmax()},
              2);
  const Tensor ids({5}, {1, 4, 0, 6, 2});
  const CostGradient g = net.loss_and_gradients(ids, 1);
  CHECK(g.wrt_input.shape == Shape{5, 3});
  CHECK(net.dense_input_shape() == Shape{5, 3});
  CHECK(net.forward_embedded(net.embed(ids)) == net.forward(ids));
  CHECK_THROWS_AS(net.forward(Tensor({5}, {1, 4, 0, 6, 7})), InvalidArgument);
}

TEST_CASE("shape errors name the layer") {
  CHECK_THROWS_AS(Network({3}, {LayerSpec::conv1d(2, 2), LayerSpec::softmax()}, 1), ShapeError);
  CHECK_THROWS_AS(Network({4, 2}, {LayerSpec::conv1d(5, 2), LayerSpec::softmax()}, 1), ShapeError);
  CHECK_THROWS_AS(Network({4}, {LayerSpec::dense(2), LayerSpec::embedding(3, 2)}, 1), ShapeError);
  Network net({3}, {LayerSpec::dense(2), LayerSpec::softmax()}, 1);
  CHECK_THROWS_AS(net.forward(Tensor({4})), ShapeError);
  Network logits({3}, {LayerSpec::dense(2)}, 1);
  CHECK_THROWS_AS(logits.loss_and_gradients(Tensor({3}), 0), InvalidArgument);
}

TEST_CASE("training") {
  Network net({2}, {LayerSpec::dense(4), LayerSpec::relu(), LayerSpec::dense(2), LayerSpec::softmax()}, 9);
  std::vector<Example> data;
  Rng rng(1);
  for (int i = 0; i < 64; ++i) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    data.push_back({Tensor({2}, {a, b}), a + b > 0 ? 1u : 0u});
  }

  SUBCASE("zero epochs leave the network unchanged") {
    Network copy = net;
    const auto r = train(copy, data, {0, 0.1, 8, 1});
    CHECK(r.loss_curve.empty());
    for (std::size_t i = 0; i < net.parameters().size(); ++i) {
      CHECK(copy.parameters()[i]->data == net.parameters()[i]->data);
    }
  }
  SUBCASE("seeded runs are reproducible and the loss falls") {
    Network a = net, b = net;
    const auto ra = train(a, data, {20, 0.2, 8, 4});
    const auto rb = train(b, data, {20, 0.2, 8, 4});
    CHECK(ra.loss_curve == rb.loss_curve);
    CHECK(ra.loss_curve.back() < ra.loss_curve.front());
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(train(net, {}, {}), InvalidArgument);
    CHECK_THROWS_AS(train(net, data, {1, 0.0, 8, 1}), InvalidArgument);
  }
  SUBCASE("non-finite loss reports the epoch") {
    data[5].input.data[0] = std::numeric_limits<double>::infinity();
    try {
      train(net, data, {3, 0.1, 8, 1});
      FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
      CHECK(e.epoch() == 0);
    }
  }
}

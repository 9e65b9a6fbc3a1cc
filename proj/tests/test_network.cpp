#include "doctest.h"

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "netrepair/network.hpp"

using namespace netrepair;
using namespace testutil;

TEST_CASE("activation values match their definitions") {
    CHECK(activate(ActivationKind::ReLU, -3.0, 0.5) == 0.0);
    CHECK(activate(ActivationKind::ReLU, 2.0, 0.5) == 2.0);
    CHECK(activate(ActivationKind::LeakyReLU, -4.0, 0.5) == -2.0);
    CHECK(activate(ActivationKind::LeakyReLU, 3.0, 0.5) == 3.0);
    CHECK(activate(ActivationKind::ELU, -1.0, 0.5) ==
          doctest::Approx(0.5 * (std::exp(-1.0) - 1.0)).epsilon(1e-12));
    CHECK(activate(ActivationKind::ELU, -1.0, 0.5) == doctest::Approx(-0.31606).epsilon(1e-4));
    CHECK(activate(ActivationKind::ELU, 2.0, 0.5) == 2.0);
    CHECK(activate(ActivationKind::Tanh, 0.5, 0.5) == std::tanh(0.5));
}

TEST_CASE("activation derivatives, including the kink convention") {
    CHECK(activate_derivative(ActivationKind::ReLU, 0.0, 0.5) == 0.0);
    CHECK(activate_derivative(ActivationKind::ReLU, 1.0, 0.5) == 1.0);
    CHECK(activate_derivative(ActivationKind::ReLU, -1.0, 0.5) == 0.0);
    CHECK(activate_derivative(ActivationKind::LeakyReLU, -2.0, 0.5) == 0.5);
    CHECK(activate_derivative(ActivationKind::LeakyReLU, 2.0, 0.5) == 1.0);
    CHECK(activate_derivative(ActivationKind::ELU, -1.0, 0.5) ==
          doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(activate_derivative(ActivationKind::ELU, 2.0, 0.5) == 1.0);
    double t = std::tanh(0.3);
    CHECK(activate_derivative(ActivationKind::Tanh, 0.3, 0.5) ==
          doctest::Approx(1.0 - t * t).epsilon(1e-12));
}

TEST_CASE("activation names round trip and reject unknowns") {
    for (auto k : {ActivationKind::ReLU, ActivationKind::Tanh, ActivationKind::LeakyReLU,
                   ActivationKind::ELU})
        CHECK(activation_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(activation_from_string("sigmoid"), InvalidArgument);
    CHECK(loss_norm_from_string("l1") == LossNorm::L1);
    CHECK(loss_norm_from_string("l2") == LossNorm::L2);
    CHECK_THROWS_AS(loss_norm_from_string("linf"), InvalidArgument);
}

TEST_CASE("forward: identity single layer passes inputs through") {
    Network net = identity_net(2);
    auto y = net.forward(std::vector<double>{1.5, -2.0});
    CHECK(y == std::vector<double>{1.5, -2.0}); // no activation on the last layer
}

TEST_CASE("forward: two-layer relu net, hand-evaluated") {
    Layer l1;
    l1.weights = {{1.0, 0.0}, {0.0, 1.0}};
    l1.biases = {-1.0, -1.0};
    Layer l2;
    l2.weights = {{1.0, 0.0}, {0.0, 1.0}};
    l2.biases = {0.0, 0.0};
    Network net({l1, l2}, ActivationKind::ReLU);
    auto y = net.forward(std::vector<double>{2.0, 0.5});
    CHECK(y == std::vector<double>{1.0, 0.0}); // relu(x - 1) then identity affine
}

TEST_CASE("trace holds every state and matches forward") {
    Network one = identity_net(3);
    std::vector<double> x{0.5, -1.0, 2.0};
    auto tr = one.trace(x);
    CHECK(tr.states.size() == 2);
    CHECK(tr.states.front() == x);
    CHECK(tr.states.back() == one.forward(x));

    Network deep = random_net({3, 5, 4, 2}, ActivationKind::Tanh, 0.5, 11);
    auto trd = deep.trace(x);
    CHECK(trd.states.size() == 4);
    auto fwd = deep.forward(x);
    bool same = trd.states.back().size() == fwd.size();
    for (std::size_t i = 0; same && i < fwd.size(); ++i)
        same = same_bits(trd.states.back()[i], fwd[i]);
    CHECK(same);
}

TEST_CASE("forward_from resumes a pass at any recorded state") {
    Network net = random_net({2, 6, 5, 3}, ActivationKind::LeakyReLU, 0.5, 21);
    std::vector<double> x{0.7, -0.3};
    auto tr = net.trace(x);
    for (std::size_t t = 0; t < tr.states.size(); ++t) {
        auto y = net.forward_from(t, tr.states[t]);
        bool same = y.size() == tr.states.back().size();
        for (std::size_t i = 0; same && i < y.size(); ++i)
            same = same_bits(y[i], tr.states.back()[i]);
        CHECK(same);
    }
    CHECK_THROWS_AS(net.forward_from(4, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("network construction validates shapes") {
    Layer bad;
    bad.weights = {{1.0, 2.0}, {3.0}};
    bad.biases = {0.0, 0.0};
    CHECK_THROWS_AS(Network({bad}, ActivationKind::ReLU), ShapeError);

    Layer a; // 2 -> 2
    a.weights = {{1.0, 0.0}, {0.0, 1.0}};
    a.biases = {0.0, 0.0};
    Layer b; // 3 -> 1, incompatible with a
    b.weights = {{1.0, 1.0, 1.0}};
    b.biases = {0.0};
    CHECK_THROWS_AS(Network({a, b}, ActivationKind::ReLU), ShapeError);
    CHECK_THROWS_AS(Network({}, ActivationKind::ReLU), ShapeError);
}

TEST_CASE("validate flags non-finite weights after in-place edits") {
    Network net = identity_net(2);
    net.validate();
    net.mutable_layer(0).weights[0][0] = std::nan("");
    CHECK_THROWS_AS(net.validate(), DivergenceError);
}

TEST_CASE("parameter_count counts weights plus biases") {
    Network net = random_net({2, 2, 1}, ActivationKind::ReLU, 0.5, 3);
    CHECK(net.parameter_count() == (2 * 2 + 2) + (2 * 1 + 1));
}

TEST_CASE("normalize_input clamps then rescales") {
    Network net = identity_net(1);
    CHECK_THROWS_AS(net.normalize_input(std::vector<double>{1.0}), InvalidArgument);
    Normalization norm;
    norm.input_min = {0.0};
    norm.input_max = {10.0};
    norm.mean = {5.0, 0.0};
    norm.range = {2.0, 1.0};
    net.normalization = norm;
    CHECK(net.normalize_input(std::vector<double>{-1.0}) == std::vector<double>{-2.5});
    CHECK(net.normalize_input(std::vector<double>{20.0}) == std::vector<double>{2.5});
    CHECK(net.normalize_input(std::vector<double>{6.0}) == std::vector<double>{0.5});
}

TEST_CASE("loss_value: unit distance under both norms") {
    // Zero weights, bias [1, 0]: every input maps to [1, 0].
    Layer l;
    l.weights = {{0.0}, {0.0}};
    l.biases = {1.0, 0.0};
    Network net({l}, ActivationKind::ReLU);
    std::vector<TrainingPair> batch{{{0.3}, {0.0, 0.0}}};
    CHECK(loss_value(net, batch, LossNorm::L2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(loss_value(net, batch, LossNorm::L1) == doctest::Approx(1.0).epsilon(1e-12));

    // Batch of two: distances add up (sum, not mean).
    std::vector<TrainingPair> two{{{0.3}, {0.0, 0.0}}, {{0.1}, {1.0, 1.0}}};
    CHECK(loss_value(net, two, LossNorm::L1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(loss_value(net, two, LossNorm::L2) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gradient of a zero net on a zero-residual example is zero") {
    Layer l;
    l.weights = {{0.0}};
    l.biases = {0.0};
    Network net({l}, ActivationKind::ReLU);
    std::vector<TrainingPair> batch{{{1.0}, {0.0}}};
    auto g = gradient(net, batch, LossNorm::L2);
    CHECK(g.layers[0].weights[0][0] == 0.0);
    CHECK(g.layers[0].biases[0] == 0.0);
}

TEST_CASE("gradient matches central finite differences on a small tanh net") {
    Network net = random_net({3, 4, 2}, ActivationKind::Tanh, 0.5, 77);
    std::vector<TrainingPair> batch;
    Rng rng(78);
    for (int i = 0; i < 6; ++i) {
        TrainingPair p;
        for (int d = 0; d < 3; ++d) p.input.push_back(rng.uniform(-1.0, 1.0));
        for (int d = 0; d < 2; ++d) p.target.push_back(rng.uniform(-1.0, 1.0));
        batch.push_back(std::move(p));
    }
    for (LossNorm norm : {LossNorm::L2, LossNorm::L1}) {
        auto g = gradient(net, batch, norm);
        auto fd = fd_gradient(net, batch, norm, 1e-5);
        CHECK(gradient_gap(g, fd) < 1e-4);
    }
}

TEST_CASE("one small gradient step decreases the loss") {
    Network net = random_net({2, 5, 2}, ActivationKind::ELU, 0.5, 31);
    std::vector<TrainingPair> batch{{{0.4, -0.8}, {1.0, -1.0}}};
    double before = loss_value(net, batch, LossNorm::L2);
    auto g = gradient(net, batch, LossNorm::L2);
    apply_gradient(net, g, -1e-4);
    double after = loss_value(net, batch, LossNorm::L2);
    CHECK(after < before);
}

TEST_CASE("accumulate_gradient with zero weight leaves the accumulator untouched") {
    Network net = random_net({2, 3, 2}, ActivationKind::ReLU, 0.5, 41);
    std::vector<TrainingPair> batch{{{0.2, 0.3}, {0.0, 0.0}}};
    ParamGradient acc = zero_gradient(net);
    acc.layers[0].weights[1][0] = 7.5; // existing content must survive
    ParamGradient before = acc;
    accumulate_gradient(net, batch, LossNorm::L2, 0.0, acc);
    CHECK(acc.layers[0].weights[1][0] == before.layers[0].weights[1][0]);
    bool untouched = true;
    for (std::size_t l = 0; l < acc.layers.size(); ++l)
        for (std::size_t i = 0; i < acc.layers[l].biases.size(); ++i)
            untouched = untouched && same_bits(acc.layers[l].biases[i], before.layers[l].biases[i]);
    CHECK(untouched);
}

TEST_CASE("apply_gradient adds step times gradient") {
    Network net = linear_net(1.0, 0.0);
    ParamGradient g = zero_gradient(net);
    g.layers[0].weights[0][0] = 2.0;
    g.layers[0].biases[0] = 3.0;
    apply_gradient(net, g, 0.5);
    CHECK(net.layer(0).weights[0][0] == 2.0);
    CHECK(net.layer(0).biases[0] == 1.5);
}

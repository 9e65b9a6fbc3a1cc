#include "doctest.h"

#include <algorithm>
#include <vector>

#include "helpers.hpp"
#include "netrepair/finetuner.hpp"
#include "netrepair/synthetic.hpp"

using namespace netrepair;
using namespace testutil;

namespace {

SyntheticFixture planted() {
    return make_buggy({{2, 8, 2, 2}, ActivationKind::ReLU, 0.5, {}, 0.2, 5});
}

bool selection_contains(const std::vector<NeuronIndex>& selected, const NeuronIndex& n) {
    return std::find(selected.begin(), selected.end(), n) != selected.end();
}

} // namespace

TEST_CASE("weight view flattens fan-in weights plus bias per neuron") {
    Network small = random_net({3, 5, 2}, ActivationKind::ReLU, 0.5, 1);
    NeuronWeightView one(small, {{1, 0}});
    CHECK(one.size() == 4);
    CHECK(one.earliest_layer() == 1);
    auto values = one.extract(small);
    REQUIRE(values.size() == 4);
    CHECK(values[0] == small.layer(0).weights[0][0]);
    CHECK(values[2] == small.layer(0).weights[0][2]);
    CHECK(values[3] == small.layer(0).biases[0]);

    Network wide = random_net({5, 50, 50, 5}, ActivationKind::ReLU, 0.5, 2);
    std::vector<NeuronIndex> ten;
    for (std::size_t j = 0; j < 10; ++j) ten.push_back({2, j});
    NeuronWeightView block(wide, ten);
    CHECK(block.size() == 510); // 10 neurons, 50 weights + 1 bias each

    NeuronWeightView mixed(wide, {{3, 0}, {2, 1}});
    CHECK(mixed.earliest_layer() == 2);
}

TEST_CASE("write_back touches exactly the viewed neurons") {
    Network net = random_net({2, 6, 4, 2}, ActivationKind::Tanh, 0.5, 7);
    std::vector<NeuronIndex> picked{{2, 3}, {1, 0}, {3, 1}};
    NeuronWeightView view(net, picked);

    Network edited = net;
    auto values = view.extract(net);
    for (double& v : values) v += 1.0;
    view.write_back(values, edited);

    auto changed = changed_neurons(net, edited);
    CHECK(changed.size() == picked.size());
    for (const auto& n : changed) CHECK(selection_contains(picked, n));
    CHECK(view.extract(edited) == values);

    // Round trip of the unmodified values is a bitwise no-op.
    Network untouched = net;
    view.write_back(view.extract(net), untouched);
    CHECK(nets_bit_identical(untouched, net));
}

TEST_CASE("weight view validation") {
    Network net = random_net({2, 4, 2}, ActivationKind::ReLU, 0.5, 3);
    CHECK_THROWS_AS(NeuronWeightView(net, {}), InvalidArgument);
    CHECK_THROWS_AS(NeuronWeightView(net, {{1, 1}, {1, 1}}), InvalidArgument);
    CHECK_THROWS_AS(NeuronWeightView(net, {{0, 0}}), InvalidArgument);
    CHECK_THROWS_AS(NeuronWeightView(net, {{3, 0}}), InvalidArgument);
    CHECK_THROWS_AS(NeuronWeightView(net, {{1, 4}}), InvalidArgument);

    NeuronWeightView view(net, {{1, 1}});
    std::vector<double> wrong(view.size() + 1, 0.0);
    CHECK_THROWS_AS(view.write_back(wrong, net), ShapeError);
    Network other = random_net({3, 4, 2}, ActivationKind::ReLU, 0.5, 4);
    CHECK_THROWS_AS(view.extract(other), ShapeError);
}

TEST_CASE("repair fitness blends residual violation and drawdown rates") {
    SyntheticFixture fx = planted();
    auto sched = default_delta_schedule(fx.property.pre);
    auto set = collect(fx.network, fx.property, 1200, 10, sched, 17);
    REQUIRE(!set.negatives.empty());
    REQUIRE(!set.positives.empty());

    EvalSets sets;
    sets.negatives = set.negatives;
    sets.negative_spec.assign(set.negatives.size(), 0);
    sets.positives = set.positives;
    sets.positive_spec.assign(set.positives.size(), 0);
    std::vector<PropertySpec> specs{fx.property};

    // Unrepaired: every negative still violates, no positive was broken.
    CHECK(repair_fitness(fx.network, sets, specs, 0.6, 0.4) == 0.6);

    // A constant-output stand-in satisfying y0 <= y1 everywhere scores 0.
    Layer flat;
    flat.weights = {{0.0, 0.0}, {0.0, 0.0}};
    flat.biases = {0.0, 1.0};
    Network fixed({flat}, ActivationKind::ReLU);
    CHECK(repair_fitness(fixed, sets, specs, 0.6, 0.4) == 0.0);

    // With beta = 0 the positive set cannot influence the value.
    EvalSets other = sets;
    other.positives = random_points(50, 2, 23);
    other.positive_spec.assign(50, 0);
    CHECK(repair_fitness(fx.network, sets, specs, 1.0, 0.0) ==
          repair_fitness(fx.network, other, specs, 1.0, 0.0));

    EvalSets no_pos = sets;
    no_pos.positives.clear();
    no_pos.positive_spec.clear();
    CHECK(repair_fitness(fx.network, no_pos, specs, 0.6, 0.4) == 0.6);

    EvalSets no_neg;
    no_neg.positives = sets.positives;
    no_neg.positive_spec = sets.positive_spec;
    CHECK_THROWS_AS(repair_fitness(fx.network, no_neg, specs, 0.6, 0.4), InvalidArgument);
    EvalSets mismatched = sets;
    mismatched.negative_spec.pop_back();
    CHECK_THROWS_AS(repair_fitness(fx.network, mismatched, specs, 0.6, 0.4), InvalidArgument);
}

namespace {

FinetuneConfig small_finetune_config() {
    FinetuneConfig cfg;
    cfg.r = 4;
    cfg.repair_negatives = 300;
    cfg.repair_positives = 1200;
    cfg.test_negatives = 600;
    cfg.test_positives = 600;
    cfg.min_positives = 10;
    cfg.drawdown_abort = 0.1;
    cfg.swarm.particles = 12;
    cfg.swarm.max_iters = 60;
    cfg.swarm.stagnation_window = 12;
    return cfg;
}

} // namespace

TEST_CASE("fine_tune repairs a planted violation while touching only selected neurons") {
    SyntheticFixture fx = planted();
    std::vector<PropertySpec> specs{fx.property};
    FinetuneConfig cfg = small_finetune_config();

    auto [repaired, report] = fine_tune(fx.network, specs, cfg, 99);
    CHECK(report.mode == "finetune");
    CHECK(report.seed == 99);
    REQUIRE(report.samples.size() == 1);
    CHECK(report.samples[0].negatives == 300);
    CHECK(report.samples[0].positives == 1200);
    CHECK(report.eval_negatives == 600);
    CHECK(report.eval_positives == 600);
    CHECK(report.iterations >= 1);
    bool known_termination = report.termination == "max_iters" ||
                             report.termination == "stagnation" ||
                             report.termination == "drawdown_abort";
    CHECK(known_termination);
    REQUIRE(report.repaired_neurons.size() == 4);

    CHECK(report.improvement >= 0.5);
    CHECK(report.drawdown <= 0.1);

    auto changed = changed_neurons(fx.network, repaired);
    for (const auto& n : changed) CHECK(selection_contains(report.repaired_neurons, n));

    auto [again, report2] = fine_tune(fx.network, specs, cfg, 99);
    CHECK(nets_bit_identical(repaired, again));
    CHECK(report2.improvement == report.improvement);
    CHECK(report2.drawdown == report.drawdown);

    auto [other, report3] = fine_tune(fx.network, specs, cfg, 100);
    CHECK(report3.seed == 100);
}

TEST_CASE("layer-restricted fine_tune stays inside the requested layer") {
    SyntheticFixture fx = planted();
    std::vector<PropertySpec> specs{fx.property};
    FinetuneConfig cfg = small_finetune_config();
    cfg.layer_filter = 3; // output layer: only two neurons exist there
    cfg.r = 3;

    auto [repaired, report] = fine_tune(fx.network, specs, cfg, 7);
    REQUIRE(report.repaired_neurons.size() == 2);
    for (const auto& n : report.repaired_neurons) CHECK(n.layer == 3);
    for (const auto& n : changed_neurons(fx.network, repaired)) CHECK(n.layer == 3);
    bool noted_truncation = false;
    for (const auto& note : report.notes)
        noted_truncation = noted_truncation || note.find("available") != std::string::npos;
    CHECK(noted_truncation);
    CHECK(report.improvement >= 0.5);
}

TEST_CASE("fine_tune with nothing to repair returns the original network") {
    Network net = identity_net(2);
    PropertySpec spec;
    spec.id = "sat";
    spec.pre = box({{0.0, 1.0}, {0.0, 1.0}});
    spec.post = single_atom_post({1.0, 0.0}, 2.0);
    FinetuneConfig cfg = small_finetune_config();
    cfg.repair_negatives = 10;
    cfg.repair_positives = 50;
    cfg.max_collect_batches = 2;

    auto [repaired, report] = fine_tune(net, {spec}, cfg, 1);
    CHECK(nets_bit_identical(repaired, net));
    CHECK(report.termination == "no_negatives_found");
    CHECK(report.improvement == 1.0);
    CHECK(report.drawdown == 0.0);
    CHECK(report.repaired_neurons.empty());
    CHECK(!report.notes.empty());
}

TEST_CASE("fine_tune configuration validation") {
    SyntheticFixture fx = planted();
    std::vector<PropertySpec> specs{fx.property};
    FinetuneConfig cfg = small_finetune_config();
    cfg.r = 0;
    CHECK_THROWS_AS(fine_tune(fx.network, specs, cfg, 1), InvalidArgument);
    cfg = small_finetune_config();
    cfg.alpha = 0.9;
    cfg.beta = 0.9;
    CHECK_THROWS_AS(fine_tune(fx.network, specs, cfg, 1), InvalidArgument);
    cfg = small_finetune_config();
    cfg.drawdown_abort = 1.5;
    CHECK_THROWS_AS(fine_tune(fx.network, specs, cfg, 1), InvalidArgument);
    cfg = small_finetune_config();
    cfg.swarm.particles = 1;
    CHECK_THROWS_AS(fine_tune(fx.network, specs, cfg, 1), InvalidArgument);
    cfg = small_finetune_config();
    cfg.repair_negatives = 0;
    CHECK_THROWS_AS(fine_tune(fx.network, specs, cfg, 1), InvalidArgument);
}

#include "doctest.h"

#include <cstdio>
#include <cstdlib>

#include "helpers.hpp"
#include "json.hpp"
#include "netrepair/report.hpp"

using namespace netrepair;
using namespace testutil;

namespace {

// y = |x| - 1.5 via one ReLU layer: satisfied (y <= 0) exactly on |x| <= 1.5.
Network vee_net() {
    Layer l1;
    l1.weights = {{1.0}, {-1.0}};
    l1.biases = {0.0, 0.0};
    Layer l2;
    l2.weights = {{1.0, 1.0}};
    l2.biases = {-1.5};
    return Network({l1, l2}, ActivationKind::ReLU);
}

PropertySpec nonpositive_output() {
    PropertySpec spec;
    spec.id = "s";
    spec.pre = box({{-3.0, 3.0}});
    spec.post = single_atom_post({1.0}, 0.0);
    return spec;
}

} // namespace

TEST_CASE("evaluate counts fixed negatives and broken positives per point") {
    Network before = vee_net();
    std::vector<PropertySpec> specs{nonpositive_output()};
    EvalSets sets;
    sets.negatives = {{2.0}, {-2.0}};
    sets.negative_spec = {0, 0};
    sets.positives = {{1.0}, {-1.0}};
    sets.positive_spec = {0, 0};

    // Identity replacement: y = x. Fixes x=-2, keeps x=2 broken; keeps x=-1,
    // breaks x=1.
    auto r = evaluate(before, linear_net(1.0, 0.0), specs, sets);
    CHECK(r.improvement == 0.5);
    CHECK(r.drawdown == 0.5);
    CHECK(r.eval_negatives == 2);
    CHECK(r.eval_positives == 2);

    // Unchanged network: nothing fixed, nothing broken.
    auto same = evaluate(before, before, specs, sets);
    CHECK(same.improvement == 0.0);
    CHECK(same.drawdown == 0.0);

    // Uniformly negative output fixes everything and breaks nothing.
    auto fixed = evaluate(before, linear_net(0.0, -1.0), specs, sets);
    CHECK(fixed.improvement == 1.0);
    CHECK(fixed.drawdown == 0.0);
}

TEST_CASE("evaluate routes each point to its tagged spec") {
    std::vector<PropertySpec> specs{nonpositive_output(), nonpositive_output()};
    specs[1].id = "t";
    specs[1].post = single_atom_post({-1.0}, -1.0); // y >= 1

    EvalSets sets;
    sets.negatives = {{-1.0}, {-1.0}};
    sets.negative_spec = {0, 1}; // same point, different spec
    auto r = evaluate(identity_net(1), identity_net(1), specs, sets);
    CHECK(r.improvement == 0.5); // satisfies y<=0 but not y>=1
    CHECK(r.drawdown == 0.0);
}

TEST_CASE("evaluate conventions for empty sides and bad tags") {
    std::vector<PropertySpec> specs{nonpositive_output()};
    Network net = identity_net(1);

    EvalSets empty;
    auto r = evaluate(net, net, specs, empty);
    CHECK(r.improvement == 1.0);
    CHECK(r.drawdown == 0.0);
    CHECK(r.eval_negatives == 0);
    CHECK(r.eval_positives == 0);

    EvalSets mismatched;
    mismatched.negatives = {{1.0}};
    CHECK_THROWS_AS(evaluate(net, net, specs, mismatched), InvalidArgument);

    EvalSets out_of_range;
    out_of_range.positives = {{1.0}};
    out_of_range.positive_spec = {1};
    CHECK_THROWS_AS(evaluate(net, net, specs, out_of_range), InvalidArgument);
}

TEST_CASE("evaluate is independent of the worker thread count") {
    Network before = random_net({3, 16, 8, 2}, ActivationKind::ReLU, 0.5, 5);
    Network after = random_net({3, 16, 8, 2}, ActivationKind::ReLU, 0.5, 6);
    std::vector<PropertySpec> specs{nonpositive_output()};
    specs[0].post = single_atom_post({1.0, -1.0}, 0.25);
    EvalSets sets;
    sets.negatives = random_points(700, 3, 7);
    sets.negative_spec.assign(700, 0);
    sets.positives = random_points(550, 3, 8);
    sets.positive_spec.assign(550, 0);

    setenv("NETREPAIR_THREADS", "1", 1);
    auto serial = evaluate(before, after, specs, sets);
    setenv("NETREPAIR_THREADS", "5", 1);
    auto threaded = evaluate(before, after, specs, sets);
    unsetenv("NETREPAIR_THREADS");
    CHECK(same_bits(serial.improvement, threaded.improvement));
    CHECK(same_bits(serial.drawdown, threaded.drawdown));
}

TEST_CASE("report JSON round trips every field") {
    RepairReport r;
    r.mode = "finetune";
    r.improvement = 0.9921875;
    r.drawdown = 0.00390625;
    r.localization_time = 0.125;
    r.total_time = 12.75;
    r.epochs = 0;
    r.iterations = 37;
    r.termination = "stagnation";
    r.seed = 424242;
    r.repaired_neurons = {{2, 14}, {2, 3}};
    r.samples = {{"phi-a", 120, 880, 0.0}, {"phi-b", 5, 995, 0.25}};
    r.eval_negatives = 1000;
    r.eval_positives = 1000;
    r.config = {{"alpha", "0.6"}, {"beta", "0.4"}};
    r.notes = {"positives short by 3"};

    auto text = report_to_json(r);
    auto back = report_from_json(text);
    CHECK(back.schema_version == 1);
    CHECK(back.mode == r.mode);
    CHECK(same_bits(back.improvement, r.improvement));
    CHECK(same_bits(back.drawdown, r.drawdown));
    CHECK(back.localization_time == r.localization_time);
    CHECK(back.total_time == r.total_time);
    CHECK(back.iterations == 37);
    CHECK(back.termination == "stagnation");
    CHECK(back.seed == 424242);
    REQUIRE(back.repaired_neurons.size() == 2);
    CHECK(back.repaired_neurons[0] == NeuronIndex{2, 14});
    REQUIRE(back.samples.size() == 2);
    CHECK(back.samples[1].spec_id == "phi-b");
    CHECK(back.samples[1].delta_used == 0.25);
    CHECK(back.eval_negatives == 1000);
    CHECK(back.config == r.config);
    CHECK(back.notes == r.notes);

    auto j = nlohmann::json::parse(text);
    CHECK(j.contains("schema_version"));
    CHECK(j.contains("improvement"));
    CHECK(j.contains("drawdown"));
    CHECK(j.contains("localization_time_s"));
    CHECK(j.contains("total_time_s"));
    CHECK(j["repaired_neurons"][0]["layer"] == 2);
    CHECK(j["eval"]["negatives"] == 1000);
    CHECK(j["config"]["alpha"] == "0.6");
}

TEST_CASE("report files save, load, and reject invalid input") {
    RepairReport r;
    r.mode = "retrain";
    r.epochs = 12;
    r.termination = "all_satisfied";
    const std::string path = "tmp_report.json";
    save_report(r, path);
    auto back = load_report(path);
    CHECK(back.mode == "retrain");
    CHECK(back.epochs == 12);
    CHECK(back.termination == "all_satisfied");
    std::remove(path.c_str());

    CHECK_THROWS_AS(report_from_json("not json"), ParseError);
    CHECK_THROWS_AS(load_report("missing_report.json"), ParseError);
}

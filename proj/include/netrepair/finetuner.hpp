#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "netrepair/localizer.hpp"
#include "netrepair/network.hpp"
#include "netrepair/properties.hpp"
#include "netrepair/pso.hpp"
#include "netrepair/report.hpp"
#include "netrepair/sampler.hpp"

namespace netrepair {

struct FinetuneConfig {
    std::size_t r = 10;  // neurons to repair
    double alpha = 0.6;  // weight of residual violation rate
    double beta = 0.4;   // weight of drawdown rate
    std::optional<std::size_t> layer_filter; // layer-wise mode when set
    pso::SwarmConfig swarm;
    double drawdown_abort = 0.05;
    std::size_t repair_negatives = 10000; // per-spec sampling targets
    std::size_t repair_positives = 10000;
    std::size_t test_negatives = 10000;
    std::size_t test_positives = 10000;
    std::size_t min_positives = 50;
    std::size_t max_collect_batches = 64;
    bool exact_localization = false;
    FastNormalization fast_normalization = FastNormalization::MeanDifference;
    std::vector<double> delta_schedule; // empty -> per-spec geometric default

    void validate() const;
};

// Flattened view of the incoming weight rows and biases of a set of neurons:
// per neuron, fan_in weights then the bias, concatenated in the given order.
// Writing a vector back touches exactly those coordinates.
class NeuronWeightView {
public:
    NeuronWeightView(const Network& net, std::vector<NeuronIndex> indices);

    std::size_t size() const { return size_; }
    const std::vector<NeuronIndex>& indices() const { return indices_; }
    std::size_t earliest_layer() const { return earliest_layer_; } // 1-based

    std::vector<double> extract(const Network& net) const;
    void write_back(std::span<const double> values, Network& net) const;

private:
    void check_against(const Network& net) const;

    std::vector<NeuronIndex> indices_;
    std::vector<std::size_t> fan_in_;
    std::size_t size_ = 0;
    std::size_t earliest_layer_ = 0;
};

// alpha * (fraction of negatives still violating their spec) +
// beta * (fraction of positives now violating theirs). Negatives must be
// nonempty; empty positives contribute zero drawdown.
double repair_fitness(const Network& candidate, const EvalSets& sets,
                      const std::vector<PropertySpec>& specs, double alpha, double beta);

// Full fine-tuning pipeline: sample every spec, accumulate responsibility
// over the specs that produced negatives, select the top-r neurons (within
// layer_filter when set), and search their weight view with the particle
// swarm. Stops on swarm termination or when the incumbent's drawdown exceeds
// drawdown_abort. The report's improvement/drawdown come from freshly seeded
// held-out sets. With no negatives anywhere there is nothing to repair: the
// original network returns with improvement 1.
std::pair<Network, RepairReport> fine_tune(const Network& net,
                                           const std::vector<PropertySpec>& specs,
                                           const FinetuneConfig& cfg, std::uint64_t seed);

} // namespace netrepair

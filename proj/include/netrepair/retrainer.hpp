#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "netrepair/network.hpp"
#include "netrepair/properties.hpp"
#include "netrepair/report.hpp"
#include "netrepair/sampler.hpp"

namespace netrepair {

enum class Provenance { OriginalPositive, CorrectedNegative, PreservationSample };

struct RepairPair {
    std::vector<double> input;
    std::vector<double> target;
    Provenance provenance = Provenance::OriginalPositive;
    std::size_t spec_index = 0;
};

struct RepairDataset {
    std::vector<RepairPair> pairs;
};

struct RetrainConfig {
    double alpha = 0.5; // weight of the repair loss
    double beta = 0.5;  // weight of the preservation loss
    std::size_t k = 5;  // neighbors for label correction
    LossNorm norm = LossNorm::L2;
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 200;
    std::size_t early_stop_window = 10;
    double improvement_tolerance = 1e-6;
    std::uint64_t seed = 42;

    void validate() const;
};

// Replaces each violating output with the mean of its k nearest satisfying
// outputs (Euclidean, ties by lower index, k capped at the positive count);
// when that mean itself violates the condition, the single nearest
// satisfying output is used instead. Every returned label satisfies `post`.
std::vector<std::vector<double>> negative_correct(const std::vector<std::vector<double>>& y_p,
                                                  const std::vector<std::vector<double>>& y_n,
                                                  std::size_t k, const OutputCondition& post);

// Positives keep their own outputs as targets; negatives get corrected
// labels. collections[i] must stem from one of the given specs, matched by
// spec_id against specs; unknown ids are an error.
RepairDataset build_repair_dataset(const std::vector<LabeledSampleSet>& collections,
                                   std::size_t k, const std::vector<PropertySpec>& specs);

// Batch-summed distance from the network's outputs to the repair targets.
double loss_drp(const Network& net, const RepairDataset& d_re, LossNorm norm);

// Same over a plain preservation dataset.
double loss_mpr(const Network& net, std::span<const TrainingPair> d, LossNorm norm);

struct RetrainResult {
    Network repaired;
    RepairReport report;
};

// Mini-batch SGD on alpha * repair loss + beta * preservation loss, starting
// from the original weights. Stops when every corrected negative satisfies
// its spec, when the per-epoch improvement stalls for early_stop_window
// epochs, or at max_epochs; the best-improvement checkpoint wins. The report
// carries held-out improvement/drawdown from `eval`.
RetrainResult retrain(const Network& net, std::span<const TrainingPair> preservation,
                      const RepairDataset& d_re, const RetrainConfig& cfg,
                      const std::vector<PropertySpec>& specs, const EvalSets& eval);

} // namespace netrepair

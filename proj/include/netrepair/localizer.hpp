#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netrepair/network.hpp"

namespace netrepair {

// Per-neuron nonnegative scores for every non-input layer. rows[t] holds the
// scores of trace state t+1, i.e. rows[0] is the first hidden layer and
// rows.back() is the output layer.
struct ResponsibilityMatrix {
    std::vector<std::vector<double>> rows;

    void add(const ResponsibilityMatrix& other); // element-wise accumulate
};

// layer is the 1-based trace state index (1 = first hidden layer,
// layer_count() = output layer); neuron indexes within that layer.
struct NeuronIndex {
    std::size_t layer = 0;
    std::size_t neuron = 0;

    bool operator==(const NeuronIndex&) const = default;
};

// Sum over every negative/positive pair of the element-wise absolute state
// gap: r[j] = sum_{x_n} sum_{x_p} |state_j(x_n) - state_j(x_p)|, computed on
// post-activation states. Exact but quadratic in sample counts (evaluated
// with a sort + prefix-sum rearrangement, identical up to summation order).
ResponsibilityMatrix responsibility_exact(const Network& net,
                                          std::span<const std::vector<double>> positives,
                                          std::span<const std::vector<double>> negatives);

enum class FastNormalization {
    MeanDifference, // |mean over negatives - mean over positives| (default)
    RawSums         // |sum over negatives - sum over positives|
};

// One-pass variant: difference of per-set aggregates instead of the full
// pairwise sum. Opposite-signed gaps can cancel, so this is a lower bound on
// the exact score (guaranteed only in MeanDifference mode). RawSums keeps
// the unnormalized aggregate difference, which inflates scores whenever the
// two sets differ in size.
ResponsibilityMatrix responsibility_fast(const Network& net,
                                         std::span<const std::vector<double>> positives,
                                         std::span<const std::vector<double>> negatives,
                                         FastNormalization norm = FastNormalization::MeanDifference);

struct TopSelection {
    std::vector<NeuronIndex> neurons; // sorted by descending score
    std::vector<double> scores;
    bool truncated = false; // r exceeded the number of available neurons
};

// The r highest-scoring neurons, optionally restricted to one layer (1-based
// trace state index). Ties resolve by (layer, neuron) ascending.
TopSelection select_top(const ResponsibilityMatrix& matrix, std::size_t r,
                        std::optional<std::size_t> layer_filter = std::nullopt);

// CSV dump: header then one "layer,neuron,score" row per neuron.
void save_responsibility_csv(const ResponsibilityMatrix& matrix, const std::string& path);

} // namespace netrepair

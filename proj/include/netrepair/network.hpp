#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netrepair/errors.hpp"

namespace netrepair {

enum class ActivationKind { ReLU, Tanh, LeakyReLU, ELU };

ActivationKind activation_from_string(std::string_view name);
std::string_view to_string(ActivationKind kind);

// Scalar activation and its derivative. alpha parameterizes the leaky and
// exponential variants and is ignored by relu/tanh. At the relu kink the
// derivative is 0 (subgradient choice; the leaky/elu variants use alpha there).
double activate(ActivationKind kind, double z, double alpha);
double activate_derivative(ActivationKind kind, double z, double alpha);

struct Layer {
    std::vector<std::vector<double>> weights; // [out][in], row-major
    std::vector<double> biases;               // [out]

    std::size_t out_dim() const { return biases.size(); }
    std::size_t in_dim() const { return weights.empty() ? 0 : weights[0].size(); }
};

// Input scaling metadata as carried by the text network format: per-input
// min/max plus means/ranges (one extra entry each for the output). Parsed and
// stored verbatim; only applied when a caller explicitly asks for it.
struct Normalization {
    std::vector<double> input_min;
    std::vector<double> input_max;
    std::vector<double> mean;  // input_dim + 1 entries
    std::vector<double> range; // input_dim + 1 entries
};

// All intermediate states of one forward pass: states[0] is the raw input,
// states[i] for 0 < i < layer_count() are post-activation hidden vectors,
// states[layer_count()] is the affine-only output.
struct BehaviorTrace {
    std::vector<std::vector<double>> states;
};

class Network {
public:
    Network(std::vector<Layer> layers, ActivationKind activation, double activation_alpha = 0.5);

    std::size_t input_dim() const { return layers_.front().in_dim(); }
    std::size_t output_dim() const { return layers_.back().out_dim(); }
    std::size_t layer_count() const { return layers_.size(); } // affine transforms
    std::size_t state_count() const { return layers_.size() + 1; }
    std::size_t parameter_count() const;

    const std::vector<Layer>& layers() const { return layers_; }
    const Layer& layer(std::size_t i) const { return layers_.at(i); }
    Layer& mutable_layer(std::size_t i) { return layers_.at(i); }

    ActivationKind activation() const { return activation_; }
    double activation_alpha() const { return activation_alpha_; }

    std::optional<Normalization> normalization;

    std::vector<double> forward(std::span<const double> x) const;
    BehaviorTrace trace(std::span<const double> x) const;

    // Resumes the forward pass from a known intermediate: `state` must be the
    // value of trace state `state_index`. Lets callers that only perturb the
    // tail of the network skip recomputing the unchanged prefix.
    std::vector<double> forward_from(std::size_t state_index, std::span<const double> state) const;

    // Maps a raw input through the stored normalization (x - mean) / range.
    // Throws InvalidArgument when no normalization metadata is present.
    std::vector<double> normalize_input(std::span<const double> x) const;

    // Re-checks dimension chain consistency and weight finiteness, throwing
    // ShapeError / DivergenceError. Used after in-place weight edits.
    void validate() const;

private:
    std::vector<Layer> layers_;
    ActivationKind activation_;
    double activation_alpha_;
};

enum class LossNorm { L1, L2 };

LossNorm loss_norm_from_string(std::string_view name);

struct TrainingPair {
    std::vector<double> input;
    std::vector<double> target;
};

// Gradient of a batch loss with respect to every weight and bias; the layers
// mirror the network's shapes exactly.
struct ParamGradient {
    std::vector<Layer> layers;
};

ParamGradient zero_gradient(const Network& net);

// Batch-summed distance loss: sum over pairs of ||N(x) - target|| in the
// given norm (not squared).
double loss_value(const Network& net, std::span<const TrainingPair> batch, LossNorm norm);

// Adds `weight` times the gradient of loss_value(net, batch, norm) into
// `into`. The l2 distance uses subgradient 0 when the residual is exactly
// zero; same convention for l1 at zero components.
void accumulate_gradient(const Network& net, std::span<const TrainingPair> batch,
                         LossNorm norm, double weight, ParamGradient& into);

ParamGradient gradient(const Network& net, std::span<const TrainingPair> batch, LossNorm norm);

// In-place parameter update: net += step * grad.
void apply_gradient(Network& net, const ParamGradient& grad, double step);

} // namespace netrepair

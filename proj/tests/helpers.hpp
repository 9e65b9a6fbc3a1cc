#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>
#include <vector>

#include "netrepair/localizer.hpp"
#include "netrepair/network.hpp"
#include "netrepair/properties.hpp"
#include "netrepair/rng.hpp"

namespace testutil {

using namespace netrepair;

// Single affine layer acting as the identity on n inputs.
inline Network identity_net(std::size_t n) {
    Layer l;
    l.weights.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) l.weights[i][i] = 1.0;
    l.biases.assign(n, 0.0);
    return Network({l}, ActivationKind::ReLU);
}

// One-dimensional affine net y = a x + b.
inline Network linear_net(double a, double b) {
    Layer l;
    l.weights = {{a}};
    l.biases = {b};
    return Network({l}, ActivationKind::ReLU);
}

inline Network random_net(const std::vector<std::size_t>& dims, ActivationKind act, double alpha,
                          std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.weights.assign(dims[i + 1], std::vector<double>(dims[i], 0.0));
        l.biases.assign(dims[i + 1], 0.0);
        for (auto& row : l.weights)
            for (double& w : row) w = rng.gaussian() * scale;
        for (double& b : l.biases) b = rng.gaussian() * scale;
        layers.push_back(std::move(l));
    }
    return Network(std::move(layers), act, alpha);
}

inline std::vector<std::vector<double>> random_points(std::size_t count, std::size_t dim,
                                                      std::uint64_t seed, double lo = -2.0,
                                                      double hi = 2.0) {
    Rng rng(seed);
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
    for (auto& p : pts)
        for (double& v : p) v = rng.uniform(lo, hi);
    return pts;
}

inline LinearAtom atom(std::vector<double> coeffs, double rhs, bool strict = false) {
    LinearAtom a;
    a.coeffs = std::move(coeffs);
    a.rhs = rhs;
    a.strict = strict;
    return a;
}

inline OutputCondition single_atom_post(std::vector<double> coeffs, double rhs,
                                        bool strict = false) {
    OutputCondition post;
    post.clauses = {{atom(std::move(coeffs), rhs, strict)}};
    return post;
}

inline InputDomain box(std::vector<std::pair<double, double>> bounds) {
    InputDomain d;
    d.bounds = std::move(bounds);
    return d;
}

// Naive pairwise responsibility: for every trace state past the input, the
// elementwise |gap| summed over every (negative, positive) pair. Triple loop
// on purpose; the library version must match it.
inline ResponsibilityMatrix brute_responsibility(const Network& net,
                                                 const std::vector<std::vector<double>>& positives,
                                                 const std::vector<std::vector<double>>& negatives) {
    ResponsibilityMatrix m;
    m.rows.resize(net.layer_count());
    for (std::size_t t = 0; t < net.layer_count(); ++t)
        m.rows[t].assign(net.layer(t).out_dim(), 0.0);
    std::vector<BehaviorTrace> pos, neg;
    pos.reserve(positives.size());
    neg.reserve(negatives.size());
    for (const auto& x : positives) pos.push_back(net.trace(x));
    for (const auto& x : negatives) neg.push_back(net.trace(x));
    for (const auto& tn : neg)
        for (const auto& tp : pos)
            for (std::size_t t = 1; t < tn.states.size(); ++t)
                for (std::size_t j = 0; j < tn.states[t].size(); ++j)
                    m.rows[t - 1][j] += std::abs(tn.states[t][j] - tp.states[t][j]);
    return m;
}

// Central finite differences of the batch loss over every parameter.
inline ParamGradient fd_gradient(Network net, const std::vector<TrainingPair>& batch,
                                 LossNorm norm, double h) {
    ParamGradient g = zero_gradient(net);
    auto probe = [&](double& slot) {
        double orig = slot;
        slot = orig + h;
        double up = loss_value(net, batch, norm);
        slot = orig - h;
        double down = loss_value(net, batch, norm);
        slot = orig;
        return (up - down) / (2.0 * h);
    };
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        Layer& layer = net.mutable_layer(l);
        for (std::size_t i = 0; i < layer.weights.size(); ++i)
            for (std::size_t j = 0; j < layer.weights[i].size(); ++j)
                g.layers[l].weights[i][j] = probe(layer.weights[i][j]);
        for (std::size_t i = 0; i < layer.biases.size(); ++i)
            g.layers[l].biases[i] = probe(layer.biases[i]);
    }
    return g;
}

// |a - b| <= tol * max(1, |a|, |b|) across every parameter slot.
inline double gradient_gap(const ParamGradient& a, const ParamGradient& b) {
    double worst = 0.0;
    auto consider = [&](double x, double y) {
        double scale = std::max({1.0, std::abs(x), std::abs(y)});
        worst = std::max(worst, std::abs(x - y) / scale);
    };
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        for (std::size_t i = 0; i < a.layers[l].weights.size(); ++i)
            for (std::size_t j = 0; j < a.layers[l].weights[i].size(); ++j)
                consider(a.layers[l].weights[i][j], b.layers[l].weights[i][j]);
        for (std::size_t i = 0; i < a.layers[l].biases.size(); ++i)
            consider(a.layers[l].biases[i], b.layers[l].biases[i]);
    }
    return worst;
}

inline bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof(double)) == 0; }

inline bool nets_bit_identical(const Network& a, const Network& b) {
    if (a.layer_count() != b.layer_count()) return false;
    for (std::size_t l = 0; l < a.layer_count(); ++l) {
        const Layer& la = a.layer(l);
        const Layer& lb = b.layer(l);
        if (la.weights.size() != lb.weights.size() || la.biases.size() != lb.biases.size())
            return false;
        for (std::size_t i = 0; i < la.weights.size(); ++i) {
            if (la.weights[i].size() != lb.weights[i].size()) return false;
            for (std::size_t j = 0; j < la.weights[i].size(); ++j)
                if (!same_bits(la.weights[i][j], lb.weights[i][j])) return false;
            if (!same_bits(la.biases[i], lb.biases[i])) return false;
        }
    }
    return true;
}

// Neuron rows (incoming weights or bias) that differ at the bit level
// between two same-shaped networks, as 1-based (layer, neuron) pairs.
inline std::vector<NeuronIndex> changed_neurons(const Network& a, const Network& b) {
    std::vector<NeuronIndex> out;
    for (std::size_t l = 0; l < a.layer_count(); ++l) {
        const Layer& la = a.layer(l);
        const Layer& lb = b.layer(l);
        for (std::size_t i = 0; i < la.weights.size(); ++i) {
            bool differs = !same_bits(la.biases[i], lb.biases[i]);
            for (std::size_t j = 0; !differs && j < la.weights[i].size(); ++j)
                differs = !same_bits(la.weights[i][j], lb.weights[i][j]);
            if (differs) out.push_back({l + 1, i});
        }
    }
    return out;
}

} // namespace testutil

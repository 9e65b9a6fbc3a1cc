#include "netrepair/network.hpp"

#include <cmath>

namespace netrepair {

ActivationKind activation_from_string(std::string_view name) {
    if (name == "relu") return ActivationKind::ReLU;
    if (name == "tanh") return ActivationKind::Tanh;
    if (name == "leaky_relu") return ActivationKind::LeakyReLU;
    if (name == "elu") return ActivationKind::ELU;
    throw InvalidArgument("unknown activation '" + std::string(name) +
                          "' (expected relu, tanh, leaky_relu or elu)");
}

std::string_view to_string(ActivationKind kind) {
    switch (kind) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::LeakyReLU: return "leaky_relu";
    case ActivationKind::ELU: return "elu";
    }
    return "relu";
}

double activate(ActivationKind kind, double z, double alpha) {
    switch (kind) {
    case ActivationKind::ReLU: return z > 0.0 ? z : 0.0;
    case ActivationKind::Tanh: return std::tanh(z);
    case ActivationKind::LeakyReLU: return z > 0.0 ? z : alpha * z;
    case ActivationKind::ELU: return z > 0.0 ? z : alpha * (std::exp(z) - 1.0);
    }
    return z;
}

double activate_derivative(ActivationKind kind, double z, double alpha) {
    switch (kind) {
    case ActivationKind::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Tanh: {
        double t = std::tanh(z);
        return 1.0 - t * t;
    }
    case ActivationKind::LeakyReLU: return z > 0.0 ? 1.0 : alpha;
    case ActivationKind::ELU: return z > 0.0 ? 1.0 : alpha * std::exp(z);
    }
    return 1.0;
}

Network::Network(std::vector<Layer> layers, ActivationKind activation, double activation_alpha)
    : layers_(std::move(layers)), activation_(activation), activation_alpha_(activation_alpha) {
    if (layers_.empty()) throw ShapeError("network needs at least one layer");
    validate();
}

void Network::validate() const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& l = layers_[i];
        if (l.weights.size() != l.biases.size())
            throw ShapeError("layer " + std::to_string(i) + ": weight rows != bias count");
        if (l.weights.empty())
            throw ShapeError("layer " + std::to_string(i) + " has no neurons");
        std::size_t in = l.weights[0].size();
        if (in == 0)
            throw ShapeError("layer " + std::to_string(i) + " has zero input width");
        for (const auto& row : l.weights) {
            if (row.size() != in)
                throw ShapeError("layer " + std::to_string(i) + ": ragged weight rows");
            for (double w : row)
                if (!std::isfinite(w))
                    throw DivergenceError("non-finite weight in layer " + std::to_string(i));
        }
        for (double b : l.biases)
            if (!std::isfinite(b))
                throw DivergenceError("non-finite bias in layer " + std::to_string(i));
        if (i + 1 < layers_.size() && layers_[i + 1].in_dim() != l.out_dim())
            throw ShapeError("layer " + std::to_string(i + 1) + " expects input width " +
                             std::to_string(layers_[i + 1].in_dim()) + " but layer " +
                             std::to_string(i) + " outputs " + std::to_string(l.out_dim()));
    }
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers_)
        n += l.out_dim() * l.in_dim() + l.out_dim();
    return n;
}

namespace {

// z = W s + b
std::vector<double> affine(const Layer& l, std::span<const double> s) {
    std::vector<double> z(l.out_dim());
    for (std::size_t o = 0; o < l.out_dim(); ++o) {
        double acc = l.biases[o];
        const auto& row = l.weights[o];
        for (std::size_t j = 0; j < row.size(); ++j)
            acc += row[j] * s[j];
        z[o] = acc;
    }
    return z;
}

} // namespace

std::vector<double> Network::forward(std::span<const double> x) const {
    return forward_from(0, x);
}

std::vector<double> Network::forward_from(std::size_t state_index, std::span<const double> state) const {
    if (state_index > layers_.size())
        throw InvalidArgument("forward_from: state index " + std::to_string(state_index) +
                              " out of range");
    std::size_t expected = state_index == 0 ? input_dim() : layers_[state_index - 1].out_dim();
    if (state.size() != expected)
        throw ShapeError("forward_from: state has width " + std::to_string(state.size()) +
                         ", expected " + std::to_string(expected));
    std::vector<double> s(state.begin(), state.end());
    for (std::size_t t = state_index; t < layers_.size(); ++t) {
        std::vector<double> z = affine(layers_[t], s);
        if (t + 1 < layers_.size())
            for (double& v : z) v = activate(activation_, v, activation_alpha_);
        s = std::move(z);
    }
    return s;
}

BehaviorTrace Network::trace(std::span<const double> x) const {
    if (x.size() != input_dim())
        throw ShapeError("trace: input has width " + std::to_string(x.size()) +
                         ", expected " + std::to_string(input_dim()));
    BehaviorTrace tr;
    tr.states.reserve(state_count());
    tr.states.emplace_back(x.begin(), x.end());
    for (std::size_t t = 0; t < layers_.size(); ++t) {
        std::vector<double> z = affine(layers_[t], tr.states.back());
        if (t + 1 < layers_.size())
            for (double& v : z) v = activate(activation_, v, activation_alpha_);
        tr.states.push_back(std::move(z));
    }
    return tr;
}

std::vector<double> Network::normalize_input(std::span<const double> x) const {
    if (!normalization)
        throw InvalidArgument("network carries no normalization metadata");
    const Normalization& nm = *normalization;
    if (x.size() != input_dim())
        throw ShapeError("normalize_input: wrong input width");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = x[i];
        if (i < nm.input_min.size() && v < nm.input_min[i]) v = nm.input_min[i];
        if (i < nm.input_max.size() && v > nm.input_max[i]) v = nm.input_max[i];
        double mean = i < nm.mean.size() ? nm.mean[i] : 0.0;
        double range = i < nm.range.size() ? nm.range[i] : 1.0;
        out[i] = range != 0.0 ? (v - mean) / range : v - mean;
    }
    return out;
}

LossNorm loss_norm_from_string(std::string_view name) {
    if (name == "l1") return LossNorm::L1;
    if (name == "l2") return LossNorm::L2;
    throw InvalidArgument("unknown norm '" + std::string(name) + "' (expected l1 or l2)");
}

ParamGradient zero_gradient(const Network& net) {
    ParamGradient g;
    g.layers.reserve(net.layer_count());
    for (const Layer& l : net.layers()) {
        Layer zl;
        zl.weights.assign(l.out_dim(), std::vector<double>(l.in_dim(), 0.0));
        zl.biases.assign(l.out_dim(), 0.0);
        g.layers.push_back(std::move(zl));
    }
    return g;
}

double loss_value(const Network& net, std::span<const TrainingPair> batch, LossNorm norm) {
    double total = 0.0;
    for (const TrainingPair& p : batch) {
        std::vector<double> y = net.forward(p.input);
        if (y.size() != p.target.size())
            throw ShapeError("loss: target width mismatch");
        double acc = 0.0;
        if (norm == LossNorm::L2) {
            for (std::size_t i = 0; i < y.size(); ++i) {
                double r = y[i] - p.target[i];
                acc += r * r;
            }
            acc = std::sqrt(acc);
        } else {
            for (std::size_t i = 0; i < y.size(); ++i)
                acc += std::abs(y[i] - p.target[i]);
        }
        total += acc;
    }
    return total;
}

void accumulate_gradient(const Network& net, std::span<const TrainingPair> batch,
                         LossNorm norm, double weight, ParamGradient& into) {
    if (weight == 0.0) return;
    if (into.layers.size() != net.layer_count())
        throw ShapeError("gradient accumulator has wrong layer count");

    const auto& layers = net.layers();
    const std::size_t T = layers.size();

    for (const TrainingPair& p : batch) {
        if (p.input.size() != net.input_dim())
            throw ShapeError("gradient: input width mismatch");
        if (p.target.size() != net.output_dim())
            throw ShapeError("gradient: target width mismatch");

        // Forward, keeping pre-activations z[t] and post-activation states s[t].
        std::vector<std::vector<double>> s(T + 1); // s[0] = input, s[T] = output
        std::vector<std::vector<double>> z(T);
        s[0].assign(p.input.begin(), p.input.end());
        for (std::size_t t = 0; t < T; ++t) {
            z[t] = affine(layers[t], s[t]);
            if (t + 1 < T) {
                s[t + 1].resize(z[t].size());
                for (std::size_t i = 0; i < z[t].size(); ++i)
                    s[t + 1][i] = activate(net.activation(), z[t][i], net.activation_alpha());
            } else {
                s[t + 1] = z[t];
            }
        }

        // d = dL/dy for this pair's distance term.
        std::vector<double> d(net.output_dim());
        if (norm == LossNorm::L2) {
            double nrm = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                double r = s[T][i] - p.target[i];
                nrm += r * r;
            }
            nrm = std::sqrt(nrm);
            for (std::size_t i = 0; i < d.size(); ++i)
                d[i] = nrm > 0.0 ? (s[T][i] - p.target[i]) / nrm : 0.0;
        } else {
            for (std::size_t i = 0; i < d.size(); ++i) {
                double r = s[T][i] - p.target[i];
                d[i] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
            }
        }

        // Backward through the affine chain.
        for (std::size_t ti = T; ti-- > 0;) {
            const Layer& l = layers[ti];
            Layer& gl = into.layers[ti];
            for (std::size_t o = 0; o < l.out_dim(); ++o) {
                double dv = weight * d[o];
                gl.biases[o] += dv;
                auto& grow = gl.weights[o];
                const auto& sv = s[ti];
                for (std::size_t j = 0; j < grow.size(); ++j)
                    grow[j] += dv * sv[j];
            }
            if (ti == 0) break;
            std::vector<double> prev(l.in_dim(), 0.0);
            for (std::size_t o = 0; o < l.out_dim(); ++o) {
                const auto& row = l.weights[o];
                double dv = d[o];
                for (std::size_t j = 0; j < row.size(); ++j)
                    prev[j] += row[j] * dv;
            }
            for (std::size_t j = 0; j < prev.size(); ++j)
                prev[j] *= activate_derivative(net.activation(), z[ti - 1][j], net.activation_alpha());
            d = std::move(prev);
        }
    }
}

ParamGradient gradient(const Network& net, std::span<const TrainingPair> batch, LossNorm norm) {
    ParamGradient g = zero_gradient(net);
    accumulate_gradient(net, batch, norm, 1.0, g);
    return g;
}

void apply_gradient(Network& net, const ParamGradient& grad, double step) {
    if (grad.layers.size() != net.layer_count())
        throw ShapeError("apply_gradient: layer count mismatch");
    for (std::size_t t = 0; t < grad.layers.size(); ++t) {
        Layer& l = net.mutable_layer(t);
        const Layer& g = grad.layers[t];
        if (g.out_dim() != l.out_dim() || g.in_dim() != l.in_dim())
            throw ShapeError("apply_gradient: layer " + std::to_string(t) + " shape mismatch");
        for (std::size_t o = 0; o < l.out_dim(); ++o) {
            for (std::size_t j = 0; j < l.in_dim(); ++j)
                l.weights[o][j] += step * g.weights[o][j];
            l.biases[o] += step * g.biases[o];
        }
    }
}

} // namespace netrepair

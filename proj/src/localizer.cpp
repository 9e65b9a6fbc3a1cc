#include "netrepair/localizer.hpp"

#include <algorithm>
#include <fstream>

#include "netrepair/numio.hpp"
#include "netrepair/parallel.hpp"

namespace netrepair {

void ResponsibilityMatrix::add(const ResponsibilityMatrix& other) {
    if (rows.empty()) {
        rows = other.rows;
        return;
    }
    if (rows.size() != other.rows.size())
        throw ShapeError("responsibility matrices have different layer counts");
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != other.rows[t].size())
            throw ShapeError("responsibility matrices disagree at layer " + std::to_string(t + 1));
        for (std::size_t j = 0; j < rows[t].size(); ++j)
            rows[t][j] += other.rows[t][j];
    }
}

namespace {

constexpr std::size_t kForwardChunk = 256;

void check_samples(const Network& net, std::span<const std::vector<double>> positives,
                   std::span<const std::vector<double>> negatives) {
    if (positives.empty() || negatives.empty())
        throw InvalidArgument("responsibility needs nonempty positive and negative sets");
    for (const auto& x : positives)
        if (x.size() != net.input_dim()) throw ShapeError("positive sample width mismatch");
    for (const auto& x : negatives)
        if (x.size() != net.input_dim()) throw ShapeError("negative sample width mismatch");
}

// Advances a batch of states through one transform (post-activation except
// at the output layer), parallel over sample chunks.
void advance_layer(const Network& net, std::size_t t,
                   std::vector<std::vector<double>>& states) {
    const Layer& l = net.layer(t);
    const bool is_output = t + 1 == net.layer_count();
    parallel_chunks(states.size(), kForwardChunk,
                    [&](std::size_t, std::size_t b, std::size_t e) {
                        for (std::size_t i = b; i < e; ++i) {
                            std::vector<double> z(l.out_dim());
                            for (std::size_t o = 0; o < l.out_dim(); ++o) {
                                double acc = l.biases[o];
                                const auto& row = l.weights[o];
                                for (std::size_t j = 0; j < row.size(); ++j)
                                    acc += row[j] * states[i][j];
                                z[o] = is_output
                                           ? acc
                                           : activate(net.activation(), acc, net.activation_alpha());
                            }
                            states[i] = std::move(z);
                        }
                    });
}

// sum_{a in neg} sum_{b in pos} |a - b| for one neuron, via sorted positives
// and prefix sums: O((P+N) log P) instead of the quadratic pairwise loop.
double pairwise_abs_sum(std::vector<double>& pos_sorted, std::span<const double> neg) {
    std::sort(pos_sorted.begin(), pos_sorted.end());
    std::vector<double> prefix(pos_sorted.size() + 1, 0.0);
    for (std::size_t i = 0; i < pos_sorted.size(); ++i)
        prefix[i + 1] = prefix[i] + pos_sorted[i];
    const double total = prefix.back();
    double acc = 0.0;
    for (double a : neg) {
        auto it = std::upper_bound(pos_sorted.begin(), pos_sorted.end(), a);
        std::size_t le = static_cast<std::size_t>(it - pos_sorted.begin());
        double below = a * static_cast<double>(le) - prefix[le];
        double above = (total - prefix[le]) - a * static_cast<double>(pos_sorted.size() - le);
        acc += below + above;
    }
    return acc;
}

} // namespace

ResponsibilityMatrix responsibility_exact(const Network& net,
                                          std::span<const std::vector<double>> positives,
                                          std::span<const std::vector<double>> negatives) {
    check_samples(net, positives, negatives);
    ResponsibilityMatrix matrix;
    matrix.rows.resize(net.layer_count());

    std::vector<std::vector<double>> pos_states(positives.begin(), positives.end());
    std::vector<std::vector<double>> neg_states(negatives.begin(), negatives.end());

    for (std::size_t t = 0; t < net.layer_count(); ++t) {
        advance_layer(net, t, pos_states);
        advance_layer(net, t, neg_states);
        const std::size_t width = net.layer(t).out_dim();
        matrix.rows[t].assign(width, 0.0);
        // Each neuron is independent; one chunk per neuron keeps the
        // per-neuron summation order fixed regardless of thread count.
        parallel_chunks(width, 1, [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t j = b; j < e; ++j) {
                std::vector<double> pos_col(pos_states.size());
                for (std::size_t i = 0; i < pos_states.size(); ++i)
                    pos_col[i] = pos_states[i][j];
                std::vector<double> neg_col(neg_states.size());
                for (std::size_t i = 0; i < neg_states.size(); ++i)
                    neg_col[i] = neg_states[i][j];
                matrix.rows[t][j] = pairwise_abs_sum(pos_col, neg_col);
            }
        });
    }
    return matrix;
}

ResponsibilityMatrix responsibility_fast(const Network& net,
                                         std::span<const std::vector<double>> positives,
                                         std::span<const std::vector<double>> negatives,
                                         FastNormalization norm) {
    check_samples(net, positives, negatives);
    ResponsibilityMatrix matrix;
    matrix.rows.resize(net.layer_count());

    std::vector<std::vector<double>> pos_states(positives.begin(), positives.end());
    std::vector<std::vector<double>> neg_states(negatives.begin(), negatives.end());

    for (std::size_t t = 0; t < net.layer_count(); ++t) {
        advance_layer(net, t, pos_states);
        advance_layer(net, t, neg_states);
        const std::size_t width = net.layer(t).out_dim();
        std::vector<double> pos_sum(width, 0.0), neg_sum(width, 0.0);
        for (const auto& s : pos_states)
            for (std::size_t j = 0; j < width; ++j) pos_sum[j] += s[j];
        for (const auto& s : neg_states)
            for (std::size_t j = 0; j < width; ++j) neg_sum[j] += s[j];
        matrix.rows[t].assign(width, 0.0);
        const double np = static_cast<double>(pos_states.size());
        const double nn = static_cast<double>(neg_states.size());
        for (std::size_t j = 0; j < width; ++j) {
            matrix.rows[t][j] = norm == FastNormalization::MeanDifference
                                    ? std::abs(neg_sum[j] / nn - pos_sum[j] / np)
                                    : std::abs(neg_sum[j] - pos_sum[j]);
        }
    }
    return matrix;
}

TopSelection select_top(const ResponsibilityMatrix& matrix, std::size_t r,
                        std::optional<std::size_t> layer_filter) {
    if (r < 1) throw InvalidArgument("select_top needs r >= 1");
    if (layer_filter && (*layer_filter < 1 || *layer_filter > matrix.rows.size()))
        throw InvalidArgument("layer filter " + std::to_string(*layer_filter) +
                              " outside [1," + std::to_string(matrix.rows.size()) + "]");

    struct Entry {
        double score;
        std::size_t layer, neuron;
    };
    std::vector<Entry> entries;
    for (std::size_t t = 0; t < matrix.rows.size(); ++t) {
        std::size_t layer = t + 1;
        if (layer_filter && layer != *layer_filter) continue;
        for (std::size_t j = 0; j < matrix.rows[t].size(); ++j)
            entries.push_back({matrix.rows[t][j], layer, j});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.layer != b.layer) return a.layer < b.layer;
        return a.neuron < b.neuron;
    });

    TopSelection sel;
    sel.truncated = r > entries.size();
    std::size_t take = sel.truncated ? entries.size() : r;
    sel.neurons.reserve(take);
    sel.scores.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        sel.neurons.push_back({entries[i].layer, entries[i].neuron});
        sel.scores.push_back(entries[i].score);
    }
    return sel;
}

void save_responsibility_csv(const ResponsibilityMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write responsibility CSV '" + path + "'");
    out << "layer,neuron,score\n";
    for (std::size_t t = 0; t < matrix.rows.size(); ++t)
        for (std::size_t j = 0; j < matrix.rows[t].size(); ++j)
            out << (t + 1) << ',' << j << ',' << format_double(matrix.rows[t][j]) << '\n';
}

} // namespace netrepair

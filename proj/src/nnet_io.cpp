#include "netrepair/nnet_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "netrepair/numio.hpp"

namespace netrepair {

namespace {

struct TokenStream {
    std::vector<std::string> tokens;
    std::size_t pos = 0;

    std::string_view next(const char* what) {
        if (pos >= tokens.size())
            throw ParseError(std::string("network file truncated while reading ") + what);
        return tokens[pos++];
    }

    double next_double(const char* what) { return parse_double(next(what), what); }
    long next_long(const char* what) { return parse_long(next(what), what); }
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Network parse_nnet(std::istream& in) {
    TokenStream ts;
    ActivationKind act = ActivationKind::ReLU;
    double act_alpha = 0.5;

    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.rfind("//", 0) == 0) {
            // Comment; may carry the activation marker.
            std::string body = trim(t.substr(2));
            const std::string marker = "netrepair-activation:";
            if (body.rfind(marker, 0) == 0) {
                std::istringstream ms(body.substr(marker.size()));
                std::string kind;
                if (ms >> kind) act = activation_from_string(kind);
                double a;
                if (ms >> a) act_alpha = a;
            }
            continue;
        }
        std::size_t start = 0;
        while (start <= t.size()) {
            std::size_t comma = t.find(',', start);
            std::string tok = comma == std::string::npos ? t.substr(start)
                                                         : t.substr(start, comma - start);
            tok = trim(tok);
            if (!tok.empty()) ts.tokens.push_back(tok);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }

    long num_layers = ts.next_long("numLayers");
    long input_size = ts.next_long("inputSize");
    long output_size = ts.next_long("outputSize");
    long max_layer = ts.next_long("maxLayerSize");
    if (num_layers < 1 || input_size < 1 || output_size < 1)
        throw ParseError("network header declares non-positive dimensions");

    std::vector<long> sizes(static_cast<std::size_t>(num_layers) + 1);
    for (auto& s : sizes) {
        s = ts.next_long("layer size");
        if (s < 1) throw ParseError("non-positive layer size");
    }
    if (sizes.front() != input_size)
        throw ParseError("first layer size disagrees with declared input size");
    if (sizes.back() != output_size)
        throw ParseError("last layer size disagrees with declared output size");
    long widest = 0;
    for (long s : sizes) widest = s > widest ? s : widest;
    if (widest != max_layer)
        throw ParseError("declared maxLayerSize " + std::to_string(max_layer) +
                         " disagrees with layer sizes (max " + std::to_string(widest) + ")");

    ts.next_long("format flag"); // legacy, ignored

    Normalization nm;
    nm.input_min.resize(static_cast<std::size_t>(input_size));
    nm.input_max.resize(static_cast<std::size_t>(input_size));
    nm.mean.resize(static_cast<std::size_t>(input_size) + 1);
    nm.range.resize(static_cast<std::size_t>(input_size) + 1);
    for (auto& v : nm.input_min) v = ts.next_double("input minimum");
    for (auto& v : nm.input_max) v = ts.next_double("input maximum");
    for (auto& v : nm.mean) v = ts.next_double("normalization mean");
    for (auto& v : nm.range) v = ts.next_double("normalization range");

    std::vector<Layer> layers(static_cast<std::size_t>(num_layers));
    for (std::size_t t = 0; t < layers.size(); ++t) {
        std::size_t in_d = static_cast<std::size_t>(sizes[t]);
        std::size_t out_d = static_cast<std::size_t>(sizes[t + 1]);
        Layer& l = layers[t];
        l.weights.assign(out_d, std::vector<double>(in_d));
        l.biases.assign(out_d, 0.0);
        for (std::size_t o = 0; o < out_d; ++o)
            for (std::size_t j = 0; j < in_d; ++j)
                l.weights[o][j] = ts.next_double("weight");
        for (std::size_t o = 0; o < out_d; ++o)
            l.biases[o] = ts.next_double("bias");
    }
    if (ts.pos != ts.tokens.size())
        throw ParseError("trailing data after last bias (" +
                         std::to_string(ts.tokens.size() - ts.pos) + " extra values)");

    Network net(std::move(layers), act, act_alpha);
    net.normalization = std::move(nm);
    return net;
}

Network load_nnet(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file '" + path + "'");
    try {
        return parse_nnet(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void serialize_nnet(const Network& net, std::ostream& out) {
    out << "// netrepair network export\n";
    if (net.activation() != ActivationKind::ReLU)
        out << "// netrepair-activation: " << to_string(net.activation()) << ' '
            << format_double(net.activation_alpha()) << '\n';

    std::size_t widest = net.input_dim();
    for (const Layer& l : net.layers())
        if (l.out_dim() > widest) widest = l.out_dim();

    out << net.layer_count() << ',' << net.input_dim() << ',' << net.output_dim() << ','
        << widest << ",\n";
    out << net.input_dim() << ',';
    for (const Layer& l : net.layers()) out << l.out_dim() << ',';
    out << '\n';
    out << "0,\n";

    Normalization nm;
    if (net.normalization) {
        nm = *net.normalization;
    } else {
        // No metadata: emit an identity normalization with open bounds.
        nm.input_min.assign(net.input_dim(), -1e30);
        nm.input_max.assign(net.input_dim(), 1e30);
        nm.mean.assign(net.input_dim() + 1, 0.0);
        nm.range.assign(net.input_dim() + 1, 1.0);
    }
    auto write_row = [&out](const std::vector<double>& row) {
        for (double v : row) out << format_double(v) << ',';
        out << '\n';
    };
    write_row(nm.input_min);
    write_row(nm.input_max);
    write_row(nm.mean);
    write_row(nm.range);

    for (const Layer& l : net.layers()) {
        for (const auto& row : l.weights) write_row(row);
        for (double b : l.biases) out << format_double(b) << ",\n";
    }
}

void save_nnet(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write network file '" + path + "'");
    serialize_nnet(net, out);
}

} // namespace netrepair

#include "netrepair/synthetic.hpp"

#include <cmath>

#include "netrepair/rng.hpp"
#include "netrepair/sampler.hpp"

namespace netrepair {

namespace {

// Geometry constants of the construction. Piecewise-linear activations use
// ramp pairs of width kRampWidth; tanh uses single units with slope kGain.
constexpr double kRampWidth = 0.02;
constexpr double kGain = 400.0;              // first-layer slope
constexpr double kGain2 = 40.0;              // second-layer slope over the indicator sum
constexpr double kMargin = 0.03;             // bug region clearance from the box faces
constexpr std::size_t kMeasureSamples = 10000;

bool uses_ramp_pairs(ActivationKind kind) { return kind != ActivationKind::Tanh; }

struct Geometry {
    std::size_t m, h1, h2, n_out;
    std::vector<double> lo, hi; // bug region
};

void fill_haystack(Layer& layer, std::size_t first_unit, std::size_t first_input,
                   std::size_t n_inputs, Rng& rng) {
    for (std::size_t o = first_unit; o < layer.out_dim(); ++o) {
        for (std::size_t j = first_input; j < first_input + n_inputs && j < layer.in_dim(); ++j)
            layer.weights[o][j] = rng.uniform(-0.5, 0.5);
        layer.biases[o] = rng.uniform(-0.5, 0.5);
    }
}

// Two hidden layers realizing indicator(x in bug box) in [0,1], read out as
// y0 = 2 * indicator with y1 = 1, so the safe rule y0 <= y1 flips exactly
// inside the region.
//
// Piecewise-linear kinds: per dimension a rising ramp pair at the low face
// and a falling one at the high face; sigma(t) - sigma(t - h) climbs from
// alpha*h to h over t in [0,h], so (up - down) / ((1-alpha) h) is a clean
// 0/1 box indicator (exact for relu/leaky, exponentially small feet for
// elu). The second layer thresholds the sum of indicators at m - 1/2 with
// another ramp pair. Transitions are centered on the region faces, so the
// violating volume matches the box volume to first order.
Network build_pwl(const Geometry& g, ActivationKind kind, double alpha, Rng& rng) {
    const double h = kGain * kRampWidth;
    const double alpha_div = kind == ActivationKind::LeakyReLU ? alpha : 0.0;
    const double q1 = 1.0 / ((1.0 - alpha_div) * h);

    Layer l1;
    l1.weights.assign(g.h1, std::vector<double>(g.m, 0.0));
    l1.biases.assign(g.h1, 0.0);
    for (std::size_t i = 0; i < g.m; ++i) {
        const double a = g.lo[i] - kRampWidth / 2.0; // rising ramp start
        const double b = g.hi[i] - kRampWidth / 2.0; // falling ramp start
        const std::size_t u = 4 * i;
        l1.weights[u][i] = kGain;
        l1.biases[u] = -kGain * a;
        l1.weights[u + 1][i] = kGain;
        l1.biases[u + 1] = -kGain * a - h;
        l1.weights[u + 2][i] = kGain;
        l1.biases[u + 2] = -kGain * b;
        l1.weights[u + 3][i] = kGain;
        l1.biases[u + 3] = -kGain * b - h;
    }
    fill_haystack(l1, 4 * g.m, 0, g.m, rng);

    const double h2 = kGain2 * 0.5;
    const double q2 = 1.0 / ((1.0 - alpha_div) * h2);
    Layer l2;
    l2.weights.assign(g.h2, std::vector<double>(g.h1, 0.0));
    l2.biases.assign(g.h2, 0.0);
    const double wq = kGain2 * q1;
    for (std::size_t i = 0; i < g.m; ++i) {
        const std::size_t u = 4 * i;
        l2.weights[0][u] = wq;
        l2.weights[0][u + 1] = -wq;
        l2.weights[0][u + 2] = -wq;
        l2.weights[0][u + 3] = wq;
        l2.weights[1][u] = wq;
        l2.weights[1][u + 1] = -wq;
        l2.weights[1][u + 2] = -wq;
        l2.weights[1][u + 3] = wq;
    }
    const double threshold_bias = -kGain2 * (static_cast<double>(g.m) - 0.75);
    l2.biases[0] = threshold_bias;
    l2.biases[1] = threshold_bias - h2;
    // Haystack units read only haystack inputs so the circuit stays exact.
    fill_haystack(l2, 2, 4 * g.m, g.h1 - 4 * g.m, rng);

    Layer l3;
    l3.weights.assign(g.n_out, std::vector<double>(g.h2, 0.0));
    l3.biases.assign(g.n_out, 0.0);
    l3.weights[0][0] = 2.0 * q2;
    l3.weights[0][1] = -2.0 * q2;
    l3.biases[0] = -2.0 * q2 * alpha_div * h2;
    if (g.n_out > 1) l3.biases[1] = 1.0;

    return Network({std::move(l1), std::move(l2), std::move(l3)}, kind, alpha);
}

// Tanh variant: one saturating unit per face, indicator
// (tanh_low - tanh_high) / 2, thresholded by a second tanh at m - 1/2 and
// read out as y0 = v + 1 in {0, 2}.
Network build_tanh(const Geometry& g, double alpha, Rng& rng) {
    Layer l1;
    l1.weights.assign(g.h1, std::vector<double>(g.m, 0.0));
    l1.biases.assign(g.h1, 0.0);
    for (std::size_t i = 0; i < g.m; ++i) {
        l1.weights[2 * i][i] = kGain;
        l1.biases[2 * i] = -kGain * g.lo[i];
        l1.weights[2 * i + 1][i] = kGain;
        l1.biases[2 * i + 1] = -kGain * g.hi[i];
    }
    fill_haystack(l1, 2 * g.m, 0, g.m, rng);

    Layer l2;
    l2.weights.assign(g.h2, std::vector<double>(g.h1, 0.0));
    l2.biases.assign(g.h2, 0.0);
    for (std::size_t i = 0; i < g.m; ++i) {
        l2.weights[0][2 * i] = kGain2 / 2.0;
        l2.weights[0][2 * i + 1] = -kGain2 / 2.0;
    }
    l2.biases[0] = -kGain2 * (static_cast<double>(g.m) - 0.5);
    fill_haystack(l2, 1, 2 * g.m, g.h1 - 2 * g.m, rng);

    Layer l3;
    l3.weights.assign(g.n_out, std::vector<double>(g.h2, 0.0));
    l3.biases.assign(g.n_out, 0.0);
    l3.weights[0][0] = 1.0;
    l3.biases[0] = 1.0;
    if (g.n_out > 1) l3.biases[1] = 1.0;

    return Network({std::move(l1), std::move(l2), std::move(l3)}, ActivationKind::Tanh, alpha);
}

} // namespace

SyntheticFixture make_buggy(const PlantedBugSpec& spec) {
    if (spec.topology.size() != 4)
        throw InvalidArgument("planted-bug generator needs exactly two hidden layers "
                              "(topology {inputs, hidden1, hidden2, outputs})");
    Geometry g;
    g.m = spec.topology[0];
    g.h1 = spec.topology[1];
    g.h2 = spec.topology[2];
    g.n_out = spec.topology[3];
    if (g.m < 1 || g.n_out < 1) throw InvalidArgument("topology dimensions must be positive");

    const bool pwl = uses_ramp_pairs(spec.activation);
    const std::size_t need1 = (pwl ? 4 : 2) * g.m;
    const std::size_t need2 = pwl ? 2 : 1;
    if (g.h1 < need1)
        throw InvalidArgument("first hidden layer too narrow: need " + std::to_string(need1) +
                              " units for " + std::to_string(g.m) + " inputs");
    if (g.h2 < need2)
        throw InvalidArgument("second hidden layer too narrow: need " + std::to_string(need2) +
                              " units");
    if (!(spec.violation_rate > 0.0 && spec.violation_rate < 1.0))
        throw InvalidArgument("violation rate target must lie in (0,1)");

    Rng place_rng(derive_seed(spec.seed, "synth-place"));
    if (spec.bug_region) {
        if (spec.bug_region->dim() != g.m)
            throw InvalidArgument("bug region dimension does not match topology inputs");
        spec.bug_region->check_valid();
        g.lo.resize(g.m);
        g.hi.resize(g.m);
        for (std::size_t i = 0; i < g.m; ++i) {
            g.lo[i] = spec.bug_region->bounds[i].first;
            g.hi[i] = spec.bug_region->bounds[i].second;
            if (g.lo[i] < kMargin || g.hi[i] > 1.0 - kMargin)
                throw InvalidArgument("bug region must keep a margin of " +
                                      std::to_string(kMargin) + " inside the unit box");
        }
    } else {
        // Uniform per-dimension width hits the target volume; clamp so the
        // transition ramps still fit, and report whatever rate results.
        double width = std::pow(spec.violation_rate, 1.0 / static_cast<double>(g.m));
        if (width < 0.05) width = 0.05;
        if (width > 1.0 - 2.0 * kMargin) width = 1.0 - 2.0 * kMargin;
        g.lo.resize(g.m);
        g.hi.resize(g.m);
        for (std::size_t i = 0; i < g.m; ++i) {
            g.lo[i] = place_rng.uniform(kMargin, 1.0 - kMargin - width);
            g.hi[i] = g.lo[i] + width;
        }
    }

    Rng haystack_rng(derive_seed(spec.seed, "synth-haystack"));
    Network net = pwl ? build_pwl(g, spec.activation, spec.activation_alpha, haystack_rng)
                      : build_tanh(g, spec.activation_alpha, haystack_rng);

    // An explicit region fixes the rate through its volume; only the implicit
    // path treats violation_rate as the target.
    double target_rate = spec.violation_rate;
    if (spec.bug_region) {
        target_rate = 1.0;
        for (std::size_t i = 0; i < g.m; ++i) target_rate *= g.hi[i] - g.lo[i];
    }

    SyntheticFixture fx{std::move(net),
                        PropertySpec{},
                        InputDomain{},
                        target_rate,
                        0.0,
                        0.0,
                        false};
    fx.bug_region.bounds.reserve(g.m);
    for (std::size_t i = 0; i < g.m; ++i) fx.bug_region.bounds.emplace_back(g.lo[i], g.hi[i]);

    fx.property.id = std::string("planted-") + std::string(to_string(spec.activation)) + "-" +
                     std::to_string(g.m) + "d";
    fx.property.pre.bounds.assign(g.m, {0.0, 1.0});
    LinearAtom atom;
    if (g.n_out > 1) {
        atom.coeffs.assign(g.n_out, 0.0);
        atom.coeffs[0] = 1.0;
        atom.coeffs[1] = -1.0;
        atom.rhs = 0.0; // y0 <= y1
    } else {
        atom.coeffs.assign(1, 1.0);
        atom.rhs = 0.5; // y0 <= 1/2
    }
    fx.property.post.clauses.push_back({atom});

    // Monte Carlo measurement of the achieved rate and oracle agreement.
    auto points =
        sample_uniform(fx.property.pre, kMeasureSamples, derive_seed(spec.seed, "synth-measure"));
    std::size_t violating = 0, agree = 0;
    for (const auto& x : points) {
        bool net_violates = !satisfies(fx.property.post, fx.network.forward(x));
        bool in_region = fx.bug_region.contains(x);
        if (net_violates) ++violating;
        if (net_violates == in_region) ++agree;
    }
    fx.measured_rate = static_cast<double>(violating) / static_cast<double>(points.size());
    fx.oracle_agreement = static_cast<double>(agree) / static_cast<double>(points.size());
    fx.rate_within_tolerance =
        std::abs(fx.measured_rate - fx.target_rate) <= 0.1 * fx.target_rate;
    return fx;
}

} // namespace netrepair

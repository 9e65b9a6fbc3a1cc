#include "netrepair/sampler.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "netrepair/numio.hpp"
#include "netrepair/parallel.hpp"
#include "netrepair/rng.hpp"

namespace netrepair {

namespace {

constexpr std::size_t kForwardChunk = 256;

// Forward passes for a batch, parallel over fixed chunks, plus a satisfied
// flag per point. Output order matches input order so results stay
// deterministic at any thread count.
std::vector<char> evaluate_batch(const Network& net, const OutputCondition& post,
                                 const std::vector<std::vector<double>>& points,
                                 std::vector<std::vector<double>>& outputs) {
    outputs.assign(points.size(), {});
    std::vector<char> sat(points.size(), 0);
    parallel_chunks(points.size(), kForwardChunk,
                    [&](std::size_t, std::size_t b, std::size_t e) {
                        for (std::size_t i = b; i < e; ++i) {
                            outputs[i] = net.forward(points[i]);
                            sat[i] = satisfies(post, outputs[i]) ? 1 : 0;
                        }
                    });
    return sat;
}

void validate_schedule(std::span<const double> schedule) {
    if (schedule.empty())
        throw InvalidArgument("delta schedule must not be empty");
    if (schedule[0] != 0.0)
        throw InvalidArgument("delta schedule must start at 0");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] > schedule[i - 1]))
            throw InvalidArgument("delta schedule must be strictly increasing");
}

} // namespace

std::vector<std::vector<double>> sample_uniform(const InputDomain& d, std::size_t count,
                                                std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("sample count must be positive");
    d.check_valid();
    Rng rng(seed);
    std::vector<std::vector<double>> points(count);
    for (auto& p : points) {
        p.resize(d.dim());
        for (std::size_t i = 0; i < d.dim(); ++i)
            p[i] = rng.uniform(d.bounds[i].first, d.bounds[i].second);
    }
    return points;
}

std::vector<double> default_delta_schedule(const InputDomain& pre, std::size_t steps) {
    double d0 = 0.01 * pre.widest_edge();
    if (d0 <= 0.0) d0 = 0.01; // degenerate box: fall back to an absolute step
    std::vector<double> schedule{0.0};
    double d = d0;
    for (std::size_t i = 0; i < steps; ++i) {
        schedule.push_back(d);
        d *= 2.0;
    }
    return schedule;
}

LabeledSampleSet collect(const Network& net, const PropertySpec& spec, std::size_t n_total,
                         std::size_t min_positives, std::span<const double> delta_schedule,
                         std::uint64_t seed, const std::optional<InputDomain>& clamp) {
    if (n_total < 1) throw InvalidArgument("collect needs n_total >= 1");
    validate_schedule(delta_schedule);
    spec.pre.check_valid();

    LabeledSampleSet set;
    set.spec_id = spec.id;
    set.domain = spec.pre;
    set.delta_used = 0.0;

    // Base pass over the pre box itself.
    auto points = sample_uniform(spec.pre, n_total, derive_seed(seed, "collect-base"));
    std::vector<std::vector<double>> outputs;
    std::vector<char> sat = evaluate_batch(net, spec.post, points, outputs);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (sat[i]) {
            set.positives.push_back(std::move(points[i]));
            set.positive_outputs.push_back(std::move(outputs[i]));
        } else {
            set.negatives.push_back(std::move(points[i]));
            set.negative_outputs.push_back(std::move(outputs[i]));
        }
    }
    if (set.positives.size() >= min_positives) return set;

    // Not enough satisfied points in the box: widen the region for positives
    // only. Negatives keep witnessing the original pre-condition.
    for (std::size_t round = 1; round < delta_schedule.size(); ++round) {
        double delta = delta_schedule[round];
        InputDomain region = delta_neighbourhood(spec.pre, delta, clamp);
        set.domain = region;
        set.delta_used = delta;
        auto extra = sample_uniform(region, n_total,
                                    derive_seed(seed, "collect-delta-" + std::to_string(round)));
        std::vector<std::vector<double>> extra_out;
        std::vector<char> extra_sat = evaluate_batch(net, spec.post, extra, extra_out);
        for (std::size_t i = 0; i < extra.size(); ++i) {
            if (extra_sat[i]) {
                set.positives.push_back(std::move(extra[i]));
                set.positive_outputs.push_back(std::move(extra_out[i]));
            }
        }
        if (set.positives.size() >= min_positives) return set;
    }
    throw PositivesUnavailable(
        "spec '" + spec.id + "': found " + std::to_string(set.positives.size()) + " of " +
        std::to_string(min_positives) + " required positive samples even at delta " +
        format_double(set.delta_used));
}

LabeledSampleSet collect_targets(const Network& net, const PropertySpec& spec,
                                 std::size_t target_negatives, std::size_t target_positives,
                                 std::size_t min_positives,
                                 std::span<const double> delta_schedule, std::uint64_t seed,
                                 std::size_t max_batches,
                                 const std::optional<InputDomain>& clamp) {
    validate_schedule(delta_schedule);
    spec.pre.check_valid();

    LabeledSampleSet set;
    set.spec_id = spec.id;
    set.domain = spec.pre;
    set.delta_used = 0.0;

    std::size_t batch_size = target_negatives + target_positives;
    if (batch_size < 1024) batch_size = 1024;

    for (std::size_t batch = 0; batch < max_batches; ++batch) {
        bool need_neg = set.negatives.size() < target_negatives;
        bool need_pos = set.positives.size() < target_positives;
        if (!need_neg && !need_pos) break;
        auto points = sample_uniform(spec.pre, batch_size,
                                     derive_seed(seed, "targets-" + std::to_string(batch)));
        std::vector<std::vector<double>> outputs;
        std::vector<char> sat = evaluate_batch(net, spec.post, points, outputs);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (sat[i]) {
                if (set.positives.size() < target_positives) {
                    set.positives.push_back(std::move(points[i]));
                    set.positive_outputs.push_back(std::move(outputs[i]));
                }
            } else if (set.negatives.size() < target_negatives) {
                set.negatives.push_back(std::move(points[i]));
                set.negative_outputs.push_back(std::move(outputs[i]));
            }
        }
    }

    if (set.positives.size() < target_positives && set.positives.size() < min_positives) {
        // The box itself cannot supply them; relax for positives only.
        for (std::size_t round = 1; round < delta_schedule.size(); ++round) {
            double delta = delta_schedule[round];
            InputDomain region = delta_neighbourhood(spec.pre, delta, clamp);
            set.domain = region;
            set.delta_used = delta;
            auto extra = sample_uniform(region, batch_size,
                                        derive_seed(seed, "targets-delta-" + std::to_string(round)));
            std::vector<std::vector<double>> extra_out;
            std::vector<char> extra_sat = evaluate_batch(net, spec.post, extra, extra_out);
            for (std::size_t i = 0; i < extra.size(); ++i) {
                if (extra_sat[i] && set.positives.size() < target_positives) {
                    set.positives.push_back(std::move(extra[i]));
                    set.positive_outputs.push_back(std::move(extra_out[i]));
                }
            }
            if (set.positives.size() >= min_positives) break;
        }
    }

    if (set.positives.size() < min_positives)
        throw PositivesUnavailable(
            "spec '" + spec.id + "': found " + std::to_string(set.positives.size()) + " of " +
            std::to_string(min_positives) + " required positive samples even at delta " +
            format_double(set.delta_used));
    return set;
}

double satisfaction_probability(double q, double u, double v) {
    auto check = [](double x, const char* name) {
        if (!(x >= 0.0 && x <= 1.0))
            throw InvalidArgument(std::string(name) + " must lie in [0,1]");
    };
    check(q, "q");
    check(u, "u");
    check(v, "v");
    return q * (1.0 - v) + (1.0 - q) * u;
}

std::size_t required_sample_size(double epsilon, double confidence) {
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw InvalidArgument("confidence must lie in (0,1)");
    double n = std::log(2.0 / (1.0 - confidence)) / (2.0 * epsilon * epsilon);
    return static_cast<std::size_t>(std::ceil(n));
}

void save_samples_csv(const LabeledSampleSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write sample CSV '" + path + "'");
    std::size_t m = set.domain.dim();
    std::size_t n = set.positive_outputs.empty()
                        ? (set.negative_outputs.empty() ? 0 : set.negative_outputs[0].size())
                        : set.positive_outputs[0].size();
    out << "# spec_id: " << set.spec_id << '\n';
    out << "# dims: " << m << ' ' << n << '\n';
    out << "# delta_used: " << format_double(set.delta_used) << '\n';
    out << "# domain:";
    for (const auto& [lb, ub] : set.domain.bounds)
        out << ' ' << format_double(lb) << ' ' << format_double(ub);
    out << '\n';
    auto write_rows = [&](const std::vector<std::vector<double>>& xs,
                          const std::vector<std::vector<double>>& ys, const char* polarity) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (double v : xs[i]) out << format_double(v) << ',';
            for (double v : ys[i]) out << format_double(v) << ',';
            out << polarity << '\n';
        }
    };
    write_rows(set.positives, set.positive_outputs, "positive");
    write_rows(set.negatives, set.negative_outputs, "negative");
}

LabeledSampleSet load_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open sample CSV '" + path + "'");
    LabeledSampleSet set;
    std::size_t m = 0, n = 0;
    bool have_dims = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "spec_id:") {
                std::string rest;
                std::getline(hs, rest);
                std::size_t b = rest.find_first_not_of(' ');
                set.spec_id = b == std::string::npos ? "" : rest.substr(b);
            } else if (key == "dims:") {
                hs >> m >> n;
                have_dims = true;
            } else if (key == "delta_used:") {
                hs >> set.delta_used;
            } else if (key == "domain:") {
                double lb, ub;
                while (hs >> lb >> ub) set.domain.bounds.emplace_back(lb, ub);
            }
            continue;
        }
        if (!have_dims) throw ParseError(path + ": data row before '# dims:' header");
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            cells.push_back(comma == std::string::npos ? line.substr(start)
                                                       : line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != m + n + 1)
            throw ParseError(path + ": row has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(m + n + 1));
        std::vector<double> x(m), y(n);
        for (std::size_t i = 0; i < m; ++i) x[i] = parse_double(cells[i], "input");
        for (std::size_t i = 0; i < n; ++i) y[i] = parse_double(cells[m + i], "output");
        const std::string& pol = cells.back();
        if (pol == "positive") {
            set.positives.push_back(std::move(x));
            set.positive_outputs.push_back(std::move(y));
        } else if (pol == "negative") {
            set.negatives.push_back(std::move(x));
            set.negative_outputs.push_back(std::move(y));
        } else {
            throw ParseError(path + ": unknown polarity '" + pol + "'");
        }
    }
    return set;
}

} // namespace netrepair

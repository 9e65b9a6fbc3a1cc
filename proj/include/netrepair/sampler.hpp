#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netrepair/network.hpp"
#include "netrepair/properties.hpp"

namespace netrepair {

// Monte Carlo characterization of one spec on one network: the sampled
// points split into satisfied/violating, with the network outputs kept
// alongside. `domain` is the region positives were drawn from; it equals the
// spec's pre box unless delta relaxation was needed (delta_used > 0).
struct LabeledSampleSet {
    std::vector<std::vector<double>> positives;        // S_p
    std::vector<std::vector<double>> negatives;        // S_n
    std::vector<std::vector<double>> positive_outputs; // Y_p
    std::vector<std::vector<double>> negative_outputs; // Y_n
    std::string spec_id;
    InputDomain domain;
    double delta_used = 0.0;
};

std::vector<std::vector<double>> sample_uniform(const InputDomain& d, std::size_t count,
                                                std::uint64_t seed);

// Geometric relaxation schedule {0, d0, 2 d0, 4 d0, ...} with d0 = 1% of the
// widest box edge. `steps` counts the nonzero entries.
std::vector<double> default_delta_schedule(const InputDomain& pre, std::size_t steps = 12);

// Draws n_total points from the pre box and partitions them. If fewer than
// min_positives satisfy the post-condition, positives are re-drawn from
// successively wider delta-neighbourhoods (schedule must start at 0 and
// strictly increase) until enough are found; negatives always come from the
// original box. Throws PositivesUnavailable when the schedule runs out.
LabeledSampleSet collect(const Network& net, const PropertySpec& spec, std::size_t n_total,
                         std::size_t min_positives, std::span<const double> delta_schedule,
                         std::uint64_t seed,
                         const std::optional<InputDomain>& clamp = std::nullopt);

// Classifies inputs in batches until it has (up to) the requested number of
// each polarity, so callers can hit prescribed negative/positive counts even
// when the natural rates are far from the requested mix. Negatives are only
// ever taken from the pre box; positives fall back to delta relaxation like
// collect. Runs out of batches -> returns what it found, provided at least
// min_positives positives exist (else PositivesUnavailable; min_positives
// may be 0 to accept empty).
LabeledSampleSet collect_targets(const Network& net, const PropertySpec& spec,
                                 std::size_t target_negatives, std::size_t target_positives,
                                 std::size_t min_positives,
                                 std::span<const double> delta_schedule, std::uint64_t seed,
                                 std::size_t max_batches = 64,
                                 const std::optional<InputDomain>& clamp = std::nullopt);

// Probability that the repaired network satisfies the spec set, from the
// pre-repair satisfaction rate q, improvement u and drawdown v.
double satisfaction_probability(double q, double u, double v);

// Smallest N with 2 exp(-2 N eps^2) <= 1 - confidence.
std::size_t required_sample_size(double epsilon, double confidence);

// CSV dump/load, one row per point: inputs..., outputs..., polarity.
void save_samples_csv(const LabeledSampleSet& set, const std::string& path);
LabeledSampleSet load_samples_csv(const std::string& path);

} // namespace netrepair

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "netrepair/network.hpp"
#include "netrepair/properties.hpp"

namespace netrepair {

// Recipe for a reproducible buggy network: over the pre box [0,1]^m the net
// satisfies a generated safe rule everywhere except inside an axis-aligned
// bug region, where it violates it. The construction is analytic (a smoothed
// box indicator wired through two hidden layers), so the violation geometry
// is known exactly up to thin transition shells at the region faces.
struct PlantedBugSpec {
    std::vector<std::size_t> topology; // {inputs, hidden1, hidden2, outputs}
    ActivationKind activation = ActivationKind::ReLU;
    double activation_alpha = 0.5;
    // Left empty: derived from violation_rate with seeded placement. When
    // given, must sit inside [0,1]^m with >= 0.03 margin to every face.
    std::optional<InputDomain> bug_region;
    double violation_rate = 0.1; // target fraction of the pre box
    std::uint64_t seed = 42;
};

struct SyntheticFixture {
    Network network;
    PropertySpec property;
    InputDomain bug_region;      // exact membership oracle for the planted fault
    double target_rate = 0.0;
    double measured_rate = 0.0;  // 10K-sample Monte Carlo estimate
    double oracle_agreement = 0.0; // fraction of samples where net and oracle agree
    bool rate_within_tolerance = false; // measured within +-10% of target
};

// Unsupported topologies (needs exactly two hidden layers, wide enough for
// the indicator circuit) raise InvalidArgument. An unreachable target rate
// is not an error: the achieved rate is measured and reported.
SyntheticFixture make_buggy(const PlantedBugSpec& spec);

} // namespace netrepair

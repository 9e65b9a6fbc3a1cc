#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netrepair/rng.hpp"

namespace netrepair::pso {

using FitnessFn = std::function<double(std::span<const double>)>;

// Called after each iteration with the global best; returning true stops the
// search (used e.g. to abort on excessive performance drawdown).
using StopFn = std::function<bool(std::span<const double>, double)>;

struct SwarmConfig {
    double omega = 0.8; // inertia
    double c1 = 0.41;   // cognitive attraction
    double c2 = 0.41;   // social attraction
    std::size_t particles = 20;
    std::size_t max_iters = 100;
    std::size_t stagnation_window = 10;
    std::optional<std::vector<std::pair<double, double>>> bounds; // per-dimension clamp
    std::uint64_t seed = 42;
    double init_spread = 0.10;       // sigma as a fraction of each coordinate
    double init_spread_floor = 0.01; // sigma lower bound

    void validate() const;
};

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> best_position;
    double fitness = 0.0;
    double best_fitness = 0.0;
};

struct SwarmState {
    std::vector<Particle> particles;
    std::vector<double> global_best;
    double global_best_fitness = 0.0;
    std::size_t iteration = 0;
    Rng rng{0};
};

// Particle 0 starts at `init`; the rest are Gaussian perturbations of it
// (sigma = init_spread * |coordinate|, floored). Velocities start at zero.
// Non-finite fitness values are treated as +infinity.
SwarmState init_swarm(const FitnessFn& fitness, std::span<const double> init,
                      const SwarmConfig& cfg);

// One synchronous iteration:
//   v <- omega v + R(0,c1) (p_i - x) + R(0,c2) (p_g - x);  x <- x + v
// with R(0,c) drawn per dimension, positions clamped to bounds when given,
// and personal/global bests updated on strict improvement afterwards, in
// particle order. Returns whether the global best improved.
bool step(SwarmState& state, const SwarmConfig& cfg, const FitnessFn& fitness);

struct OptimizeResult {
    std::vector<double> best_position;
    double best_fitness = 0.0;
    std::size_t iterations = 0;
    std::vector<double> history; // global best after init, then per iteration
    std::string termination;     // max_iters | stagnation | stop_condition
};

// Runs steps until max_iters, stagnation_window consecutive iterations
// without global-best improvement, or the stop callback fires.
OptimizeResult optimize(const FitnessFn& fitness, std::span<const double> init,
                        const SwarmConfig& cfg, const StopFn& stop = {});

} // namespace netrepair::pso

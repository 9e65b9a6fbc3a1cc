#include "netrepair/pso.hpp"

#include <cmath>
#include <limits>

#include "netrepair/errors.hpp"

namespace netrepair::pso {

namespace {

double safe_fitness(const FitnessFn& fitness, std::span<const double> x) {
    double f = fitness(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
}

void clamp(std::vector<double>& x, const SwarmConfig& cfg) {
    if (!cfg.bounds) return;
    if (cfg.bounds->size() != x.size())
        throw InvalidArgument("swarm bounds dimension mismatch");
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (x[d] < (*cfg.bounds)[d].first) x[d] = (*cfg.bounds)[d].first;
        if (x[d] > (*cfg.bounds)[d].second) x[d] = (*cfg.bounds)[d].second;
    }
}

} // namespace

void SwarmConfig::validate() const {
    if (omega < 0.0 || c1 < 0.0 || c2 < 0.0)
        throw InvalidArgument("omega, c1 and c2 must be nonnegative");
    if (particles < 2) throw InvalidArgument("swarm needs at least 2 particles");
    if (max_iters < 1) throw InvalidArgument("max_iters must be positive");
    if (stagnation_window < 1) throw InvalidArgument("stagnation window must be positive");
    if (!(init_spread >= 0.0) || !(init_spread_floor >= 0.0))
        throw InvalidArgument("initial spread parameters must be nonnegative");
}

SwarmState init_swarm(const FitnessFn& fitness, std::span<const double> init,
                      const SwarmConfig& cfg) {
    cfg.validate();
    if (init.empty()) throw InvalidArgument("initial position must have at least one dimension");

    SwarmState state;
    state.rng = Rng(cfg.seed);
    state.particles.resize(cfg.particles);

    for (std::size_t i = 0; i < cfg.particles; ++i) {
        Particle& p = state.particles[i];
        p.position.assign(init.begin(), init.end());
        if (i > 0) {
            for (double& v : p.position) {
                double sigma = cfg.init_spread * std::abs(v);
                if (sigma < cfg.init_spread_floor) sigma = cfg.init_spread_floor;
                v += sigma * state.rng.gaussian();
            }
        }
        clamp(p.position, cfg);
        p.velocity.assign(init.size(), 0.0);
        p.fitness = safe_fitness(fitness, p.position);
        p.best_position = p.position;
        p.best_fitness = p.fitness;
    }

    state.global_best = state.particles[0].best_position;
    state.global_best_fitness = state.particles[0].best_fitness;
    for (std::size_t i = 1; i < state.particles.size(); ++i) {
        if (state.particles[i].best_fitness < state.global_best_fitness) {
            state.global_best_fitness = state.particles[i].best_fitness;
            state.global_best = state.particles[i].best_position;
        }
    }
    return state;
}

bool step(SwarmState& state, const SwarmConfig& cfg, const FitnessFn& fitness) {
    // The social term uses the global best from the previous iteration for
    // every particle (synchronous update).
    const std::vector<double> gbest = state.global_best;

    for (Particle& p : state.particles) {
        for (std::size_t d = 0; d < p.position.size(); ++d) {
            double r1 = state.rng.uniform(0.0, cfg.c1);
            double r2 = state.rng.uniform(0.0, cfg.c2);
            p.velocity[d] = cfg.omega * p.velocity[d] +
                            r1 * (p.best_position[d] - p.position[d]) +
                            r2 * (gbest[d] - p.position[d]);
            p.position[d] += p.velocity[d];
        }
        clamp(p.position, cfg);
        p.fitness = safe_fitness(fitness, p.position);
    }

    for (Particle& p : state.particles) {
        if (p.fitness < p.best_fitness) {
            p.best_fitness = p.fitness;
            p.best_position = p.position;
        }
    }
    bool improved = false;
    for (const Particle& p : state.particles) {
        if (p.best_fitness < state.global_best_fitness) {
            state.global_best_fitness = p.best_fitness;
            state.global_best = p.best_position;
            improved = true;
        }
    }
    ++state.iteration;
    return improved;
}

OptimizeResult optimize(const FitnessFn& fitness, std::span<const double> init,
                        const SwarmConfig& cfg, const StopFn& stop) {
    SwarmState state = init_swarm(fitness, init, cfg);

    OptimizeResult result;
    result.history.push_back(state.global_best_fitness);
    result.termination = "max_iters";

    std::size_t stagnant = 0;
    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        bool improved = step(state, cfg, fitness);
        result.history.push_back(state.global_best_fitness);
        result.iterations = iter;
        if (stop && stop(state.global_best, state.global_best_fitness)) {
            result.termination = "stop_condition";
            break;
        }
        if (improved) {
            stagnant = 0;
        } else if (++stagnant >= cfg.stagnation_window) {
            result.termination = "stagnation";
            break;
        }
    }
    result.best_position = state.global_best;
    result.best_fitness = state.global_best_fitness;
    return result;
}

} // namespace netrepair::pso

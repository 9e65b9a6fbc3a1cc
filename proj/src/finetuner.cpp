#include "netrepair/finetuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "netrepair/numio.hpp"
#include "netrepair/parallel.hpp"

namespace netrepair {

void FinetuneConfig::validate() const {
    if (r < 1) throw InvalidArgument("r must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
        throw InvalidArgument("alpha and beta must lie in [0,1]");
    if (std::abs(alpha + beta - 1.0) > 1e-12)
        throw InvalidArgument("alpha + beta must equal 1");
    if (!(drawdown_abort >= 0.0 && drawdown_abort <= 1.0))
        throw InvalidArgument("drawdown_abort must lie in [0,1]");
    if (repair_negatives < 1 || test_negatives < 1)
        throw InvalidArgument("sample targets must be positive");
    swarm.validate();
}

NeuronWeightView::NeuronWeightView(const Network& net, std::vector<NeuronIndex> indices)
    : indices_(std::move(indices)) {
    if (indices_.empty()) throw InvalidArgument("weight view needs at least one neuron");
    for (std::size_t a = 0; a < indices_.size(); ++a)
        for (std::size_t b = a + 1; b < indices_.size(); ++b)
            if (indices_[a] == indices_[b])
                throw InvalidArgument("duplicate neuron in weight view");
    earliest_layer_ = indices_[0].layer;
    fan_in_.reserve(indices_.size());
    for (const NeuronIndex& idx : indices_) {
        if (idx.layer < 1 || idx.layer > net.layer_count())
            throw InvalidArgument("neuron layer " + std::to_string(idx.layer) + " out of range");
        const Layer& l = net.layer(idx.layer - 1);
        if (idx.neuron >= l.out_dim())
            throw InvalidArgument("neuron index " + std::to_string(idx.neuron) +
                                  " out of range in layer " + std::to_string(idx.layer));
        fan_in_.push_back(l.in_dim());
        size_ += l.in_dim() + 1;
        if (idx.layer < earliest_layer_) earliest_layer_ = idx.layer;
    }
}

void NeuronWeightView::check_against(const Network& net) const {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        const NeuronIndex& idx = indices_[i];
        if (idx.layer > net.layer_count() ||
            idx.neuron >= net.layer(idx.layer - 1).out_dim() ||
            net.layer(idx.layer - 1).in_dim() != fan_in_[i])
            throw ShapeError("network shape does not match the weight view");
    }
}

std::vector<double> NeuronWeightView::extract(const Network& net) const {
    check_against(net);
    std::vector<double> out;
    out.reserve(size_);
    for (const NeuronIndex& idx : indices_) {
        const Layer& l = net.layer(idx.layer - 1);
        const auto& row = l.weights[idx.neuron];
        out.insert(out.end(), row.begin(), row.end());
        out.push_back(l.biases[idx.neuron]);
    }
    return out;
}

void NeuronWeightView::write_back(std::span<const double> values, Network& net) const {
    check_against(net);
    if (values.size() != size_)
        throw ShapeError("weight view expects " + std::to_string(size_) + " values, got " +
                         std::to_string(values.size()));
    std::size_t pos = 0;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        const NeuronIndex& idx = indices_[i];
        Layer& l = net.mutable_layer(idx.layer - 1);
        auto& row = l.weights[idx.neuron];
        for (std::size_t j = 0; j < fan_in_[i]; ++j) row[j] = values[pos++];
        l.biases[idx.neuron] = values[pos++];
    }
}

namespace {

constexpr std::size_t kChunk = 256;

// Counts satisfied points, reduced per fixed chunk for thread-count
// independence.
std::size_t count_satisfied(const std::vector<PropertySpec>& specs,
                            const std::function<std::vector<double>(std::size_t)>& output_of,
                            const std::vector<std::size_t>& tags, std::size_t n) {
    const std::size_t n_chunks = n == 0 ? 0 : (n + kChunk - 1) / kChunk;
    std::vector<std::size_t> partial(n_chunks, 0);
    parallel_chunks(n, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        std::size_t hits = 0;
        for (std::size_t i = b; i < e; ++i)
            if (satisfies(specs[tags[i]].post, output_of(i))) ++hits;
        partial[c] = hits;
    });
    std::size_t total = 0;
    for (std::size_t h : partial) total += h;
    return total;
}

} // namespace

double repair_fitness(const Network& candidate, const EvalSets& sets,
                      const std::vector<PropertySpec>& specs, double alpha, double beta) {
    if (sets.negatives.empty())
        throw InvalidArgument("fitness needs a nonempty negative evaluation set");
    if (sets.negatives.size() != sets.negative_spec.size() ||
        sets.positives.size() != sets.positive_spec.size())
        throw InvalidArgument("evaluation sets and spec tags differ in length");

    std::size_t neg_ok = count_satisfied(
        specs, [&](std::size_t i) { return candidate.forward(sets.negatives[i]); },
        sets.negative_spec, sets.negatives.size());
    double unexp = static_cast<double>(sets.negatives.size() - neg_ok) /
                   static_cast<double>(sets.negatives.size());

    double draw = 0.0;
    if (!sets.positives.empty()) {
        std::size_t pos_ok = count_satisfied(
            specs, [&](std::size_t i) { return candidate.forward(sets.positives[i]); },
            sets.positive_spec, sets.positives.size());
        draw = static_cast<double>(sets.positives.size() - pos_ok) /
               static_cast<double>(sets.positives.size());
    }
    return alpha * unexp + beta * draw;
}

namespace {

// Fitness evaluator for swarm candidates. The prefix of the network below
// the earliest modified layer never changes, so each sample's state at that
// depth is computed once; candidates only pay for the tail.
class CachedEvaluator {
public:
    CachedEvaluator(const Network& original, const NeuronWeightView& view, EvalSets sets,
                    const std::vector<PropertySpec>& specs)
        : scratch_(original), view_(view), sets_(std::move(sets)), specs_(specs),
          base_state_(view.earliest_layer() - 1) {
        neg_base_.resize(sets_.negatives.size());
        parallel_chunks(sets_.negatives.size(), kChunk,
                        [&](std::size_t, std::size_t b, std::size_t e) {
                            for (std::size_t i = b; i < e; ++i)
                                neg_base_[i] =
                                    original.trace(sets_.negatives[i]).states[base_state_];
                        });
        pos_base_.resize(sets_.positives.size());
        parallel_chunks(sets_.positives.size(), kChunk,
                        [&](std::size_t, std::size_t b, std::size_t e) {
                            for (std::size_t i = b; i < e; ++i)
                                pos_base_[i] =
                                    original.trace(sets_.positives[i]).states[base_state_];
                        });
    }

    // (violating fraction of negatives, violating fraction of positives)
    std::pair<double, double> rates(std::span<const double> candidate) {
        view_.write_back(candidate, scratch_);
        double neg_rate = 1.0;
        if (!neg_base_.empty()) {
            std::size_t ok = count_satisfied(
                specs_,
                [&](std::size_t i) { return scratch_.forward_from(base_state_, neg_base_[i]); },
                sets_.negative_spec, neg_base_.size());
            neg_rate = static_cast<double>(neg_base_.size() - ok) /
                       static_cast<double>(neg_base_.size());
        }
        double pos_rate = 0.0;
        if (!pos_base_.empty()) {
            std::size_t ok = count_satisfied(
                specs_,
                [&](std::size_t i) { return scratch_.forward_from(base_state_, pos_base_[i]); },
                sets_.positive_spec, pos_base_.size());
            pos_rate = static_cast<double>(pos_base_.size() - ok) /
                       static_cast<double>(pos_base_.size());
        }
        return {neg_rate, pos_rate};
    }

private:
    Network scratch_;
    const NeuronWeightView& view_;
    EvalSets sets_;
    const std::vector<PropertySpec>& specs_;
    std::size_t base_state_;
    std::vector<std::vector<double>> neg_base_;
    std::vector<std::vector<double>> pos_base_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::pair<std::string, std::string>> config_snapshot(const FinetuneConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> c = {
        {"r", std::to_string(cfg.r)},
        {"alpha", format_double(cfg.alpha)},
        {"beta", format_double(cfg.beta)},
        {"omega", format_double(cfg.swarm.omega)},
        {"c1", format_double(cfg.swarm.c1)},
        {"c2", format_double(cfg.swarm.c2)},
        {"particles", std::to_string(cfg.swarm.particles)},
        {"max_iters", std::to_string(cfg.swarm.max_iters)},
        {"stagnation_window", std::to_string(cfg.swarm.stagnation_window)},
        {"drawdown_abort", format_double(cfg.drawdown_abort)},
        {"repair_negatives", std::to_string(cfg.repair_negatives)},
        {"repair_positives", std::to_string(cfg.repair_positives)},
        {"test_negatives", std::to_string(cfg.test_negatives)},
        {"test_positives", std::to_string(cfg.test_positives)},
        {"localization", cfg.exact_localization ? "exact" : "fast"},
    };
    if (cfg.layer_filter) c.emplace_back("layer_filter", std::to_string(*cfg.layer_filter));
    return c;
}

} // namespace

std::pair<Network, RepairReport> fine_tune(const Network& net,
                                           const std::vector<PropertySpec>& specs,
                                           const FinetuneConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    RepairReport report;
    report.mode = "finetune";
    report.seed = seed;
    report.config = config_snapshot(cfg);

    // Sample every spec. Specs without negatives are satisfied already and
    // contribute nothing to localization or fitness.
    std::vector<LabeledSampleSet> collections;
    collections.reserve(specs.size());
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const PropertySpec& spec = specs[si];
        std::vector<double> schedule = cfg.delta_schedule.empty()
                                           ? default_delta_schedule(spec.pre)
                                           : cfg.delta_schedule;
        LabeledSampleSet col = collect_targets(
            net, spec, cfg.repair_negatives, cfg.repair_positives, cfg.min_positives, schedule,
            derive_seed(seed, "finetune-collect-" + spec.id + "-" + std::to_string(si)),
            cfg.max_collect_batches);
        report.samples.push_back(
            {spec.id, col.negatives.size(), col.positives.size(), col.delta_used});
        collections.push_back(std::move(col));
    }

    bool any_negative = false;
    for (const auto& col : collections) any_negative |= !col.negatives.empty();
    if (!any_negative) {
        report.improvement = 1.0;
        report.drawdown = 0.0;
        report.termination = "no_negatives_found";
        report.notes.push_back("no spec produced negative samples; nothing to repair");
        report.total_time = seconds_since(t0);
        return {net, report};
    }

    // Localization: accumulate responsibility over the negative domains.
    const auto loc0 = std::chrono::steady_clock::now();
    ResponsibilityMatrix matrix;
    for (std::size_t si = 0; si < collections.size(); ++si) {
        const LabeledSampleSet& col = collections[si];
        if (col.negatives.empty()) continue;
        ResponsibilityMatrix part =
            cfg.exact_localization
                ? responsibility_exact(net, col.positives, col.negatives)
                : responsibility_fast(net, col.positives, col.negatives, cfg.fast_normalization);
        matrix.add(part);
    }
    TopSelection selection = select_top(matrix, cfg.r, cfg.layer_filter);
    if (selection.truncated)
        report.notes.push_back("requested " + std::to_string(cfg.r) + " neurons but only " +
                               std::to_string(selection.neurons.size()) + " available");
    report.localization_time = seconds_since(loc0);
    report.repaired_neurons = selection.neurons;

    NeuronWeightView view(net, selection.neurons);

    // Repair-time fitness material: pooled negatives plus the positives that
    // actually lie in their spec's pre box (delta-relaxed positives guide
    // labels and localization only).
    EvalSets repair_sets;
    std::size_t relaxed_excluded = 0;
    for (std::size_t si = 0; si < collections.size(); ++si) {
        const LabeledSampleSet& col = collections[si];
        for (const auto& x : col.negatives) {
            repair_sets.negatives.push_back(x);
            repair_sets.negative_spec.push_back(si);
        }
        for (const auto& x : col.positives) {
            if (specs[si].pre.contains(x)) {
                repair_sets.positives.push_back(x);
                repair_sets.positive_spec.push_back(si);
            } else {
                ++relaxed_excluded;
            }
        }
    }
    if (relaxed_excluded > 0)
        report.notes.push_back(std::to_string(relaxed_excluded) +
                               " delta-relaxed positives excluded from drawdown measurement");
    if (repair_sets.positives.empty())
        report.notes.push_back(
            "no in-box positives available; optimization measured violation rate only");

    CachedEvaluator evaluator(net, view, repair_sets, specs);

    pso::SwarmConfig swarm_cfg = cfg.swarm;
    swarm_cfg.seed = derive_seed(seed, "finetune-swarm");
    std::vector<double> init = view.extract(net);

    pso::FitnessFn fitness = [&](std::span<const double> candidate) {
        auto [neg_rate, pos_rate] = evaluator.rates(candidate);
        return cfg.alpha * neg_rate + cfg.beta * pos_rate;
    };
    pso::StopFn stop = [&](std::span<const double> best, double) {
        return evaluator.rates(best).second > cfg.drawdown_abort;
    };

    pso::OptimizeResult opt = pso::optimize(fitness, init, swarm_cfg, stop);
    report.iterations = opt.iterations;
    report.termination = opt.termination == "stop_condition" ? "drawdown_abort" : opt.termination;

    Network repaired = net;
    view.write_back(opt.best_position, repaired);

    // Held-out verdicts on freshly seeded samples classified against the
    // original network.
    EvalSets eval;
    std::vector<double> no_relax{0.0};
    for (std::size_t si = 0; si < specs.size(); ++si) {
        LabeledSampleSet col = collect_targets(
            net, specs[si], cfg.test_negatives, cfg.test_positives, 0, no_relax,
            derive_seed(seed, "finetune-eval-" + specs[si].id + "-" + std::to_string(si)),
            cfg.max_collect_batches);
        for (auto& x : col.negatives) {
            eval.negatives.push_back(std::move(x));
            eval.negative_spec.push_back(si);
        }
        for (auto& x : col.positives) {
            eval.positives.push_back(std::move(x));
            eval.positive_spec.push_back(si);
        }
    }
    RepairReport measured = evaluate(net, repaired, specs, eval);
    report.improvement = measured.improvement;
    report.drawdown = measured.drawdown;
    report.eval_negatives = measured.eval_negatives;
    report.eval_positives = measured.eval_positives;
    report.total_time = seconds_since(t0);
    return {std::move(repaired), std::move(report)};
}

} // namespace netrepair

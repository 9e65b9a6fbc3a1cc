#include "netrepair/retrainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "netrepair/numio.hpp"
#include "netrepair/rng.hpp"

namespace netrepair {

void RetrainConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
        throw InvalidArgument("alpha and beta must lie in [0,1]");
    if (std::abs(alpha + beta - 1.0) > 1e-12)
        throw InvalidArgument("alpha + beta must equal 1");
    if (k < 1) throw InvalidArgument("k must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (batch_size < 1) throw InvalidArgument("batch size must be positive");
    if (max_epochs < 1) throw InvalidArgument("max epochs must be positive");
    if (early_stop_window < 1) throw InvalidArgument("early-stop window must be positive");
}

std::vector<std::vector<double>> negative_correct(const std::vector<std::vector<double>>& y_p,
                                                  const std::vector<std::vector<double>>& y_n,
                                                  std::size_t k, const OutputCondition& post) {
    if (y_p.empty())
        throw CorrectionImpossible("label correction needs at least one positive output");
    if (k < 1) throw InvalidArgument("k must be positive");
    const std::size_t kk = k < y_p.size() ? k : y_p.size();

    std::vector<std::vector<double>> y_c;
    y_c.reserve(y_n.size());
    std::vector<std::pair<double, std::size_t>> dist(y_p.size());
    for (const auto& yn : y_n) {
        for (std::size_t p = 0; p < y_p.size(); ++p) {
            if (y_p[p].size() != yn.size())
                throw ShapeError("positive and negative outputs differ in width");
            double d2 = 0.0;
            for (std::size_t i = 0; i < yn.size(); ++i) {
                double r = y_p[p][i] - yn[i];
                d2 += r * r;
            }
            dist[p] = {d2, p};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk),
                          dist.end());
        std::vector<double> mean(yn.size(), 0.0);
        for (std::size_t j = 0; j < kk; ++j) {
            const auto& yp = y_p[dist[j].second];
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += yp[i];
        }
        for (double& v : mean) v /= static_cast<double>(kk);
        if (satisfies(post, mean))
            y_c.push_back(std::move(mean));
        else
            y_c.push_back(y_p[dist[0].second]); // nearest satisfying output
    }
    return y_c;
}

RepairDataset build_repair_dataset(const std::vector<LabeledSampleSet>& collections,
                                   std::size_t k, const std::vector<PropertySpec>& specs) {
    RepairDataset ds;
    for (const LabeledSampleSet& col : collections) {
        std::size_t spec_index = specs.size();
        for (std::size_t i = 0; i < specs.size(); ++i)
            if (specs[i].id == col.spec_id) {
                spec_index = i;
                break;
            }
        if (spec_index == specs.size())
            throw InvalidArgument("collection references unknown spec '" + col.spec_id + "'");
        const PropertySpec& spec = specs[spec_index];

        for (std::size_t i = 0; i < col.positives.size(); ++i)
            ds.pairs.push_back({col.positives[i], col.positive_outputs[i],
                                Provenance::OriginalPositive, spec_index});
        if (!col.negatives.empty()) {
            auto corrected = negative_correct(col.positive_outputs, col.negative_outputs, k,
                                              spec.post);
            for (std::size_t i = 0; i < col.negatives.size(); ++i)
                ds.pairs.push_back({col.negatives[i], std::move(corrected[i]),
                                    Provenance::CorrectedNegative, spec_index});
        }
    }
    return ds;
}

namespace {

std::vector<TrainingPair> as_training_pairs(const RepairDataset& d_re) {
    std::vector<TrainingPair> pairs;
    pairs.reserve(d_re.pairs.size());
    for (const RepairPair& p : d_re.pairs) pairs.push_back({p.input, p.target});
    return pairs;
}

} // namespace

double loss_drp(const Network& net, const RepairDataset& d_re, LossNorm norm) {
    if (d_re.pairs.empty()) throw InvalidArgument("repair dataset is empty");
    auto pairs = as_training_pairs(d_re);
    return loss_value(net, pairs, norm);
}

double loss_mpr(const Network& net, std::span<const TrainingPair> d, LossNorm norm) {
    return loss_value(net, d, norm);
}

namespace {

// Fraction of corrected negatives whose current outputs satisfy their spec,
// and same-shaped drawdown over the original positives, used for checkpoint
// selection during training.
struct EpochMetrics {
    double improvement = 1.0;
    double drawdown = 0.0;
};

EpochMetrics training_metrics(const Network& net, const RepairDataset& d_re,
                              const std::vector<PropertySpec>& specs) {
    std::size_t neg = 0, neg_ok = 0, pos = 0, pos_ok = 0;
    for (const RepairPair& p : d_re.pairs) {
        if (p.provenance == Provenance::PreservationSample) continue;
        bool ok = satisfies(specs[p.spec_index].post, net.forward(p.input));
        if (p.provenance == Provenance::CorrectedNegative) {
            ++neg;
            if (ok) ++neg_ok;
        } else {
            ++pos;
            if (ok) ++pos_ok;
        }
    }
    EpochMetrics m;
    if (neg > 0) m.improvement = static_cast<double>(neg_ok) / static_cast<double>(neg);
    if (pos > 0) m.drawdown = static_cast<double>(pos - pos_ok) / static_cast<double>(pos);
    return m;
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = rng.index(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

} // namespace

RetrainResult retrain(const Network& net, std::span<const TrainingPair> preservation,
                      const RepairDataset& d_re, const RetrainConfig& cfg,
                      const std::vector<PropertySpec>& specs, const EvalSets& eval) {
    cfg.validate();
    if (d_re.pairs.empty()) throw InvalidArgument("repair dataset is empty");
    for (const RepairPair& p : d_re.pairs)
        if (p.spec_index >= specs.size())
            throw InvalidArgument("repair pair references spec index out of range");

    const auto t0 = std::chrono::steady_clock::now();
    auto seconds_since = [](std::chrono::steady_clock::time_point start) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    Network theta = net; // repaired weights start from the original
    auto re_pairs = as_training_pairs(d_re);

    RepairReport report;
    report.mode = "retrain";
    report.seed = cfg.seed;
    report.config = {
        {"alpha", format_double(cfg.alpha)},
        {"beta", format_double(cfg.beta)},
        {"k", std::to_string(cfg.k)},
        {"norm", cfg.norm == LossNorm::L2 ? "l2" : "l1"},
        {"learning_rate", format_double(cfg.learning_rate)},
        {"batch_size", std::to_string(cfg.batch_size)},
        {"max_epochs", std::to_string(cfg.max_epochs)},
        {"early_stop_window", std::to_string(cfg.early_stop_window)},
    };

    auto finish = [&](Network best, std::string termination, std::size_t epochs) {
        RepairReport out = evaluate(net, best, specs, eval);
        out.mode = report.mode;
        out.seed = report.seed;
        out.config = report.config;
        out.notes = report.notes;
        out.termination = std::move(termination);
        out.epochs = epochs;
        out.total_time = seconds_since(t0);
        return RetrainResult{std::move(best), std::move(out)};
    };

    if (loss_drp(theta, d_re, cfg.norm) == 0.0)
        return finish(std::move(theta), "converged_start", 0);

    EpochMetrics best_metrics = training_metrics(theta, d_re, specs);
    Network best = theta;

    Rng rng(derive_seed(cfg.seed, "retrain-shuffle"));
    std::vector<std::size_t> re_idx(re_pairs.size());
    for (std::size_t i = 0; i < re_idx.size(); ++i) re_idx[i] = i;
    std::vector<std::size_t> d_idx(preservation.size());
    for (std::size_t i = 0; i < d_idx.size(); ++i) d_idx[i] = i;

    const std::size_t longest = std::max(re_pairs.size(), preservation.size());
    const std::size_t steps = (longest + cfg.batch_size - 1) / cfg.batch_size;

    double prev_improvement = best_metrics.improvement;
    std::size_t stall = 0;
    std::size_t epoch = 0;
    std::string termination = "max_epochs";

    std::vector<TrainingPair> batch_re, batch_d;
    for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_indices(re_idx, rng);
        if (!d_idx.empty()) shuffle_indices(d_idx, rng);

        for (std::size_t s = 0; s < steps; ++s) {
            batch_re.clear();
            if (cfg.alpha > 0.0) {
                for (std::size_t b = 0; b < cfg.batch_size && b < re_pairs.size(); ++b)
                    batch_re.push_back(re_pairs[re_idx[(s * cfg.batch_size + b) % re_pairs.size()]]);
            }
            batch_d.clear();
            if (cfg.beta > 0.0 && !preservation.empty()) {
                for (std::size_t b = 0; b < cfg.batch_size && b < preservation.size(); ++b) {
                    const TrainingPair& p =
                        preservation[d_idx[(s * cfg.batch_size + b) % preservation.size()]];
                    batch_d.push_back(p);
                }
            }
            ParamGradient g = zero_gradient(theta);
            accumulate_gradient(theta, batch_re, cfg.norm, cfg.alpha, g);
            accumulate_gradient(theta, batch_d, cfg.norm, cfg.beta, g);
            apply_gradient(theta, g, -cfg.learning_rate);
        }

        double drp = loss_drp(theta, d_re, cfg.norm);
        if (!std::isfinite(drp))
            throw DivergenceError("repair loss became non-finite at epoch " +
                                  std::to_string(epoch));
        theta.validate(); // throws DivergenceError on non-finite weights

        EpochMetrics m = training_metrics(theta, d_re, specs);
        bool better = m.improvement > best_metrics.improvement ||
                      (m.improvement == best_metrics.improvement &&
                       m.drawdown < best_metrics.drawdown);
        if (better) {
            best_metrics = m;
            best = theta;
        }
        if (m.improvement >= 1.0) {
            termination = "all_satisfied";
            break;
        }
        if (std::abs(m.improvement - prev_improvement) <= cfg.improvement_tolerance) {
            if (++stall >= cfg.early_stop_window) {
                termination = "early_stop";
                break;
            }
        } else {
            stall = 0;
        }
        prev_improvement = m.improvement;
    }
    if (epoch > cfg.max_epochs) epoch = cfg.max_epochs;

    return finish(std::move(best), termination, epoch);
}

} // namespace netrepair

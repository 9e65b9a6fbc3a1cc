#include "netrepair/cli_commands.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "netrepair/finetuner.hpp"
#include "netrepair/localizer.hpp"
#include "netrepair/network.hpp"
#include "netrepair/nnet_io.hpp"
#include "netrepair/numio.hpp"
#include "netrepair/properties.hpp"
#include "netrepair/report.hpp"
#include "netrepair/retrainer.hpp"
#include "netrepair/sampler.hpp"
#include "netrepair/synthetic.hpp"

namespace netrepair::cli {

namespace {

using nlohmann::json;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return round3(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::vector<std::size_t> parse_topology(const std::string& text) {
    std::vector<std::size_t> sizes;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string tok = comma == std::string::npos ? text.substr(start)
                                                     : text.substr(start, comma - start);
        if (!tok.empty()) {
            long v = parse_long(tok, "topology");
            if (v < 1) throw InvalidArgument("topology entries must be positive");
            sizes.push_back(static_cast<std::size_t>(v));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (sizes.size() < 2) throw InvalidArgument("topology needs at least two layers");
    return sizes;
}

} // namespace

std::string error_json(const std::exception& e) {
    const char* type = "internal";
    if (dynamic_cast<const ParseError*>(&e)) type = "parse_error";
    else if (dynamic_cast<const ShapeError*>(&e)) type = "shape_error";
    else if (dynamic_cast<const PositivesUnavailable*>(&e)) type = "positives_unavailable";
    else if (dynamic_cast<const CorrectionImpossible*>(&e)) type = "correction_impossible";
    else if (dynamic_cast<const DivergenceError*>(&e)) type = "divergence";
    else if (dynamic_cast<const InvalidArgument*>(&e)) type = "invalid_argument";
    json j;
    j["error"] = {{"type", type}, {"message", e.what()}};
    return j.dump(2);
}

int run_check(const CheckOptions& opts, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Network net = load_nnet(opts.net_path);
    auto specs = load_properties(opts.props_path, net.output_dim());

    json per_spec = json::array();
    bool all_satisfied = true;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const PropertySpec& spec = specs[si];
        auto points = sample_uniform(spec.pre, opts.samples,
                                     derive_seed(opts.seed, "check-" + std::to_string(si)));
        std::size_t violations = 0;
        for (const auto& x : points) {
            std::vector<double> input = opts.normalized ? net.normalize_input(x) : x;
            if (!satisfies(spec.post, net.forward(input))) ++violations;
        }
        double rate = static_cast<double>(violations) / static_cast<double>(points.size());
        bool ok = violations == 0;
        all_satisfied = all_satisfied && ok;
        per_spec.push_back({{"id", spec.id},
                            {"samples", points.size()},
                            {"violations", violations},
                            {"violation_rate", rate},
                            {"satisfied", ok}});
    }

    json j;
    j["command"] = "check";
    j["net"] = opts.net_path;
    j["seed"] = opts.seed;
    j["normalized_inputs"] = opts.normalized;
    j["specs"] = per_spec;
    j["satisfied"] = all_satisfied;
    j["elapsed_s"] = elapsed_since(t0);
    out << j.dump(2) << '\n';
    return 0;
}

int run_retrain(const RetrainOptions& opts, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(opts.negative_fraction > 0.0 && opts.negative_fraction < 1.0))
        throw InvalidArgument("negative fraction must lie in (0,1)");
    Network net = load_nnet(opts.net_path);
    auto specs = load_properties(opts.props_path, net.output_dim());

    RetrainConfig cfg;
    cfg.alpha = opts.alpha;
    cfg.beta = opts.beta;
    cfg.k = opts.k;
    cfg.norm = loss_norm_from_string(opts.norm);
    cfg.learning_rate = opts.learning_rate;
    cfg.batch_size = opts.batch_size;
    cfg.max_epochs = opts.epochs;
    cfg.early_stop_window = opts.early_stop_window;
    cfg.seed = opts.seed;
    cfg.validate();

    const std::size_t neg_target = static_cast<std::size_t>(
        std::llround(opts.negative_fraction * static_cast<double>(opts.samples)));
    const std::size_t pos_target = opts.samples - neg_target;

    std::vector<LabeledSampleSet> collections;
    std::vector<std::string> notes;
    std::vector<SpecSampleStats> stats;
    std::vector<TrainingPair> preservation;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const PropertySpec& spec = specs[si];
        auto schedule = default_delta_schedule(spec.pre);
        LabeledSampleSet col = collect_targets(
            net, spec, neg_target, pos_target, 1, schedule,
            derive_seed(opts.seed, "retrain-collect-" + std::to_string(si)));
        if (col.negatives.size() < neg_target || col.positives.size() < pos_target)
            notes.push_back("spec '" + spec.id + "': requested " + std::to_string(neg_target) +
                            "/" + std::to_string(pos_target) + " negatives/positives, found " +
                            std::to_string(col.negatives.size()) + "/" +
                            std::to_string(col.positives.size()));
        stats.push_back({spec.id, col.negatives.size(), col.positives.size(), col.delta_used});

        // Preservation pairs: fresh in-box positives labeled by the original
        // network itself.
        LabeledSampleSet keep = collect_targets(
            net, spec, 0, pos_target, 0, std::vector<double>{0.0},
            derive_seed(opts.seed, "retrain-preserve-" + std::to_string(si)));
        for (std::size_t i = 0; i < keep.positives.size(); ++i)
            preservation.push_back({std::move(keep.positives[i]), std::move(keep.positive_outputs[i])});

        collections.push_back(std::move(col));
    }

    RepairDataset d_re = build_repair_dataset(collections, cfg.k, specs);

    EvalSets eval;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        LabeledSampleSet col = collect_targets(
            net, specs[si], opts.test_samples, opts.test_samples, 0, std::vector<double>{0.0},
            derive_seed(opts.seed, "retrain-eval-" + std::to_string(si)));
        for (auto& x : col.negatives) {
            eval.negatives.push_back(std::move(x));
            eval.negative_spec.push_back(si);
        }
        for (auto& x : col.positives) {
            eval.positives.push_back(std::move(x));
            eval.positive_spec.push_back(si);
        }
    }

    RetrainResult result = retrain(net, preservation, d_re, cfg, specs, eval);
    result.report.samples = stats;
    for (auto& n : notes) result.report.notes.push_back(std::move(n));

    if (!opts.out_path.empty()) save_nnet(result.repaired, opts.out_path);
    if (!opts.report_path.empty()) save_report(result.report, opts.report_path);

    json j;
    j["command"] = "repair retrain";
    j["net"] = opts.net_path;
    j["out"] = opts.out_path;
    j["improvement"] = result.report.improvement;
    j["drawdown"] = result.report.drawdown;
    j["epochs"] = result.report.epochs;
    j["termination"] = result.report.termination;
    j["seed"] = opts.seed;
    j["elapsed_s"] = elapsed_since(t0);
    out << j.dump(2) << '\n';
    return 0;
}

int run_finetune(const FinetuneOptions& opts, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Network net = load_nnet(opts.net_path);
    auto specs = load_properties(opts.props_path, net.output_dim());

    FinetuneConfig cfg;
    cfg.r = opts.r;
    cfg.alpha = opts.alpha;
    cfg.beta = opts.beta;
    cfg.layer_filter = opts.layer;
    cfg.swarm.omega = opts.omega;
    cfg.swarm.c1 = opts.c1;
    cfg.swarm.c2 = opts.c2;
    cfg.swarm.particles = opts.particles;
    cfg.swarm.max_iters = opts.iters;
    cfg.swarm.stagnation_window = opts.stagnation_window;
    cfg.drawdown_abort = opts.drawdown_abort;
    cfg.repair_negatives = opts.repair_samples;
    cfg.repair_positives = opts.repair_samples;
    cfg.test_negatives = opts.test_samples;
    cfg.test_positives = opts.test_samples;
    if (opts.localization == "exact") cfg.exact_localization = true;
    else if (opts.localization != "fast")
        throw InvalidArgument("localization mode must be 'exact' or 'fast'");

    auto [repaired, report] = fine_tune(net, specs, cfg, opts.seed);

    if (!opts.out_path.empty()) save_nnet(repaired, opts.out_path);
    if (!opts.report_path.empty()) save_report(report, opts.report_path);

    json j;
    j["command"] = "repair finetune";
    j["net"] = opts.net_path;
    j["out"] = opts.out_path;
    j["improvement"] = report.improvement;
    j["drawdown"] = report.drawdown;
    j["iterations"] = report.iterations;
    j["termination"] = report.termination;
    json neurons = json::array();
    for (const NeuronIndex& n : report.repaired_neurons)
        neurons.push_back({{"layer", n.layer}, {"neuron", n.neuron}});
    j["repaired_neurons"] = neurons;
    j["localization_time_s"] = round3(report.localization_time);
    j["seed"] = opts.seed;
    j["elapsed_s"] = elapsed_since(t0);
    out << j.dump(2) << '\n';
    return 0;
}

int run_localize(const LocalizeOptions& opts, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Network net = load_nnet(opts.net_path);
    auto specs = load_properties(opts.props_path, net.output_dim());
    bool exact = opts.mode == "exact";
    if (!exact && opts.mode != "fast")
        throw InvalidArgument("mode must be 'exact' or 'fast'");

    ResponsibilityMatrix matrix;
    std::size_t specs_with_negatives = 0;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const PropertySpec& spec = specs[si];
        auto schedule = default_delta_schedule(spec.pre);
        LabeledSampleSet col =
            collect(net, spec, opts.samples, 1, schedule,
                    derive_seed(opts.seed, "localize-" + std::to_string(si)));
        if (col.negatives.empty()) continue;
        ++specs_with_negatives;
        ResponsibilityMatrix part = exact
                                        ? responsibility_exact(net, col.positives, col.negatives)
                                        : responsibility_fast(net, col.positives, col.negatives);
        matrix.add(part);
    }
    if (specs_with_negatives == 0)
        throw InvalidArgument("no spec produced negative samples; nothing to localize");

    if (!opts.out_csv.empty()) save_responsibility_csv(matrix, opts.out_csv);
    TopSelection top = select_top(matrix, 10);

    json j;
    j["command"] = "localize";
    j["mode"] = exact ? "exact" : "fast";
    j["specs_with_negatives"] = specs_with_negatives;
    j["out"] = opts.out_csv;
    json top_json = json::array();
    for (std::size_t i = 0; i < top.neurons.size(); ++i)
        top_json.push_back({{"layer", top.neurons[i].layer},
                            {"neuron", top.neurons[i].neuron},
                            {"score", top.scores[i]}});
    j["top"] = top_json;
    j["seed"] = opts.seed;
    j["elapsed_s"] = elapsed_since(t0);
    out << j.dump(2) << '\n';
    return 0;
}

int run_synth(const SynthOptions& opts, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    PlantedBugSpec spec;
    spec.topology = parse_topology(opts.topology);
    spec.activation = activation_from_string(opts.activation);
    spec.activation_alpha = opts.activation_alpha;
    spec.violation_rate = opts.rate;
    spec.seed = opts.seed;

    SyntheticFixture fx = make_buggy(spec);
    if (!opts.out_path.empty()) save_nnet(fx.network, opts.out_path);
    if (!opts.props_out.empty()) save_properties({fx.property}, opts.props_out);

    json j;
    j["command"] = "synth";
    j["out"] = opts.out_path;
    j["props_out"] = opts.props_out;
    j["property_id"] = fx.property.id;
    j["target_rate"] = fx.target_rate;
    j["measured_rate"] = fx.measured_rate;
    j["oracle_agreement"] = fx.oracle_agreement;
    j["rate_within_tolerance"] = fx.rate_within_tolerance;
    json region = json::array();
    for (const auto& [lb, ub] : fx.bug_region.bounds)
        region.push_back({{"lower", lb}, {"upper", ub}});
    j["bug_region"] = region;
    j["seed"] = opts.seed;
    j["elapsed_s"] = elapsed_since(t0);
    out << j.dump(2) << '\n';
    return 0;
}

} // namespace netrepair::cli

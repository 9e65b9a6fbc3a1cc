#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "netrepair/cli_commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Property-driven neural network repair"};
    app.require_subcommand(1);

    netrepair::cli::CheckOptions check_opts;
    CLI::App* check = app.add_subcommand("check", "Sample a property's input domain and report violations");
    check->add_option("--net", check_opts.net_path, "Network file (NNet text format)")->required();
    check->add_option("--props", check_opts.props_path, "Property JSON file")->required();
    check->add_option("--samples", check_opts.samples, "Monte Carlo samples per property");
    check->add_option("--seed", check_opts.seed, "Base RNG seed");
    check->add_flag("--normalized", check_opts.normalized,
                    "Apply the network's stored input normalization before evaluation");

    CLI::App* repair = app.add_subcommand("repair", "Repair a network against its properties");
    repair->require_subcommand(1);

    netrepair::cli::RetrainOptions retrain_opts;
    CLI::App* retrain = repair->add_subcommand("retrain", "Gradient retraining on corrected samples");
    retrain->add_option("--net", retrain_opts.net_path, "Network file")->required();
    retrain->add_option("--props", retrain_opts.props_path, "Property JSON file")->required();
    retrain->add_option("--out", retrain_opts.out_path, "Where to write the repaired network");
    retrain->add_option("--report", retrain_opts.report_path, "Where to write the JSON repair report");
    retrain->add_option("--alpha", retrain_opts.alpha, "Weight of the repair loss");
    retrain->add_option("--beta", retrain_opts.beta, "Weight of the preservation loss");
    retrain->add_option("--k", retrain_opts.k, "Neighbours used to correct a violating sample");
    retrain->add_option("--norm", retrain_opts.norm, "Distance norm: l1 or l2");
    retrain->add_option("--samples", retrain_opts.samples, "Repair-time samples per property");
    retrain->add_option("--test-samples", retrain_opts.test_samples, "Held-out samples per property");
    retrain->add_option("--negative-fraction", retrain_opts.negative_fraction,
                        "Fraction of repair samples targeted as violations");
    retrain->add_option("--learning-rate", retrain_opts.learning_rate, "SGD step size");
    retrain->add_option("--batch-size", retrain_opts.batch_size, "Mini-batch size");
    retrain->add_option("--epochs", retrain_opts.epochs, "Maximum training epochs");
    retrain->add_option("--early-stop-window", retrain_opts.early_stop_window,
                        "Epochs without improvement before stopping");
    retrain->add_option("--seed", retrain_opts.seed, "Base RNG seed");

    netrepair::cli::FinetuneOptions finetune_opts;
    CLI::App* finetune = repair->add_subcommand("finetune", "Particle-swarm fine-tuning of localized neurons");
    finetune->add_option("--net", finetune_opts.net_path, "Network file")->required();
    finetune->add_option("--props", finetune_opts.props_path, "Property JSON file")->required();
    finetune->add_option("--out", finetune_opts.out_path, "Where to write the repaired network");
    finetune->add_option("--report", finetune_opts.report_path, "Where to write the JSON repair report");
    finetune->add_option("--alpha", finetune_opts.alpha, "Fitness weight of remaining violations");
    finetune->add_option("--beta", finetune_opts.beta, "Fitness weight of broken positives");
    finetune->add_option("-r,--repair-neurons", finetune_opts.r, "Number of neurons to adjust");
    std::size_t layer_value = 0;
    CLI::Option* layer_opt =
        finetune->add_option("--layer", layer_value, "Restrict localization to one layer (1-based)");
    finetune->add_option("--particles", finetune_opts.particles, "Swarm size");
    finetune->add_option("--iters", finetune_opts.iters, "Maximum swarm iterations");
    finetune->add_option("--stagnation-window", finetune_opts.stagnation_window,
                         "Iterations without improvement before stopping");
    finetune->add_option("--omega", finetune_opts.omega, "Velocity inertia");
    finetune->add_option("--c1", finetune_opts.c1, "Personal-best attraction");
    finetune->add_option("--c2", finetune_opts.c2, "Global-best attraction");
    finetune->add_option("--drawdown-abort", finetune_opts.drawdown_abort,
                         "Stop when the best candidate breaks more than this fraction of positives");
    finetune->add_option("--repair-samples", finetune_opts.repair_samples,
                         "Repair-time sample target per property and polarity");
    finetune->add_option("--test-samples", finetune_opts.test_samples,
                         "Held-out sample target per property and polarity");
    finetune->add_option("--localization", finetune_opts.localization,
                         "Responsibility mode: fast or exact");
    finetune->add_option("--seed", finetune_opts.seed, "Base RNG seed");

    netrepair::cli::LocalizeOptions localize_opts;
    CLI::App* localize = app.add_subcommand("localize", "Rank neurons by responsibility for violations");
    localize->add_option("--net", localize_opts.net_path, "Network file")->required();
    localize->add_option("--props", localize_opts.props_path, "Property JSON file")->required();
    localize->add_option("--out", localize_opts.out_csv, "Where to write the responsibility CSV");
    localize->add_option("--samples", localize_opts.samples, "Samples per property");
    localize->add_option("--mode", localize_opts.mode, "Responsibility mode: fast or exact");
    localize->add_option("--seed", localize_opts.seed, "Base RNG seed");

    netrepair::cli::SynthOptions synth_opts;
    CLI::App* synth = app.add_subcommand("synth", "Generate a buggy network with a known violation region");
    synth->add_option("--topology", synth_opts.topology, "Comma-separated layer sizes, e.g. 5,50,50,5");
    synth->add_option("--activation", synth_opts.activation, "relu, tanh, leaky_relu, or elu");
    synth->add_option("--activation-alpha", synth_opts.activation_alpha,
                      "Slope/scale for leaky_relu and elu");
    synth->add_option("--rate", synth_opts.rate, "Target violation rate over the unit box");
    synth->add_option("--out", synth_opts.out_path, "Where to write the network");
    synth->add_option("--props-out", synth_opts.props_out, "Where to write the matching property JSON");
    synth->add_option("--seed", synth_opts.seed, "Base RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return netrepair::cli::run_check(check_opts, std::cout);
        if (retrain->parsed()) return netrepair::cli::run_retrain(retrain_opts, std::cout);
        if (finetune->parsed()) {
            if (layer_opt->count() > 0) finetune_opts.layer = layer_value;
            return netrepair::cli::run_finetune(finetune_opts, std::cout);
        }
        if (localize->parsed()) return netrepair::cli::run_localize(localize_opts, std::cout);
        if (synth->parsed()) return netrepair::cli::run_synth(synth_opts, std::cout);
    } catch (const std::exception& e) {
        std::cout << netrepair::cli::error_json(e) << '\n';
        return 1;
    }
    return 0;
}

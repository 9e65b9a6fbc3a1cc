#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace netrepair::cli {

struct CheckOptions {
    std::string net_path;
    std::string props_path;
    std::size_t samples = 10000;
    std::uint64_t seed = 42;
    bool normalized = false; // map inputs through the stored normalization first
};

struct RetrainOptions {
    std::string net_path;
    std::string props_path;
    std::string out_path;
    std::string report_path;
    double alpha = 0.5;
    double beta = 0.5;
    std::size_t k = 5;
    std::string norm = "l2";
    std::size_t samples = 10000;      // repair-time sample budget per spec
    std::size_t test_samples = 5000;  // held-out budget per spec
    double negative_fraction = 0.10;  // share of the repair budget for negatives
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t epochs = 200;
    std::size_t early_stop_window = 10;
    std::uint64_t seed = 42;
};

struct FinetuneOptions {
    std::string net_path;
    std::string props_path;
    std::string out_path;
    std::string report_path;
    double alpha = 0.6;
    double beta = 0.4;
    std::size_t r = 10;
    std::optional<std::size_t> layer; // layer-wise mode
    std::size_t particles = 20;
    std::size_t iters = 100;
    std::size_t stagnation_window = 10;
    double omega = 0.8;
    double c1 = 0.41;
    double c2 = 0.41;
    double drawdown_abort = 0.05;
    std::size_t repair_samples = 10000; // per-spec negatives and positives targets
    std::size_t test_samples = 10000;
    std::string localization = "fast"; // or "exact"
    std::uint64_t seed = 42;
};

struct LocalizeOptions {
    std::string net_path;
    std::string props_path;
    std::string out_csv;
    std::size_t samples = 10000;
    std::string mode = "fast"; // or "exact"
    std::uint64_t seed = 42;
};

struct SynthOptions {
    std::string topology = "5,50,50,5";
    std::string activation = "relu";
    double activation_alpha = 0.5;
    double rate = 0.1;
    std::string out_path;
    std::string props_out; // optional property JSON dump
    std::uint64_t seed = 42;
};

int run_check(const CheckOptions& opts, std::ostream& out);
int run_retrain(const RetrainOptions& opts, std::ostream& out);
int run_finetune(const FinetuneOptions& opts, std::ostream& out);
int run_localize(const LocalizeOptions& opts, std::ostream& out);
int run_synth(const SynthOptions& opts, std::ostream& out);

// Formats any thrown error as the machine-readable JSON the CLI prints
// before exiting nonzero.
std::string error_json(const std::exception& e);

} // namespace netrepair::cli

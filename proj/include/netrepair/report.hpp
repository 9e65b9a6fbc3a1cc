#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netrepair/localizer.hpp"
#include "netrepair/network.hpp"
#include "netrepair/properties.hpp"

namespace netrepair {

// Held-out evaluation material: inputs with the index of the spec they were
// sampled for. Negatives violated their spec on the pre-repair network;
// positives satisfied it.
struct EvalSets {
    std::vector<std::vector<double>> negatives;
    std::vector<std::size_t> negative_spec;
    std::vector<std::vector<double>> positives;
    std::vector<std::size_t> positive_spec;
};

// Per-spec sampling statistics recorded in the report.
struct SpecSampleStats {
    std::string spec_id;
    std::size_t negatives = 0;
    std::size_t positives = 0;
    double delta_used = 0.0;
};

struct RepairReport {
    int schema_version = 1;
    std::string mode;              // "retrain" or "finetune"
    double improvement = 0.0;      // fraction of eval negatives now satisfied
    double drawdown = 0.0;         // fraction of eval positives now violating
    double localization_time = 0.0;
    double total_time = 0.0;
    std::size_t epochs = 0;        // retrain
    std::size_t iterations = 0;    // finetune (swarm iterations)
    std::string termination;
    std::uint64_t seed = 0;
    std::vector<NeuronIndex> repaired_neurons;
    std::vector<SpecSampleStats> samples;
    std::size_t eval_negatives = 0;
    std::size_t eval_positives = 0;
    std::vector<std::pair<std::string, std::string>> config; // flat key/value snapshot
    std::vector<std::string> notes;
};

std::string report_to_json(const RepairReport& report);
RepairReport report_from_json(const std::string& json_text);
void save_report(const RepairReport& report, const std::string& path);
RepairReport load_report(const std::string& path);

// Fills improvement and drawdown by re-running every evaluation point
// through `after`: improvement counts negatives whose outputs now satisfy
// their spec, drawdown counts positives that stopped satisfying theirs.
// Empty negatives give improvement 1 (nothing left to fix); empty positives
// give drawdown 0. Timing and config fields are the caller's business.
RepairReport evaluate(const Network& before, const Network& after,
                      const std::vector<PropertySpec>& specs, const EvalSets& sets);

} // namespace netrepair

#include "netrepair/report.hpp"

#include <fstream>

#include "json.hpp"
#include "netrepair/numio.hpp"
#include "netrepair/parallel.hpp"

namespace netrepair {

namespace {

using nlohmann::json;

json report_to_json_obj(const RepairReport& r) {
    json j;
    j["schema_version"] = r.schema_version;
    j["mode"] = r.mode;
    j["improvement"] = r.improvement;
    j["drawdown"] = r.drawdown;
    j["localization_time_s"] = round3(r.localization_time);
    j["total_time_s"] = round3(r.total_time);
    j["epochs"] = r.epochs;
    j["iterations"] = r.iterations;
    j["termination"] = r.termination;
    j["seed"] = r.seed;
    json neurons = json::array();
    for (const NeuronIndex& n : r.repaired_neurons)
        neurons.push_back({{"layer", n.layer}, {"neuron", n.neuron}});
    j["repaired_neurons"] = neurons;
    json samples = json::array();
    for (const SpecSampleStats& s : r.samples)
        samples.push_back({{"spec_id", s.spec_id},
                           {"negatives", s.negatives},
                           {"positives", s.positives},
                           {"delta_used", s.delta_used}});
    j["samples"] = samples;
    j["eval"] = {{"negatives", r.eval_negatives}, {"positives", r.eval_positives}};
    json cfg = json::object();
    for (const auto& [k, v] : r.config) cfg[k] = v;
    j["config"] = cfg;
    j["notes"] = r.notes;
    return j;
}

RepairReport report_from_json_obj(const json& j) {
    RepairReport r;
    r.schema_version = j.value("schema_version", 1);
    r.mode = j.value("mode", "");
    r.improvement = j.value("improvement", 0.0);
    r.drawdown = j.value("drawdown", 0.0);
    r.localization_time = j.value("localization_time_s", 0.0);
    r.total_time = j.value("total_time_s", 0.0);
    r.epochs = j.value("epochs", std::size_t{0});
    r.iterations = j.value("iterations", std::size_t{0});
    r.termination = j.value("termination", "");
    r.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("repaired_neurons"))
        for (const json& n : j["repaired_neurons"])
            r.repaired_neurons.push_back(
                {n.at("layer").get<std::size_t>(), n.at("neuron").get<std::size_t>()});
    if (j.contains("samples"))
        for (const json& s : j["samples"])
            r.samples.push_back({s.value("spec_id", ""), s.value("negatives", std::size_t{0}),
                                 s.value("positives", std::size_t{0}), s.value("delta_used", 0.0)});
    if (j.contains("eval")) {
        r.eval_negatives = j["eval"].value("negatives", std::size_t{0});
        r.eval_positives = j["eval"].value("positives", std::size_t{0});
    }
    if (j.contains("config"))
        for (auto it = j["config"].begin(); it != j["config"].end(); ++it)
            r.config.emplace_back(it.key(), it.value().get<std::string>());
    if (j.contains("notes"))
        for (const json& n : j["notes"]) r.notes.push_back(n.get<std::string>());
    return r;
}

} // namespace

std::string report_to_json(const RepairReport& report) {
    return report_to_json_obj(report).dump(2);
}

RepairReport report_from_json(const std::string& json_text) {
    try {
        return report_from_json_obj(json::parse(json_text));
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid report JSON: ") + e.what());
    }
}

void save_report(const RepairReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write report '" + path + "'");
    out << report_to_json(report) << '\n';
}

RepairReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open report '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return report_from_json(text);
}

RepairReport evaluate(const Network& /*before*/, const Network& after,
                      const std::vector<PropertySpec>& specs, const EvalSets& sets) {
    if (sets.negatives.size() != sets.negative_spec.size() ||
        sets.positives.size() != sets.positive_spec.size())
        throw InvalidArgument("evaluation sets and spec tags differ in length");
    for (std::size_t tag : sets.negative_spec)
        if (tag >= specs.size()) throw InvalidArgument("negative spec tag out of range");
    for (std::size_t tag : sets.positive_spec)
        if (tag >= specs.size()) throw InvalidArgument("positive spec tag out of range");

    // Integer counts reduced per fixed chunk, so the result is exact and
    // thread-count independent.
    auto count_satisfied = [&](const std::vector<std::vector<double>>& points,
                               const std::vector<std::size_t>& tags) {
        const std::size_t chunk = 256;
        const std::size_t n_chunks = points.empty() ? 0 : (points.size() + chunk - 1) / chunk;
        std::vector<std::size_t> partial(n_chunks, 0);
        parallel_chunks(points.size(), chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
            std::size_t hits = 0;
            for (std::size_t i = b; i < e; ++i)
                if (satisfies(specs[tags[i]].post, after.forward(points[i]))) ++hits;
            partial[c] = hits;
        });
        std::size_t total = 0;
        for (std::size_t h : partial) total += h;
        return total;
    };

    RepairReport report;
    report.eval_negatives = sets.negatives.size();
    report.eval_positives = sets.positives.size();
    if (sets.negatives.empty()) {
        report.improvement = 1.0;
    } else {
        std::size_t fixed = count_satisfied(sets.negatives, sets.negative_spec);
        report.improvement = static_cast<double>(fixed) / static_cast<double>(sets.negatives.size());
    }
    if (sets.positives.empty()) {
        report.drawdown = 0.0;
    } else {
        std::size_t kept = count_satisfied(sets.positives, sets.positive_spec);
        report.drawdown = static_cast<double>(sets.positives.size() - kept) /
                          static_cast<double>(sets.positives.size());
    }
    return report;
}

} // namespace netrepair

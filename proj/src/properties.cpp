#include "netrepair/properties.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace netrepair {

namespace {

bool atom_holds(const LinearAtom& atom, std::span<const double> y) {
    if (atom.coeffs.size() != y.size())
        throw ShapeError("output condition atom has " + std::to_string(atom.coeffs.size()) +
                         " coefficients for an output of width " + std::to_string(y.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        acc += atom.coeffs[i] * y[i];
    return atom.strict ? acc < atom.rhs : acc <= atom.rhs;
}

} // namespace

bool satisfies(const OutputCondition& post, std::span<const double> y) {
    if (post.clauses.empty())
        throw InvalidArgument("output condition has no clauses");
    for (const auto& clause : post.clauses) {
        bool all = true;
        for (const LinearAtom& atom : clause) {
            if (!atom_holds(atom, y)) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

bool InputDomain::contains(std::span<const double> x) const {
    if (x.size() != bounds.size())
        throw ShapeError("point has width " + std::to_string(x.size()) +
                         ", domain has " + std::to_string(bounds.size()));
    for (std::size_t i = 0; i < bounds.size(); ++i)
        if (x[i] < bounds[i].first || x[i] > bounds[i].second)
            return false;
    return true;
}

double InputDomain::widest_edge() const {
    double w = 0.0;
    for (const auto& [lb, ub] : bounds)
        if (ub - lb > w) w = ub - lb;
    return w;
}

void InputDomain::check_valid() const {
    if (bounds.empty()) throw InvalidArgument("input domain has no dimensions");
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        const auto& [lb, ub] = bounds[i];
        if (!(lb <= ub))
            throw InvalidArgument("domain dimension " + std::to_string(i) +
                                  " has lower bound above upper bound");
        if (!std::isfinite(lb) || !std::isfinite(ub))
            throw InvalidArgument("domain dimension " + std::to_string(i) + " is not finite");
    }
}

InputDomain delta_neighbourhood(const InputDomain& d, double delta,
                                const std::optional<InputDomain>& clamp) {
    if (delta < 0.0) throw InvalidArgument("delta must be nonnegative");
    InputDomain out = d;
    for (auto& [lb, ub] : out.bounds) {
        lb -= delta;
        ub += delta;
    }
    if (clamp) {
        if (clamp->dim() != out.dim())
            throw ShapeError("clamp box dimension mismatch");
        for (std::size_t i = 0; i < out.bounds.size(); ++i) {
            if (out.bounds[i].first < clamp->bounds[i].first)
                out.bounds[i].first = clamp->bounds[i].first;
            if (out.bounds[i].second > clamp->bounds[i].second)
                out.bounds[i].second = clamp->bounds[i].second;
        }
    }
    return out;
}

SampleClass classify_sample(const Network& net, const PropertySpec& spec,
                            std::span<const double> x) {
    if (!spec.pre.contains(x)) return SampleClass::OutsidePre;
    std::vector<double> y = net.forward(x);
    return satisfies(spec.post, y) ? SampleClass::Positive : SampleClass::Negative;
}

SpecSetVerdict spec_set_satisfied(const Network& net, const std::vector<PropertySpec>& specs,
                                  const std::vector<std::vector<std::vector<double>>>& evidence) {
    if (evidence.size() != specs.size())
        throw InvalidArgument("evidence list length must match spec list length");
    SpecSetVerdict verdict;
    verdict.per_spec.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        SpecVerdict sv;
        sv.spec_id = specs[i].id;
        for (const auto& point : evidence[i]) {
            SampleClass c = classify_sample(net, specs[i], point);
            if (c == SampleClass::OutsidePre) continue;
            ++sv.evidence_points;
            if (c == SampleClass::Negative) ++sv.counterexamples;
        }
        sv.satisfied = sv.counterexamples == 0;
        if (!sv.satisfied) verdict.satisfied = false;
        verdict.per_spec.push_back(std::move(sv));
    }
    return verdict;
}

namespace {

using nlohmann::json;

LinearAtom pairwise_atom(std::size_t plus, std::size_t minus, std::size_t n, bool strict) {
    LinearAtom a;
    a.coeffs.assign(n, 0.0);
    a.coeffs[plus] = 1.0;
    a.coeffs[minus] = -1.0;
    a.rhs = 0.0;
    a.strict = strict;
    return a;
}

std::size_t sugar_index(const json& j, const char* key, std::size_t n) {
    if (!j.at(key).is_number_integer())
        throw ParseError(std::string(key) + " index must be an integer");
    long i = j.at(key).get<long>();
    if (i < 0 || static_cast<std::size_t>(i) >= n)
        throw ParseError(std::string(key) + " index " + std::to_string(i) +
                         " out of range for " + std::to_string(n) + " outputs");
    return static_cast<std::size_t>(i);
}

// Expands one JSON clause (a conjunction that may contain disjunctive sugar)
// into plain conjunctions of linear atoms.
std::vector<std::vector<LinearAtom>> expand_clause(const json& clause, std::size_t n) {
    if (!clause.is_array())
        throw ParseError("each clause must be an array of atoms");
    std::vector<std::vector<LinearAtom>> result(1);
    for (const json& atom : clause) {
        if (!atom.is_object())
            throw ParseError("each atom must be a JSON object");
        if (atom.contains("coeffs")) {
            LinearAtom a;
            a.coeffs = atom.at("coeffs").get<std::vector<double>>();
            if (a.coeffs.size() != n)
                throw ParseError("atom has " + std::to_string(a.coeffs.size()) +
                                 " coefficients, network outputs " + std::to_string(n));
            a.rhs = atom.at("rhs").get<double>();
            a.strict = atom.value("strict", false);
            for (auto& c : result) c.push_back(a);
        } else if (atom.contains("argmin")) {
            std::size_t i = sugar_index(atom, "argmin", n);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i)
                    for (auto& c : result) c.push_back(pairwise_atom(i, j, n, false));
        } else if (atom.contains("argmax")) {
            std::size_t i = sugar_index(atom, "argmax", n);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i)
                    for (auto& c : result) c.push_back(pairwise_atom(j, i, n, false));
        } else if (atom.contains("not_argmin")) {
            // Some other output strictly below y_i: a disjunction, so the
            // clause splits into one copy per alternative.
            std::size_t i = sugar_index(atom, "not_argmin", n);
            std::vector<std::vector<LinearAtom>> multiplied;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                for (const auto& c : result) {
                    auto copy = c;
                    copy.push_back(pairwise_atom(j, i, n, true));
                    multiplied.push_back(std::move(copy));
                }
            }
            result = std::move(multiplied);
        } else {
            throw ParseError("atom must contain coeffs, argmin, argmax or not_argmin");
        }
    }
    return result;
}

PropertySpec property_from_json(const json& j, std::size_t output_dim) {
    if (!j.is_object()) throw ParseError("property must be a JSON object");
    PropertySpec spec;
    spec.id = j.value("id", std::string("unnamed"));

    const json& pre = j.at("pre");
    auto lower = pre.at("lower").get<std::vector<double>>();
    auto upper = pre.at("upper").get<std::vector<double>>();
    if (lower.size() != upper.size())
        throw ParseError("pre lower/upper arrays differ in length");
    spec.pre.bounds.reserve(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i)
        spec.pre.bounds.emplace_back(lower[i], upper[i]);
    spec.pre.check_valid();

    const json& post = j.at("post");
    const json& clauses = post.at("clauses");
    if (!clauses.is_array() || clauses.empty())
        throw ParseError("post needs a nonempty clauses array");
    for (const json& clause : clauses) {
        auto expanded = expand_clause(clause, output_dim);
        for (auto& c : expanded) spec.post.clauses.push_back(std::move(c));
    }
    if (spec.post.clauses.empty())
        throw ParseError("post condition expanded to no clauses (unsatisfiable sugar)");
    return spec;
}

std::vector<PropertySpec> properties_from_json(const json& j, std::size_t output_dim) {
    std::vector<PropertySpec> specs;
    if (j.is_array()) {
        for (const json& item : j) specs.push_back(property_from_json(item, output_dim));
    } else {
        specs.push_back(property_from_json(j, output_dim));
    }
    if (specs.empty()) throw ParseError("property file contains no specs");
    return specs;
}

json property_to_json_obj(const PropertySpec& spec) {
    json j;
    j["id"] = spec.id;
    json lower = json::array(), upper = json::array();
    for (const auto& [lb, ub] : spec.pre.bounds) {
        lower.push_back(lb);
        upper.push_back(ub);
    }
    j["pre"] = {{"lower", lower}, {"upper", upper}};
    json clauses = json::array();
    for (const auto& clause : spec.post.clauses) {
        json jc = json::array();
        for (const LinearAtom& a : clause)
            jc.push_back({{"coeffs", a.coeffs}, {"rhs", a.rhs}, {"strict", a.strict}});
        clauses.push_back(std::move(jc));
    }
    j["post"] = {{"clauses", clauses}};
    return j;
}

} // namespace

PropertySpec parse_property(const std::string& json_text, std::size_t output_dim) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid property JSON: ") + e.what());
    }
    try {
        return property_from_json(j, output_dim);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed property: ") + e.what());
    }
}

std::vector<PropertySpec> load_properties(const std::string& path, std::size_t output_dim) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open property file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
    try {
        return properties_from_json(j, output_dim);
    } catch (const json::exception& e) {
        throw ParseError(path + ": malformed property: " + e.what());
    }
}

std::string property_to_json(const PropertySpec& spec) {
    return property_to_json_obj(spec).dump(2);
}

void save_properties(const std::vector<PropertySpec>& specs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write property file '" + path + "'");
    if (specs.size() == 1) {
        out << property_to_json(specs[0]) << '\n';
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : specs) arr.push_back(nlohmann::json::parse(property_to_json(s)));
        out << arr.dump(2) << '\n';
    }
}

} // namespace netrepair

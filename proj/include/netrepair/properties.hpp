#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netrepair/network.hpp"

namespace netrepair {

// One linear inequality over the output vector: coeffs . y <= rhs,
// or strict < when `strict` is set.
struct LinearAtom {
    std::vector<double> coeffs;
    double rhs = 0.0;
    bool strict = false;
};

// Disjunction of conjunctions: the condition holds iff at least one clause
// has every atom satisfied.
struct OutputCondition {
    std::vector<std::vector<LinearAtom>> clauses;
};

bool satisfies(const OutputCondition& post, std::span<const double> y);

// Axis-aligned input box.
struct InputDomain {
    std::vector<std::pair<double, double>> bounds; // (lb, ub) per dimension

    std::size_t dim() const { return bounds.size(); }
    bool contains(std::span<const double> x) const;
    double widest_edge() const;
    void check_valid() const; // lb <= ub everywhere
};

// Enlarges the box by delta on every side, optionally intersected with a
// global clamp box.
InputDomain delta_neighbourhood(const InputDomain& d, double delta,
                                const std::optional<InputDomain>& clamp = std::nullopt);

struct PropertySpec {
    std::string id;
    InputDomain pre;
    OutputCondition post;
};

enum class SampleClass { Positive, Negative, OutsidePre };

SampleClass classify_sample(const Network& net, const PropertySpec& spec,
                            std::span<const double> x);

struct SpecVerdict {
    std::string spec_id;
    bool satisfied = true;
    std::size_t evidence_points = 0;
    std::size_t counterexamples = 0;
};

struct SpecSetVerdict {
    bool satisfied = true;
    std::vector<SpecVerdict> per_spec;
};

// Sampling-based verdict: the set holds iff no evidence point of any spec
// classifies Negative. evidence[i] belongs to specs[i]. Points outside a
// spec's pre box are ignored (they witness nothing).
SpecSetVerdict spec_set_satisfied(const Network& net, const std::vector<PropertySpec>& specs,
                                  const std::vector<std::vector<std::vector<double>>>& evidence);

// JSON property files:
//   {"id": "...", "pre": {"lower": [...], "upper": [...]},
//    "post": {"clauses": [[atom, ...], ...]}}
// where an atom is {"coeffs": [...], "rhs": r, "strict": bool} or one of the
// shorthands {"argmin": i}, {"argmax": i}, {"not_argmin": i}. Shorthands
// expand to pairwise linear atoms over `output_dim` outputs; not_argmin is a
// disjunction, so a clause containing it is multiplied into one clause per
// strict alternative. A file holds a single spec object or an array of them.
PropertySpec parse_property(const std::string& json_text, std::size_t output_dim);
std::vector<PropertySpec> load_properties(const std::string& path, std::size_t output_dim);
std::string property_to_json(const PropertySpec& spec);
void save_properties(const std::vector<PropertySpec>& specs, const std::string& path);

} // namespace netrepair

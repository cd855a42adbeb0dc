#pragma once

// JSON forms of compiled layers, metrics and refinement provenance.
// Rationals are written as "num/den" strings so a layer reloads bit-exactly.

#include <string>
#include <vector>

#include <json.hpp>

#include "drl/analysis.hpp"
#include "drl/compiler.hpp"
#include "drl/constraint_lang.hpp"
#include "drl/refiner.hpp"

namespace drl {

using Json = nlohmann::ordered_json;

struct LayerArtifact {
    CompiledLayer layer;
    VariableBinding binding;  // caller's variable order
    Rational epsilon;
};

// Constraints of the chain are written with variable names; `binding` names
// the layer's caller-side indices.
Json layer_to_json(const CompiledLayer& layer, const VariableBinding& binding, const Rational& epsilon);
std::string dump_layer(const CompiledLayer& layer, const VariableBinding& binding, const Rational& epsilon);

// Throws Error on malformed documents or inconsistent chains.
LayerArtifact layer_from_json(const Json& doc);
LayerArtifact load_layer(const std::string& text);

Json constraint_to_json(const Constraint& c, const std::vector<std::string>& names);

Json metrics_to_json(const MetricsReport& report);

// Snapped coordinates only: {row, var, action, source_constraint_index,
// source_disjunct_index}.
Json provenance_to_json(const std::vector<std::vector<Provenance>>& provenance, const VariableBinding& binding,
                        const CompiledLayer& layer);

// Ordering file: one variable name per line.
std::string ordering_to_text(std::span<const VarIndex> permutation, const VariableBinding& binding);
// Accepts names separated by newlines, commas or whitespace, or a JSON array
// of names. Throws Error on unknown, duplicate or missing names.
std::vector<VarIndex> ordering_from_text(const std::string& text, const VariableBinding& binding);

}  // namespace drl

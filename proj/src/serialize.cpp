#include "drl/serialize.hpp"

#include <algorithm>
#include <sstream>

#include "drl/errors.hpp"

namespace drl {

namespace {

Json inequality_to_json(const Inequality& ineq, const std::vector<std::string>& names) {
    Json coeffs = Json::object();
    for (const auto& t : ineq.expr().terms()) coeffs[names.at(t.var)] = to_fraction_string(t.coeff);
    return Json{{"coeffs", std::move(coeffs)}, {"bias", to_fraction_string(ineq.expr().bias())}};
}

Rational rational_field(const Json& j, const char* what) {
    if (!j.is_string()) throw Error(std::string("artifact: ") + what + " must be a \"num/den\" string");
    try {
        return parse_fraction_string(j.get<std::string>());
    } catch (const std::exception&) {
        throw Error(std::string("artifact: malformed rational in ") + what + ": " + j.get<std::string>());
    }
}

// Names -> position space.
Constraint constraint_from_json(const Json& j, const std::unordered_map<std::string, std::size_t>& position_of) {
    if (!j.is_object() || !j.contains("disjuncts") || !j["disjuncts"].is_array()) {
        throw Error("artifact: constraint needs a \"disjuncts\" array");
    }
    std::vector<Inequality> ds;
    for (const auto& d : j["disjuncts"]) {
        if (!d.is_object() || !d.contains("coeffs") || !d.contains("bias") || !d["coeffs"].is_object()) {
            throw Error("artifact: disjunct needs \"coeffs\" and \"bias\"");
        }
        LinearExpr e(rational_field(d["bias"], "bias"));
        for (const auto& [name, value] : d["coeffs"].items()) {
            auto it = position_of.find(name);
            if (it == position_of.end()) throw Error("artifact: unknown variable '" + name + "'");
            e += LinearExpr::variable(it->second, rational_field(value, "coeffs"));
        }
        ds.emplace_back(std::move(e));
    }
    auto c = Constraint::make(std::move(ds));
    if (!c) throw Error("artifact: constraint is a tautology");
    return *c;
}

}  // namespace

Json constraint_to_json(const Constraint& c, const std::vector<std::string>& names) {
    Json ds = Json::array();
    for (const auto& d : c.disjuncts()) ds.push_back(inequality_to_json(d, names));
    return Json{{"disjuncts", std::move(ds)}};
}

Json layer_to_json(const CompiledLayer& layer, const VariableBinding& binding, const Rational& epsilon) {
    if (binding.size() != layer.dimension()) {
        throw DimensionMismatch("binding has " + std::to_string(binding.size()) + " names, layer dimension is " +
                                std::to_string(layer.dimension()));
    }
    const std::size_t d = layer.dimension();
    std::vector<std::string> position_names(d);
    for (std::size_t p = 0; p < d; ++p) position_names[p] = binding.name(layer.ordering()[p]);

    Json doc;
    doc["variables"] = binding.names();
    doc["ordering"] = position_names;
    doc["epsilon"] = to_fraction_string(epsilon);
    Json chain = Json::array();
    if (layer.satisfiable()) {
        for (std::size_t p = 0; p < d; ++p) {
            Json cs = Json::array();
            for (const auto& c : layer.level(p + 1).constraints()) cs.push_back(constraint_to_json(c, position_names));
            chain.push_back(Json{{"var", position_names[p]}, {"constraints", std::move(cs)}});
        }
    }
    doc["chain"] = std::move(chain);
    doc["verdict"] = layer.satisfiable() ? "sat" : "unsat";
    doc["unsat_witness"] =
        layer.unsat_witness() ? constraint_to_json(*layer.unsat_witness(), position_names) : Json(nullptr);
    return doc;
}

std::string dump_layer(const CompiledLayer& layer, const VariableBinding& binding, const Rational& epsilon) {
    return layer_to_json(layer, binding, epsilon).dump(2) + "\n";
}

LayerArtifact layer_from_json(const Json& doc) {
    auto names_of = [&](const char* key) {
        if (!doc.contains(key) || !doc[key].is_array()) throw Error(std::string("artifact: missing \"") + key + "\"");
        std::vector<std::string> out;
        for (const auto& n : doc[key]) {
            if (!n.is_string()) throw Error(std::string("artifact: \"") + key + "\" must list names");
            out.push_back(n.get<std::string>());
        }
        return out;
    };
    const auto ordering_names = names_of("ordering");
    const auto variables = doc.contains("variables") ? names_of("variables") : ordering_names;
    {
        auto a = ordering_names;
        auto b = variables;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b || std::adjacent_find(a.begin(), a.end()) != a.end()) {
            throw Error("artifact: \"ordering\" must be a permutation of \"variables\"");
        }
    }
    VariableBinding binding(variables, VariableBinding::Source::declared);
    const std::size_t d = variables.size();
    std::vector<VarIndex> ordering(d);
    std::unordered_map<std::string, std::size_t> position_of;
    for (std::size_t p = 0; p < d; ++p) {
        ordering[p] = *binding.find(ordering_names[p]);
        position_of[ordering_names[p]] = p;
    }

    if (!doc.contains("verdict") || !doc["verdict"].is_string()) throw Error("artifact: missing \"verdict\"");
    const std::string verdict = doc["verdict"].get<std::string>();
    if (verdict != "sat" && verdict != "unsat") throw Error("artifact: verdict must be \"sat\" or \"unsat\"");
    const Rational epsilon = doc.contains("epsilon") ? rational_field(doc["epsilon"], "epsilon") : Rational(0);

    if (verdict == "unsat") {
        if (!doc.contains("unsat_witness") || doc["unsat_witness"].is_null()) {
            throw Error("artifact: unsat layer without witness");
        }
        Constraint w = constraint_from_json(doc["unsat_witness"], position_of);
        return {CompiledLayer(ordering, {}, Verdict::unsat, w), binding, epsilon};
    }

    if (!doc.contains("chain") || !doc["chain"].is_array() || doc["chain"].size() != d) {
        throw Error("artifact: chain must have one entry per variable");
    }
    std::vector<ConstraintSet> levels;
    levels.emplace_back(d);  // Pi_0: nothing survives on a satisfiable layer
    for (std::size_t p = 0; p < d; ++p) {
        const Json& entry = doc["chain"][p];
        if (!entry.contains("var") || entry["var"] != ordering_names[p]) {
            throw Error("artifact: chain entry " + std::to_string(p) + " must be for '" + ordering_names[p] + "'");
        }
        if (!entry.contains("constraints") || !entry["constraints"].is_array()) {
            throw Error("artifact: chain entry needs a \"constraints\" array");
        }
        ConstraintSet level(d);
        for (const auto& c : entry["constraints"]) {
            if (!level.add(constraint_from_json(c, position_of))) throw Error("artifact: duplicate constraint");
        }
        levels.push_back(std::move(level));
    }
    try {
        return {CompiledLayer(ordering, std::move(levels), Verdict::sat, std::nullopt), binding, epsilon};
    } catch (const std::invalid_argument& e) {
        throw Error(std::string("artifact: ") + e.what());
    }
}

LayerArtifact load_layer(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(std::string("artifact: ") + e.what());
    }
    return layer_from_json(doc);
}

Json metrics_to_json(const MetricsReport& report) {
    return Json{{"cvr", report.cvr},
                {"scvc", report.scvc},
                {"cvc", report.cvc},
                {"n_rows", report.n_rows},
                {"n_constraints", report.n_constraints},
                {"violating_rows", report.violating_rows},
                {"per_constraint_violation_counts", report.per_constraint_violation_counts}};
}

Json provenance_to_json(const std::vector<std::vector<Provenance>>& provenance, const VariableBinding& binding,
                        const CompiledLayer& layer) {
    Json out = Json::array();
    for (std::size_t r = 0; r < provenance.size(); ++r) {
        for (std::size_t v = 0; v < provenance[r].size(); ++v) {
            const Provenance& p = provenance[r][v];
            if (p.action != Action::snapped_left && p.action != Action::snapped_right) continue;
            out.push_back(Json{{"row", r},
                               {"var", binding.name(v)},
                               {"action", to_string(p.action)},
                               {"position", layer.positions()[v]},
                               {"source_constraint_index", *p.source_constraint},
                               {"source_disjunct_index", *p.source_disjunct}});
        }
    }
    return out;
}

std::string ordering_to_text(std::span<const VarIndex> permutation, const VariableBinding& binding) {
    std::string out;
    for (VarIndex v : permutation) out += binding.name(v) + "\n";
    return out;
}

std::vector<VarIndex> ordering_from_text(const std::string& text, const VariableBinding& binding) {
    std::vector<std::string> names;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            for (const auto& n : Json::parse(text)) names.push_back(n.get<std::string>());
        } catch (const std::exception& e) {
            throw Error(std::string("ordering: ") + e.what());
        }
    } else {
        std::string cur;
        for (char ch : text + "\n") {
            if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
                if (!cur.empty()) names.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
    }
    std::vector<VarIndex> out;
    std::vector<bool> seen(binding.size(), false);
    for (const auto& n : names) {
        auto v = binding.find(n);
        if (!v) throw Error("ordering: unknown variable '" + n + "'");
        if (seen[*v]) throw Error("ordering: variable '" + n + "' listed twice");
        seen[*v] = true;
        out.push_back(*v);
    }
    if (out.size() != binding.size()) {
        for (std::size_t v = 0; v < binding.size(); ++v) {
            if (!seen[v]) throw Error("ordering: variable '" + binding.name(v) + "' missing");
        }
    }
    return out;
}

}  // namespace drl

#pragma once

// Constraint DSL: one formula per line, '#' comments, optional
// "vars: a, b, c" header. Formulas are boolean combinations of linear
// comparisons; normalize() turns them into conjunctions of disjunctions of
// canonical ">= 0" inequalities.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drl/algebra.hpp"

namespace drl {

class VariableBinding {
public:
    enum class Source { declared, csv_header, inferred };

    // Empty binding that grows as identifiers are met (Source::inferred).
    VariableBinding() = default;
    VariableBinding(std::vector<std::string> names, Source source);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(VarIndex i) const { return names_.at(i); }
    Source source() const noexcept { return source_; }

    std::optional<VarIndex> find(std::string_view name) const;
    // Looks up name, appending it first when the binding is inferred.
    std::optional<VarIndex> resolve(std::string_view name);

    friend bool operator==(const VariableBinding& a, const VariableBinding& b) {
        return a.names_ == b.names_;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, VarIndex> index_;
    Source source_ = Source::inferred;
};

enum class Comparator { ge, le, gt, lt, eq, ne };

struct SourcePos {
    std::size_t line = 0;
    std::size_t column = 0;
};

struct Formula {
    enum class Kind { atom, negation, conjunction, disjunction, implication };

    Kind kind = Kind::atom;
    SourcePos pos;
    // atom
    LinearExpr lhs;
    Comparator cmp = Comparator::ge;
    LinearExpr rhs;
    // negation: one child; implication: {lhs, rhs}; conjunction/disjunction: >= 2
    std::vector<Formula> children;

    static Formula atom(LinearExpr lhs, Comparator cmp, LinearExpr rhs, SourcePos pos = {});
    static Formula negation(Formula child, SourcePos pos = {});
    static Formula conjunction(std::vector<Formula> children, SourcePos pos = {});
    static Formula disjunction(std::vector<Formula> children, SourcePos pos = {});
    static Formula implication(Formula lhs, Formula rhs, SourcePos pos = {});

    // Structural equality, ignoring source positions.
    friend bool operator==(const Formula& a, const Formula& b);

    // Truth value at sample with strict comparators evaluated strictly.
    bool holds(std::span<const double> sample) const;
};

struct ParsedFormula {
    Formula ast;
    std::size_t line = 0;
    std::string text;
};

// Parses a constraint file. A "vars:" header replaces binding with the
// declared names; otherwise identifiers resolve through binding (growing it
// when it is inferred). Throws ParseError.
std::vector<ParsedFormula> parse(std::string_view text, VariableBinding& binding);

// Parses one formula (no header, no comments) against binding.
Formula parse_formula(std::string_view text, VariableBinding& binding, std::size_t line = 1);

struct NormalizationConfig {
    Rational epsilon{1, 1000000};
    std::size_t max_clauses = 10000;
};

// CNF by distribution; strict comparisons and negated atoms get the epsilon
// slack. Throws BudgetExceeded when a formula needs more than max_clauses
// clauses at any point of the distribution.
ConstraintSet normalize(const Formula& ast, std::size_t dimension, const NormalizationConfig& cfg);

// Union of the normalized formulas, deduplicated and subsumption-pruned.
ConstraintSet normalize(const std::vector<ParsedFormula>& formulas, std::size_t dimension,
                        const NormalizationConfig& cfg);

// One DSL line per constraint; coefficients are scaled to integers so that
// every rational prints as a plain literal.
std::string roundtrip_print(const ConstraintSet& set, const VariableBinding& binding);
std::string to_dsl(const Constraint& constraint, const VariableBinding& binding);
std::string to_dsl(const Inequality& ineq, const VariableBinding& binding);

}  // namespace drl

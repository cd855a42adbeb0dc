#pragma once

// Shorthands for building constraints in tests.

#include <algorithm>
#include <string>
#include <vector>

#include "drl/algebra.hpp"
#include "drl/constraint_lang.hpp"

namespace drl::testing {

inline LinearExpr var(VarIndex i, const Rational& c = 1) { return LinearExpr::variable(i, c); }
inline LinearExpr constant(const Rational& c) { return LinearExpr(c); }
inline Inequality ge0(LinearExpr e) { return Inequality(std::move(e)); }

inline Constraint clause(std::vector<Inequality> disjuncts) { return *Constraint::make(std::move(disjuncts)); }

inline ConstraintSet set_of(std::size_t dimension, std::vector<Constraint> constraints) {
    ConstraintSet s(dimension);
    for (auto& c : constraints) s.add(std::move(c));
    return s;
}

inline ConstraintSet sorted(ConstraintSet s) {
    s.sort();
    return s;
}

// Parses and normalizes DSL text; binding is grown or replaced by a header.
inline ConstraintSet dsl(const std::string& text, VariableBinding& binding, const NormalizationConfig& cfg = {}) {
    const auto formulas = parse(text, binding);
    return normalize(formulas, binding.size(), cfg);
}

inline const char* example3_text() {
    return "vars: x1, x2, x3, x4, x5\n"
           "x5 >= x1\n"
           "(x5 > x2) -> (x5 >= x3)\n"
           "x5 <= x4\n";
}

// Psi1 = x5 - x1 >= 0, Psi2 = (x2 - x5 >= 0) or (x5 - x3 >= 0), Psi3 = x4 - x5 >= 0
// with 0-based indices.
inline Constraint psi1() { return clause({ge0(var(4) - var(0))}); }
inline Constraint psi2() { return clause({ge0(var(1) - var(4)), ge0(var(4) - var(2))}); }
inline Constraint psi3() { return clause({ge0(var(3) - var(4))}); }
inline ConstraintSet example3() { return set_of(5, {psi1(), psi2(), psi3()}); }

}  // namespace drl::testing

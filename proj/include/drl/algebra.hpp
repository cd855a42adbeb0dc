#pragma once

// Exact linear expressions, canonical inequalities and disjunctive
// constraints. Variables are 0-based indices into the record; a constraint
// set of dimension D only mentions indices < D.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "drl/rational.hpp"

namespace drl {

using VarIndex = std::size_t;

class LinearExpr {
public:
    struct Term {
        VarIndex var;
        Rational coeff;
    };

    LinearExpr() = default;
    explicit LinearExpr(Rational bias) : bias_(std::move(bias)) {}

    static LinearExpr variable(VarIndex var, const Rational& coeff = 1);

    // Terms sorted by variable index; no zero coefficients.
    const std::vector<Term>& terms() const noexcept { return terms_; }
    const Rational& bias() const noexcept { return bias_; }

    Rational coefficient(VarIndex var) const;
    bool is_constant() const noexcept { return terms_.empty(); }
    std::optional<VarIndex> max_variable() const;

    // The expression with var's term removed.
    LinearExpr without(VarIndex var) const;
    // Renumbers variables; mapping[old] = new.
    LinearExpr remapped(std::span<const VarIndex> mapping) const;

    LinearExpr& operator+=(const LinearExpr& other);
    LinearExpr& operator-=(const LinearExpr& other);
    LinearExpr& operator*=(const Rational& factor);
    LinearExpr& operator/=(const Rational& divisor);

    friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
    friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
    friend LinearExpr operator*(LinearExpr a, const Rational& f) { return a *= f; }
    friend LinearExpr operator/(LinearExpr a, const Rational& d) { return a /= d; }
    friend LinearExpr operator-(LinearExpr a) { return a *= Rational(-1); }

    friend bool operator==(const LinearExpr& a, const LinearExpr& b);
    friend std::strong_ordering operator<=>(const LinearExpr& a, const LinearExpr& b);

private:
    LinearExpr& add_scaled(const LinearExpr& other, const Rational& scale);

    std::vector<Term> terms_;
    Rational bias_;
};

enum class Occurrence { positive, negative, absent };

// expr >= 0, scaled so that the coefficient of the smallest variable index is
// +-1, or, for constant inequalities, so that the bias is in {-1, 0, 1}.
class Inequality {
public:
    explicit Inequality(LinearExpr expr);

    // The canonical contradiction -1 >= 0.
    static Inequality contradiction();

    const LinearExpr& expr() const noexcept { return expr_; }
    bool is_constant() const noexcept { return expr_.is_constant(); }
    bool is_tautology() const noexcept { return is_constant() && sgn(expr_.bias()) >= 0; }
    bool is_contradiction() const noexcept { return is_constant() && sgn(expr_.bias()) < 0; }

    Occurrence occurrence(VarIndex var) const;

    friend bool operator==(const Inequality& a, const Inequality& b) = default;
    friend std::strong_ordering operator<=>(const Inequality& a, const Inequality& b) {
        return a.expr_ <=> b.expr_;
    }

private:
    LinearExpr expr_;
};

// Equal variable coefficients; the biases may differ.
bool same_direction(const Inequality& a, const Inequality& b);

inline Occurrence occurrence_sign(const Inequality& ineq, VarIndex var) {
    return ineq.occurrence(var);
}

// A disjunction of inequalities. Constant-false disjuncts are dropped, and so
// are disjuncts implied by a parallel one; a disjunction with nothing left is
// the canonical contradiction {-1 >= 0}.
// Valid disjunctions are not representable: make() returns nullopt for them.
class Constraint {
public:
    static std::optional<Constraint> make(std::vector<Inequality> disjuncts);
    static Constraint contradiction();

    std::span<const Inequality> disjuncts() const noexcept { return disjuncts_; }
    std::size_t size() const noexcept { return disjuncts_.size(); }
    bool is_contradiction() const;

    bool mentions(VarIndex var) const;
    bool has_positive(VarIndex var) const;
    bool has_negative(VarIndex var) const;
    std::optional<VarIndex> max_variable() const;

    // True when every disjunct of *this is also a disjunct of other.
    bool subset_of(const Constraint& other) const;
    // True when every disjunct of *this implies a parallel disjunct of other
    // with the same direction and a bias at least as large; then *this entails
    // other.
    bool subsumes(const Constraint& other) const;

    Constraint remapped(std::span<const VarIndex> mapping) const;

    friend bool operator==(const Constraint& a, const Constraint& b) = default;
    friend std::strong_ordering operator<=>(const Constraint& a, const Constraint& b);

private:
    explicit Constraint(std::vector<Inequality> disjuncts) : disjuncts_(std::move(disjuncts)) {}

    std::vector<Inequality> disjuncts_;  // sorted, unique
};

// A conjunction of constraints over variables 0..dimension-1. Insertion order
// is preserved (indices are reported back to users); duplicates are rejected.
class ConstraintSet {
public:
    explicit ConstraintSet(std::size_t dimension = 0) : dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }
    std::span<const Constraint> constraints() const noexcept { return constraints_; }
    std::size_t size() const noexcept { return constraints_.size(); }
    bool empty() const noexcept { return constraints_.empty(); }
    const Constraint& operator[](std::size_t i) const { return constraints_[i]; }

    // Returns false if an equal constraint is already present. Throws
    // DimensionMismatch on out-of-range variables.
    bool add(Constraint constraint);

    // Drops every constraint subsumed by another one of the set.
    void prune_subsumed();
    void sort();

    ConstraintSet remapped(std::span<const VarIndex> mapping) const;

    friend bool operator==(const ConstraintSet& a, const ConstraintSet& b) = default;

private:
    std::size_t dimension_;
    std::vector<Constraint> constraints_;
};

// Sum of coeff * sample[var] + bias, accumulated in extended precision.
double evaluate(const LinearExpr& expr, std::span<const double> sample);

// Result of binding all but (at most) one variable of a constraint.
struct PartialConstraint {
    // w * x + offset >= 0, w != 0
    struct Univariate {
        double coeff;
        double offset;
    };

    bool trivially_true = false;
    std::optional<VarIndex> free_var;
    std::vector<Univariate> disjuncts;

    // No disjunct left and not trivially true: constant false.
    bool trivially_false() const { return !trivially_true && disjuncts.empty(); }
};

using Bindings = std::map<VarIndex, double>;

// Disjuncts that become variable-free are judged with tolerance tol: value >=
// -tol is constant-true. Throws if more than one variable of the constraint is
// unbound, or if free_var is given and bound.
PartialConstraint substitute(const Constraint& constraint, const Bindings& bindings, double tol,
                             std::optional<VarIndex> free_var = std::nullopt);

struct SatisfactionReport {
    bool satisfied = true;
    std::vector<bool> per_constraint;
};

SatisfactionReport satisfies(const ConstraintSet& set, std::span<const double> sample, double tol);

// Floating-point snapshot of a constraint set for repeated evaluation.
class SetEvaluator {
public:
    explicit SetEvaluator(const ConstraintSet& set);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return constraints_.size(); }

    bool constraint_satisfied(std::size_t index, std::span<const double> sample, double tol) const;
    bool all_satisfied(std::span<const double> sample, double tol) const;

private:
    struct Disjunct {
        std::vector<std::pair<VarIndex, long double>> terms;
        long double bias;
    };

    std::size_t dimension_;
    std::vector<std::vector<Disjunct>> constraints_;
};

}  // namespace drl

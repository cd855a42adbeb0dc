#include "drl/algebra.hpp"

#include <algorithm>
#include <string>

#include "drl/errors.hpp"

namespace drl {

// ---------------------------------------------------------------- LinearExpr

LinearExpr LinearExpr::variable(VarIndex var, const Rational& coeff) {
    LinearExpr e;
    if (sgn(coeff) != 0) e.terms_.push_back({var, coeff});
    return e;
}

Rational LinearExpr::coefficient(VarIndex var) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), var,
                               [](const Term& t, VarIndex v) { return t.var < v; });
    if (it != terms_.end() && it->var == var) return it->coeff;
    return 0;
}

std::optional<VarIndex> LinearExpr::max_variable() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.back().var;
}

LinearExpr LinearExpr::without(VarIndex var) const {
    LinearExpr e;
    e.bias_ = bias_;
    e.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
        if (t.var != var) e.terms_.push_back(t);
    }
    return e;
}

LinearExpr LinearExpr::remapped(std::span<const VarIndex> mapping) const {
    LinearExpr e;
    e.bias_ = bias_;
    e.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
        if (t.var >= mapping.size()) {
            throw DimensionMismatch("variable index " + std::to_string(t.var) +
                                    " outside remapping of size " + std::to_string(mapping.size()));
        }
        e.terms_.push_back({mapping[t.var], t.coeff});
    }
    std::sort(e.terms_.begin(), e.terms_.end(),
              [](const Term& a, const Term& b) { return a.var < b.var; });
    return e;
}

LinearExpr& LinearExpr::add_scaled(const LinearExpr& other, const Rational& scale) {
    std::vector<Term> merged;
    merged.reserve(terms_.size() + other.terms_.size());
    auto a = terms_.begin();
    auto b = other.terms_.begin();
    while (a != terms_.end() || b != other.terms_.end()) {
        if (b == other.terms_.end() || (a != terms_.end() && a->var < b->var)) {
            merged.push_back(std::move(*a++));
        } else if (a == terms_.end() || b->var < a->var) {
            merged.push_back({b->var, b->coeff * scale});
            ++b;
        } else {
            Rational sum = a->coeff + b->coeff * scale;
            if (sgn(sum) != 0) merged.push_back({a->var, std::move(sum)});
            ++a;
            ++b;
        }
    }
    terms_ = std::move(merged);
    bias_ += other.bias_ * scale;
    return *this;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) { return add_scaled(other, 1); }

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) { return add_scaled(other, -1); }

LinearExpr& LinearExpr::operator*=(const Rational& factor) {
    if (sgn(factor) == 0) {
        terms_.clear();
        bias_ = 0;
        return *this;
    }
    for (auto& t : terms_) t.coeff *= factor;
    bias_ *= factor;
    return *this;
}

LinearExpr& LinearExpr::operator/=(const Rational& divisor) {
    if (sgn(divisor) == 0) throw std::domain_error("division of linear expression by zero");
    for (auto& t : terms_) t.coeff /= divisor;
    bias_ /= divisor;
    return *this;
}

bool operator==(const LinearExpr& a, const LinearExpr& b) {
    if (a.terms_.size() != b.terms_.size() || a.bias_ != b.bias_) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
        if (a.terms_[i].var != b.terms_[i].var || a.terms_[i].coeff != b.terms_[i].coeff) {
            return false;
        }
    }
    return true;
}

std::strong_ordering operator<=>(const LinearExpr& a, const LinearExpr& b) {
    const std::size_t n = std::min(a.terms_.size(), b.terms_.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (auto c = a.terms_[i].var <=> b.terms_[i].var; c != 0) return c;
        if (auto c = compare(a.terms_[i].coeff, b.terms_[i].coeff); c != 0) return c;
    }
    if (auto c = a.terms_.size() <=> b.terms_.size(); c != 0) return c;
    return compare(a.bias_, b.bias_);
}

// ---------------------------------------------------------------- Inequality

Inequality::Inequality(LinearExpr expr) : expr_(std::move(expr)) {
    Rational scale;
    if (!expr_.terms().empty()) {
        scale = abs(expr_.terms().front().coeff);
    } else {
        scale = abs(expr_.bias());
    }
    if (sgn(scale) != 0 && scale != 1) expr_ /= scale;
}

Inequality Inequality::contradiction() { return Inequality(LinearExpr(Rational(-1))); }

Occurrence Inequality::occurrence(VarIndex var) const {
    const int s = sgn(expr_.coefficient(var));
    if (s > 0) return Occurrence::positive;
    if (s < 0) return Occurrence::negative;
    return Occurrence::absent;
}

// ---------------------------------------------------------------- Constraint

namespace {

// a || b covers every point: opposite coefficient vectors and a.bias + b.bias >= 0.
bool complementary(const Inequality& a, const Inequality& b) {
    const auto& ta = a.expr().terms();
    const auto& tb = b.expr().terms();
    if (ta.empty() || ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i].var != tb[i].var || ta[i].coeff != -tb[i].coeff) return false;
    }
    return sgn(a.expr().bias() + b.expr().bias()) >= 0;
}

}  // namespace

bool same_direction(const Inequality& a, const Inequality& b) {
    const auto& ta = a.expr().terms();
    const auto& tb = b.expr().terms();
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i].var != tb[i].var || ta[i].coeff != tb[i].coeff) return false;
    }
    return true;
}

std::optional<Constraint> Constraint::make(std::vector<Inequality> disjuncts) {
    std::vector<Inequality> kept;
    kept.reserve(disjuncts.size());
    for (auto& d : disjuncts) {
        if (d.is_tautology()) return std::nullopt;
        if (!d.is_contradiction()) kept.push_back(std::move(d));
    }
    if (kept.empty()) return contradiction();

    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    // Of parallel disjuncts with the same direction only the weakest (largest
    // bias, hence last in sort order) matters.
    std::vector<Inequality> weakest;
    weakest.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i + 1 < kept.size() && same_direction(kept[i], kept[i + 1])) continue;
        weakest.push_back(std::move(kept[i]));
    }
    kept = std::move(weakest);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        // Opposite leading signs only; canonical leading coefficients are +-1.
        if (sgn(kept[i].expr().terms().front().coeff) > 0) continue;
        for (std::size_t j = 0; j < kept.size(); ++j) {
            if (i != j && complementary(kept[i], kept[j])) return std::nullopt;
        }
    }
    return Constraint(std::move(kept));
}

Constraint Constraint::contradiction() { return Constraint({Inequality::contradiction()}); }

bool Constraint::is_contradiction() const {
    return disjuncts_.size() == 1 && disjuncts_.front().is_contradiction();
}

bool Constraint::mentions(VarIndex var) const {
    return std::any_of(disjuncts_.begin(), disjuncts_.end(),
                       [&](const Inequality& d) { return d.occurrence(var) != Occurrence::absent; });
}

bool Constraint::has_positive(VarIndex var) const {
    return std::any_of(disjuncts_.begin(), disjuncts_.end(),
                       [&](const Inequality& d) { return d.occurrence(var) == Occurrence::positive; });
}

bool Constraint::has_negative(VarIndex var) const {
    return std::any_of(disjuncts_.begin(), disjuncts_.end(),
                       [&](const Inequality& d) { return d.occurrence(var) == Occurrence::negative; });
}

std::optional<VarIndex> Constraint::max_variable() const {
    std::optional<VarIndex> result;
    for (const auto& d : disjuncts_) {
        if (auto v = d.expr().max_variable(); v && (!result || *v > *result)) result = v;
    }
    return result;
}

bool Constraint::subset_of(const Constraint& other) const {
    return std::includes(other.disjuncts_.begin(), other.disjuncts_.end(), disjuncts_.begin(),
                         disjuncts_.end());
}

bool Constraint::subsumes(const Constraint& other) const {
    return std::all_of(disjuncts_.begin(), disjuncts_.end(), [&](const Inequality& d) {
        return std::any_of(other.disjuncts_.begin(), other.disjuncts_.end(), [&](const Inequality& o) {
            return same_direction(d, o) && cmp(o.expr().bias(), d.expr().bias()) >= 0;
        });
    });
}

Constraint Constraint::remapped(std::span<const VarIndex> mapping) const {
    std::vector<Inequality> ds;
    ds.reserve(disjuncts_.size());
    for (const auto& d : disjuncts_) ds.emplace_back(d.expr().remapped(mapping));
    // Remapping is a bijection on variables, so no disjunct becomes valid.
    return *make(std::move(ds));
}

std::strong_ordering operator<=>(const Constraint& a, const Constraint& b) {
    return std::lexicographical_compare_three_way(a.disjuncts_.begin(), a.disjuncts_.end(),
                                                  b.disjuncts_.begin(), b.disjuncts_.end());
}

// ------------------------------------------------------------- ConstraintSet

bool ConstraintSet::add(Constraint constraint) {
    if (auto v = constraint.max_variable(); v && *v >= dimension_) {
        throw DimensionMismatch("constraint mentions variable " + std::to_string(*v) +
                                " but the set has dimension " + std::to_string(dimension_));
    }
    if (std::find(constraints_.begin(), constraints_.end(), constraint) != constraints_.end()) {
        return false;
    }
    constraints_.push_back(std::move(constraint));
    return true;
}

void ConstraintSet::prune_subsumed() {
    std::vector<bool> drop(constraints_.size(), false);
    for (std::size_t a = 0; a < constraints_.size(); ++a) {
        for (std::size_t b = 0; b < constraints_.size() && !drop[a]; ++b) {
            if (a == b || drop[b]) continue;
            if (constraints_[b].subsumes(constraints_[a])) drop[a] = true;
        }
    }
    std::vector<Constraint> kept;
    kept.reserve(constraints_.size());
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        if (!drop[i]) kept.push_back(std::move(constraints_[i]));
    }
    constraints_ = std::move(kept);
}

void ConstraintSet::sort() { std::sort(constraints_.begin(), constraints_.end()); }

ConstraintSet ConstraintSet::remapped(std::span<const VarIndex> mapping) const {
    ConstraintSet result(dimension_);
    for (const auto& c : constraints_) result.add(c.remapped(mapping));
    return result;
}

// ---------------------------------------------------------------- evaluation

double evaluate(const LinearExpr& expr, std::span<const double> sample) {
    long double acc = 0;
    for (const auto& t : expr.terms()) {
        if (t.var >= sample.size()) {
            throw DimensionMismatch("expression mentions variable " + std::to_string(t.var) +
                                    " but the sample has dimension " +
                                    std::to_string(sample.size()));
        }
        acc += to_long_double(t.coeff) * static_cast<long double>(sample[t.var]);
    }
    acc += to_long_double(expr.bias());
    return static_cast<double>(acc);
}

PartialConstraint substitute(const Constraint& constraint, const Bindings& bindings, double tol,
                             std::optional<VarIndex> free_var) {
    if (free_var && bindings.contains(*free_var)) {
        throw std::invalid_argument("binding touches variable " + std::to_string(*free_var) +
                                    " which must remain free");
    }
    PartialConstraint result;
    result.free_var = free_var;
    for (const auto& d : constraint.disjuncts()) {
        long double offset = to_long_double(d.expr().bias());
        std::optional<Rational> coeff;
        for (const auto& t : d.expr().terms()) {
            if (auto it = bindings.find(t.var); it != bindings.end()) {
                offset += to_long_double(t.coeff) * static_cast<long double>(it->second);
                continue;
            }
            if (result.free_var && *result.free_var != t.var) {
                throw std::invalid_argument("substitution leaves variables " +
                                            std::to_string(*result.free_var) + " and " +
                                            std::to_string(t.var) + " unbound");
            }
            result.free_var = t.var;
            coeff = t.coeff;
        }
        if (!coeff) {
            if (static_cast<double>(offset) >= -tol) {
                result.trivially_true = true;
                result.disjuncts.clear();
                return result;
            }
            continue;
        }
        result.disjuncts.push_back({coeff->get_d(), static_cast<double>(offset)});
    }
    return result;
}

SatisfactionReport satisfies(const ConstraintSet& set, std::span<const double> sample, double tol) {
    if (sample.size() != set.dimension()) {
        throw DimensionMismatch("sample has dimension " + std::to_string(sample.size()) +
                                ", constraint set has dimension " +
                                std::to_string(set.dimension()));
    }
    SatisfactionReport report;
    report.per_constraint.reserve(set.size());
    for (const auto& c : set.constraints()) {
        const bool ok = std::any_of(c.disjuncts().begin(), c.disjuncts().end(),
                                    [&](const Inequality& d) { return evaluate(d.expr(), sample) >= -tol; });
        report.per_constraint.push_back(ok);
        report.satisfied = report.satisfied && ok;
    }
    return report;
}

SetEvaluator::SetEvaluator(const ConstraintSet& set) : dimension_(set.dimension()) {
    constraints_.reserve(set.size());
    for (const auto& c : set.constraints()) {
        std::vector<Disjunct> ds;
        for (const auto& d : c.disjuncts()) {
            Disjunct nd;
            nd.bias = to_long_double(d.expr().bias());
            for (const auto& t : d.expr().terms()) nd.terms.emplace_back(t.var, to_long_double(t.coeff));
            ds.push_back(std::move(nd));
        }
        constraints_.push_back(std::move(ds));
    }
}

bool SetEvaluator::constraint_satisfied(std::size_t index, std::span<const double> sample,
                                        double tol) const {
    for (const auto& d : constraints_[index]) {
        long double acc = 0;
        for (const auto& [var, coeff] : d.terms) acc += coeff * static_cast<long double>(sample[var]);
        acc += d.bias;
        if (static_cast<double>(acc) >= -tol) return true;
    }
    return false;
}

bool SetEvaluator::all_satisfied(std::span<const double> sample, double tol) const {
    if (sample.size() != dimension_) {
        throw DimensionMismatch("sample has dimension " + std::to_string(sample.size()) +
                                ", expected " + std::to_string(dimension_));
    }
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        if (!constraint_satisfied(i, sample, tol)) return false;
    }
    return true;
}

}  // namespace drl

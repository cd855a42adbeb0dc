#include "drl/compiler.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "drl/errors.hpp"
#include "drl/validity.hpp"

namespace drl {

void ResolventBudget::charge(std::size_t n) {
    used_ += n;
    if (used_ > limit_) {
        throw BudgetExceeded("resolvent budget of " + std::to_string(limit_) +
                             " exceeded during compilation");
    }
}

namespace {

// Clauses inside the compiler are vectors of interned inequality ids, sorted
// by direction (the coefficient vector) with at most one id per direction.
using Id = std::uint32_t;
using Clause = std::vector<Id>;

class Pool {
public:
    Id intern(Inequality ineq) {
        auto [it, inserted] = index_.try_emplace(std::move(ineq), static_cast<Id>(items_.size()));
        if (inserted) {
            LinearExpr dir = it->first.expr();
            dir -= LinearExpr(dir.bias());
            auto [d, fresh] = directions_.try_emplace(std::move(dir), static_cast<Id>(directions_.size()));
            (void)fresh;
            items_.push_back(&it->first);
            direction_.push_back(d->second);
        }
        return it->second;
    }

    const Inequality& operator[](Id id) const { return *items_[id]; }
    Id direction(Id id) const { return direction_[id]; }
    const Rational& bias(Id id) const { return items_[id]->expr().bias(); }
    std::size_t size() const noexcept { return items_.size(); }

    // Sorts by direction and keeps the weakest id of each direction.
    void normalize(Clause& c) const {
        std::sort(c.begin(), c.end(), [&](Id a, Id b) {
            if (direction_[a] != direction_[b]) return direction_[a] < direction_[b];
            return cmp(bias(a), bias(b)) > 0;
        });
        c.erase(std::unique(c.begin(), c.end(), [&](Id a, Id b) { return direction_[a] == direction_[b]; }),
                c.end());
    }

    // Every literal of a implies the literal of b with the same direction.
    bool entails(const Clause& a, const Clause& b) const {
        if (a.size() > b.size()) return false;
        std::size_t j = 0;
        for (Id x : a) {
            while (j < b.size() && direction_[b[j]] < direction_[x]) ++j;
            if (j == b.size() || direction_[b[j]] != direction_[x] || cmp(bias(b[j]), bias(x)) < 0) return false;
            ++j;
        }
        return true;
    }

private:
    std::map<Inequality, Id> index_;  // node-based: element addresses are stable
    std::map<LinearExpr, Id> directions_;
    std::vector<const Inequality*> items_;
    std::vector<Id> direction_;
};

// Per-variable view of pool entries: occurrence sign and phi / w where the
// inequality reads w * x + phi >= 0.
class PivotCache {
public:
    PivotCache(const Pool& pool, VarIndex var) : pool_(pool), var_(var) {}

    int sign(Id id) {
        return entry(id).sign;
    }

    const LinearExpr& quotient(Id id) {
        Entry& e = entry(id);
        if (!e.quotient) {
            const Rational w = pool_[id].expr().coefficient(var_);
            e.quotient = pool_[id].expr().without(var_) / w;
        }
        return *e.quotient;
    }

private:
    struct Entry {
        bool known = false;
        int sign = 0;
        std::optional<LinearExpr> quotient;
    };

    Entry& entry(Id id) {
        if (id >= entries_.size()) entries_.resize(pool_.size());
        Entry& e = entries_[id];
        if (!e.known) {
            e.sign = sgn(pool_[id].expr().coefficient(var_));
            e.known = true;
        }
        return e;
    }

    const Pool& pool_;
    VarIndex var_;
    std::vector<Entry> entries_;
};

bool complementary(const Inequality& a, const Inequality& b) {
    const auto& ta = a.expr().terms();
    const auto& tb = b.expr().terms();
    if (ta.empty() || ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i].var != tb[i].var || ta[i].coeff != -tb[i].coeff) return false;
    }
    return sgn(a.expr().bias() + b.expr().bias()) >= 0;
}

class Engine {
public:
    Engine() : contradiction_(pool_.intern(Inequality::contradiction())) {}

    Pool& pool() { return pool_; }
    Id contradiction_id() const { return contradiction_; }

    Clause to_clause(const Constraint& c) {
        Clause out;
        for (const auto& d : c.disjuncts()) out.push_back(pool_.intern(d));
        pool_.normalize(out);
        return out;
    }

    Constraint to_constraint(const Clause& c) const {
        std::vector<Inequality> ds;
        ds.reserve(c.size());
        for (Id id : c) ds.push_back(pool_[id]);
        auto made = Constraint::make(std::move(ds));
        if (!made) throw std::logic_error("valid clause escaped tautology filtering");
        return *made;
    }

    bool is_contradiction(const Clause& c) const { return c.size() == 1 && c.front() == contradiction_; }

    // Cutting-planes resolution; pos has var only positively, neg has at
    // least one negative occurrence and no other negative ones outside its
    // pivots (trivially true: every negative disjunct is a pivot).
    std::optional<Clause> resolve(const Clause& pos, const Clause& neg, PivotCache& cache) {
        Clause out;
        std::vector<Id> pos_pivots;
        std::vector<Id> neg_pivots;
        for (Id id : pos) {
            const int s = cache.sign(id);
            if (s > 0) pos_pivots.push_back(id);
            else if (s < 0) throw std::logic_error("cp_resolve: first premise has a negative occurrence");
            else out.push_back(id);
        }
        for (Id id : neg) {
            if (cache.sign(id) < 0) neg_pivots.push_back(id);
            else out.push_back(id);
        }
        if (pos_pivots.empty()) throw std::logic_error("cp_resolve: first premise has no positive occurrence");
        if (neg_pivots.empty()) throw std::logic_error("cp_resolve: second premise has no negative occurrence");

        for (Id k : pos_pivots) {
            for (Id j : neg_pivots) {
                Inequality combined(cache.quotient(k) - cache.quotient(j));
                if (combined.is_tautology()) return std::nullopt;
                if (combined.is_contradiction()) continue;
                out.push_back(pool_.intern(std::move(combined)));
            }
        }
        // Residual contradictions (only the canonical one can occur) are dropped.
        std::erase(out, contradiction_);
        pool_.normalize(out);
        if (out.empty()) return Clause{contradiction_};
        for (std::size_t a = 0; a < out.size(); ++a) {
            for (std::size_t b = a + 1; b < out.size(); ++b) {
                if (complementary(pool_[out[a]], pool_[out[b]])) return std::nullopt;
            }
        }
        if (out.size() > 2) {
            std::vector<const Inequality*> ds;
            for (Id id : out) ds.push_back(&pool_[id]);
            if (proven_valid(ds)) return std::nullopt;
        }
        return out;
    }

private:
    Pool pool_;
    Id contradiction_;
};

// Clause store with forward and backward subsumption.
class ClauseDb {
public:
    explicit ClauseDb(const Pool& pool) : pool_(pool) {}

    // Adds c unless a stored clause entails it; drops stored clauses that c
    // entails. Returns the new index.
    std::optional<std::size_t> insert(Clause c) {
        if (subsumed(c)) return std::nullopt;
        const std::size_t index = clauses_.size();
        remove_subsumed_by(c);
        for (Id lit : c) occ_[pool_.direction(lit)].push_back(index);
        clauses_.push_back(std::move(c));
        alive_.push_back(true);
        return index;
    }

    bool alive(std::size_t i) const { return alive_[i]; }
    const Clause& at(std::size_t i) const { return clauses_[i]; }

    std::vector<Clause> live() const {
        std::vector<Clause> out;
        for (std::size_t i = 0; i < clauses_.size(); ++i) {
            if (alive_[i]) out.push_back(clauses_[i]);
        }
        return out;
    }

private:
    bool subsumed(const Clause& c) const {
        for (Id lit : c) {
            const Id dir = pool_.direction(lit);
            auto it = occ_.find(dir);
            if (it == occ_.end()) continue;
            for (std::size_t idx : it->second) {
                const Clause& other = clauses_[idx];
                // Visit each candidate once: through its first direction.
                if (!alive_[idx] || pool_.direction(other.front()) != dir || other.size() > c.size()) continue;
                if (pool_.entails(other, c)) return true;
            }
        }
        return false;
    }

    void remove_subsumed_by(const Clause& c) {
        const std::vector<std::size_t>* shortest = nullptr;
        for (Id lit : c) {
            auto it = occ_.find(pool_.direction(lit));
            if (it == occ_.end()) return;  // no stored clause has this direction
            if (!shortest || it->second.size() < shortest->size()) shortest = &it->second;
        }
        if (!shortest) return;
        for (std::size_t idx : *shortest) {
            if (alive_[idx] && pool_.entails(c, clauses_[idx])) alive_[idx] = false;
        }
    }

    const Pool& pool_;
    std::vector<Clause> clauses_;
    std::vector<bool> alive_;
    std::unordered_map<Id, std::vector<std::size_t>> occ_;
};

struct ClausePartition {
    std::vector<Clause> plus, minus, mixed, free;
};

ClausePartition split(const std::vector<Clause>& pi, PivotCache& cache) {
    ClausePartition p;
    for (const auto& c : pi) {
        bool pos = false;
        bool neg = false;
        for (Id id : c) {
            const int s = cache.sign(id);
            pos = pos || s > 0;
            neg = neg || s < 0;
        }
        if (pos && neg) p.mixed.push_back(c);
        else if (pos) p.plus.push_back(c);
        else if (neg) p.minus.push_back(c);
        else p.free.push_back(c);
    }
    return p;
}

std::vector<Clause> plusplus_closure(Engine& engine, const std::vector<Clause>& plus,
                                     const std::vector<Clause>& mixed, PivotCache& cache,
                                     ResolventBudget& budget, std::size_t& generated) {
    ClauseDb db(engine.pool());
    std::vector<std::size_t> frontier;
    for (const auto& c : plus) {
        if (auto idx = db.insert(c)) frontier.push_back(*idx);
    }
    for (std::size_t round = 0; round < mixed.size() && !frontier.empty(); ++round) {
        std::vector<std::size_t> next;
        for (std::size_t idx : frontier) {
            if (!db.alive(idx)) continue;
            const Clause psi = db.at(idx);
            for (const auto& psi_prime : mixed) {
                budget.charge();
                ++generated;
                if (auto r = engine.resolve(psi, psi_prime, cache)) {
                    if (auto added = db.insert(std::move(*r))) next.push_back(*added);
                }
            }
        }
        frontier = std::move(next);
    }
    return db.live();
}

struct ClauseStep {
    ClausePartition partition;
    std::vector<Clause> plusplus;
    std::vector<Clause> result;
    std::size_t resolvents = 0;
};

ClauseStep eliminate_clauses(Engine& engine, const std::vector<Clause>& pi, VarIndex var,
                             ResolventBudget& budget) {
    PivotCache cache(engine.pool(), var);
    ClauseStep step;
    step.partition = split(pi, cache);
    step.plusplus = plusplus_closure(engine, step.partition.plus, step.partition.mixed, cache, budget,
                                     step.resolvents);

    ClauseDb db(engine.pool());
    for (const auto& c : step.partition.free) db.insert(c);
    for (const auto& psi : step.plusplus) {
        for (const auto& psi_prime : step.partition.minus) {
            budget.charge();
            ++step.resolvents;
            if (auto r = engine.resolve(psi, psi_prime, cache)) db.insert(std::move(*r));
        }
    }
    step.result = db.live();
    return step;
}

ConstraintSet to_set(const Engine& engine, const std::vector<Clause>& clauses, std::size_t dimension) {
    ConstraintSet set(dimension);
    for (const auto& c : clauses) set.add(engine.to_constraint(c));
    set.sort();
    return set;
}

std::vector<Clause> to_clauses(Engine& engine, const ConstraintSet& set) {
    std::vector<Clause> out;
    out.reserve(set.size());
    for (const auto& c : set.constraints()) out.push_back(engine.to_clause(c));
    return out;
}

}  // namespace

std::optional<Constraint> cp_resolve(const Constraint& psi, const Constraint& psi_prime, VarIndex var) {
    if (psi.has_negative(var)) {
        throw std::logic_error("cp_resolve: first premise must not contain negative occurrences");
    }
    Engine engine;
    PivotCache cache(engine.pool(), var);
    const Clause a = engine.to_clause(psi);
    const Clause b = engine.to_clause(psi_prime);
    auto r = engine.resolve(a, b, cache);
    if (!r) return std::nullopt;
    return engine.to_constraint(*r);
}

VariablePartition partition(const ConstraintSet& pi, VarIndex var) {
    VariablePartition p{ConstraintSet(pi.dimension()), ConstraintSet(pi.dimension()),
                        ConstraintSet(pi.dimension()), ConstraintSet(pi.dimension())};
    for (const auto& c : pi.constraints()) {
        const bool pos = c.has_positive(var);
        const bool neg = c.has_negative(var);
        if (pos && neg) p.mixed.add(c);
        else if (pos) p.plus.add(c);
        else if (neg) p.minus.add(c);
        else p.free.add(c);
    }
    return p;
}

ConstraintSet close_plusplus(const ConstraintSet& plus, const ConstraintSet& mixed, VarIndex var,
                             ResolventBudget& budget) {
    Engine engine;
    PivotCache cache(engine.pool(), var);
    std::size_t generated = 0;
    auto closure = plusplus_closure(engine, to_clauses(engine, plus), to_clauses(engine, mixed), cache,
                                    budget, generated);
    return to_set(engine, closure, plus.dimension());
}

EliminationStep eliminate(const ConstraintSet& pi, VarIndex var, ResolventBudget& budget) {
    Engine engine;
    const std::size_t dim = pi.dimension();
    ClauseStep s = eliminate_clauses(engine, to_clauses(engine, pi), var, budget);
    EliminationStep step;
    step.variable = var;
    step.partition = {to_set(engine, s.partition.plus, dim), to_set(engine, s.partition.minus, dim),
                      to_set(engine, s.partition.mixed, dim), to_set(engine, s.partition.free, dim)};
    step.plusplus = to_set(engine, s.plusplus, dim);
    step.result = to_set(engine, s.result, dim);
    step.resolvent_count = s.resolvents;
    return step;
}

// ------------------------------------------------------------- CompiledLayer

CompiledLayer::CompiledLayer(std::vector<VarIndex> ordering, std::vector<ConstraintSet> levels,
                             Verdict verdict, std::optional<Constraint> witness,
                             std::vector<StepStats> stats)
    : ordering_(std::move(ordering)),
      levels_(std::move(levels)),
      verdict_(verdict),
      witness_(std::move(witness)),
      stats_(std::move(stats)) {
    const std::size_t d = ordering_.size();
    positions_.assign(d, d);
    for (std::size_t p = 0; p < d; ++p) {
        if (ordering_[p] >= d || positions_[ordering_[p]] != d) {
            throw std::invalid_argument("ordering is not a permutation of 0.." + std::to_string(d) + "-1");
        }
        positions_[ordering_[p]] = p;
    }
    if (verdict_ == Verdict::sat && levels_.size() != d + 1) {
        throw std::invalid_argument("a satisfiable layer needs D + 1 levels");
    }
    if (verdict_ == Verdict::unsat && (!witness_ || !witness_->is_contradiction())) {
        throw std::invalid_argument("an unsatisfiable layer needs a contradiction witness");
    }
    active_.assign(d, {});
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        const ConstraintSet& level = levels_[i];
        if (level.dimension() != d) throw std::invalid_argument("level dimension mismatch");
        for (std::size_t k = 0; k < level.size(); ++k) {
            auto top = level[k].max_variable();
            if (top && *top >= i) {
                throw std::invalid_argument("level " + std::to_string(i) + " mentions position " +
                                            std::to_string(*top));
            }
            if (i > 0 && level[k].mentions(i - 1)) active_[i - 1].push_back(k);
        }
    }
}

std::vector<VarIndex> identity_ordering(std::size_t dimension) {
    std::vector<VarIndex> order(dimension);
    for (std::size_t i = 0; i < dimension; ++i) order[i] = i;
    return order;
}

CompiledLayer compile(const ConstraintSet& pi, std::span<const VarIndex> ordering,
                      const CompileOptions& options) {
    const std::size_t d = pi.dimension();
    if (ordering.size() != d) {
        throw std::invalid_argument("ordering has " + std::to_string(ordering.size()) +
                                    " entries for dimension " + std::to_string(d));
    }
    std::vector<VarIndex> order(ordering.begin(), ordering.end());
    std::vector<VarIndex> to_position(d, d);
    for (std::size_t p = 0; p < d; ++p) {
        if (order[p] >= d || to_position[order[p]] != d) {
            throw std::invalid_argument("ordering is not a permutation");
        }
        to_position[order[p]] = p;
    }

    ConstraintSet top = pi.remapped(to_position);
    top.prune_subsumed();
    top.sort();

    Engine engine;
    ResolventBudget budget(options.max_resolvents);
    std::vector<ConstraintSet> levels(d + 1, ConstraintSet(d));
    std::vector<StepStats> stats(d);
    levels[d] = top;
    std::vector<Clause> current = to_clauses(engine, top);

    auto contradicted = [&](const std::vector<Clause>& cs) {
        return std::any_of(cs.begin(), cs.end(), [&](const Clause& c) { return engine.is_contradiction(c); });
    };

    if (contradicted(current)) {
        return CompiledLayer(order, {}, Verdict::unsat, Constraint::contradiction(), {});
    }
    for (std::size_t i = d; i-- > 0;) {
        ClauseStep step = eliminate_clauses(engine, current, i, budget);
        stats[i] = {step.partition.plus.size(), step.partition.minus.size(), step.partition.mixed.size(),
                    step.partition.free.size(), step.plusplus.size(), step.result.size(), step.resolvents};
        current = std::move(step.result);
        levels[i] = to_set(engine, current, d);
        if (contradicted(current)) {
            // The contradiction is variable-free and would persist down to Pi_0.
            return CompiledLayer(order, {}, Verdict::unsat, Constraint::contradiction(), std::move(stats));
        }
    }
    return CompiledLayer(std::move(order), std::move(levels), Verdict::sat, std::nullopt, std::move(stats));
}

}  // namespace drl

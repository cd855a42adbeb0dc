#pragma once

// Variable elimination over disjunctions of linear inequalities.
//
// For a variable ordering x_1; ...; x_D the compiler derives Pi_D = Pi,
// Pi_{D-1}, ..., Pi_0 where Pi_{i-1} mentions only x_1..x_{i-1} and every
// assignment satisfying Pi_{i-1} extends to one satisfying Pi_i. The
// contradiction -1 >= 0 showing up in the chain means Pi is unsatisfiable.
//
// Inside the compiler variables are numbered by their position in the
// ordering (position p is x_{p+1}); CompiledLayer keeps the mapping back to
// the caller's indices.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "drl/algebra.hpp"

namespace drl {

struct CompileOptions {
    // Cap on resolvents generated over a whole compile (not on those kept).
    std::size_t max_resolvents = 500000;
};

// Counts generated resolvents against CompileOptions::max_resolvents.
class ResolventBudget {
public:
    explicit ResolventBudget(std::size_t limit) : limit_(limit) {}

    void charge(std::size_t n = 1);
    std::size_t used() const noexcept { return used_; }
    std::size_t limit() const noexcept { return limit_; }

private:
    std::size_t limit_;
    std::size_t used_ = 0;
};

// Cutting-planes resolution on var between psi (var occurs only positively,
// at least once) and psi_prime (var occurs negatively at least once; its
// remaining disjuncts must not mention var negatively). nullopt means the
// conclusion is valid. Throws std::logic_error on violated preconditions.
std::optional<Constraint> cp_resolve(const Constraint& psi, const Constraint& psi_prime, VarIndex var);

struct VariablePartition {
    ConstraintSet plus;   // var occurs, only positively
    ConstraintSet minus;  // var occurs, only negatively
    ConstraintSet mixed;  // both signs
    ConstraintSet free;   // var does not occur
};

VariablePartition partition(const ConstraintSet& pi, VarIndex var);

// Union of Pi^0 = plus and Pi^{k+1} = { cp_resolve(psi, psi') : psi in Pi^k,
// psi' in mixed } for k < |mixed|, deduplicated and subsumption-pruned.
ConstraintSet close_plusplus(const ConstraintSet& plus, const ConstraintSet& mixed, VarIndex var,
                             ResolventBudget& budget);

struct EliminationStep {
    VarIndex variable = 0;
    VariablePartition partition;
    ConstraintSet plusplus;
    ConstraintSet result;
    std::size_t resolvent_count = 0;
};

EliminationStep eliminate(const ConstraintSet& pi, VarIndex var, ResolventBudget& budget);

enum class Verdict { sat, unsat };

struct StepStats {
    std::size_t plus = 0;
    std::size_t minus = 0;
    std::size_t mixed = 0;
    std::size_t free = 0;
    std::size_t plusplus = 0;
    std::size_t result = 0;
    std::size_t resolvents = 0;
};

class CompiledLayer {
public:
    // levels[i] is Pi_i over positions 0..i-1 (dimension D, i = 0..D). For an
    // unsatisfiable layer levels may stop short of Pi_0.
    CompiledLayer(std::vector<VarIndex> ordering, std::vector<ConstraintSet> levels, Verdict verdict,
                  std::optional<Constraint> witness, std::vector<StepStats> stats = {});

    std::size_t dimension() const noexcept { return ordering_.size(); }
    // position -> caller variable index
    const std::vector<VarIndex>& ordering() const noexcept { return ordering_; }
    // caller variable index -> position
    const std::vector<std::size_t>& positions() const noexcept { return positions_; }

    Verdict verdict() const noexcept { return verdict_; }
    bool satisfiable() const noexcept { return verdict_ == Verdict::sat; }
    const std::optional<Constraint>& unsat_witness() const noexcept { return witness_; }

    // Pi_i, i = 0..D, in position space.
    const ConstraintSet& level(std::size_t i) const { return levels_.at(i); }
    std::size_t level_count() const noexcept { return levels_.size(); }
    // Indices into level(p + 1) of the constraints mentioning position p.
    const std::vector<std::size_t>& active(std::size_t position) const { return active_.at(position); }

    // Per eliminated position (index = position), empty when loaded from disk.
    const std::vector<StepStats>& stats() const noexcept { return stats_; }

private:
    std::vector<VarIndex> ordering_;
    std::vector<std::size_t> positions_;
    std::vector<ConstraintSet> levels_;
    std::vector<std::vector<std::size_t>> active_;
    Verdict verdict_;
    std::optional<Constraint> witness_;
    std::vector<StepStats> stats_;
};

// ordering[p] is the caller's variable at position p and must be a
// permutation of 0..pi.dimension()-1. Throws BudgetExceeded.
CompiledLayer compile(const ConstraintSet& pi, std::span<const VarIndex> ordering,
                      const CompileOptions& options = {});

std::vector<VarIndex> identity_ordering(std::size_t dimension);

}  // namespace drl

#pragma once

// Validity of a disjunction of inequalities: sum_k (a_k . x + b_k >= 0)
// holds everywhere iff some convex combination of the a_k vanishes while the
// same combination of the b_k is non-negative. A floating-point simplex looks
// for the combination; it is then re-derived and checked in exact
// arithmetic, so a true answer is always exact. A false answer may miss
// valid disjunctions on numerically awkward inputs.

#include <span>

#include "drl/algebra.hpp"

namespace drl {

bool proven_valid(std::span<const Inequality> disjuncts);
bool proven_valid(std::span<const Inequality* const> disjuncts);

}  // namespace drl

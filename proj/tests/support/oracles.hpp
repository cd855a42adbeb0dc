#pragma once

// Generators and brute-force oracles shared by the unit and acceptance tests.
// Nothing here calls into the compiler or the refiner.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "drl/algebra.hpp"

namespace drl::testing {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi);
double uniform_real(Rng& rng, double lo, double hi);
// Rational in [lo, hi] with a denominator in 1..max_den.
Rational uniform_rational(Rng& rng, int lo, int hi, int max_den = 4);

struct SetShape {
    std::size_t dimension = 3;
    std::size_t min_constraints = 1;
    std::size_t max_constraints = 10;
    std::size_t max_disjuncts = 3;
    std::size_t max_vars_per_disjunct = 3;
    int max_coeff = 5;
    int max_bias = 10;
};

// Random disjunct w.x + b >= 0 with 1..max_vars distinct variables.
Inequality random_inequality(Rng& rng, const SetShape& shape);

// Random set without any satisfiability guarantee.
ConstraintSet random_set(Rng& rng, const SetShape& shape);

struct Planted {
    ConstraintSet pi;
    std::vector<Rational> witness;
};

// Random set that holds at a random rational point: whenever no disjunct of a
// fresh constraint holds there, one disjunct is negated.
Planted random_planted_set(Rng& rng, const SetShape& shape);

Rational evaluate_exact(const LinearExpr& e, std::span<const Rational> point);
bool holds_exact(const Inequality& ineq, std::span<const Rational> point);
bool holds_exact(const Constraint& c, std::span<const Rational> point);
bool holds_exact(const ConstraintSet& s, std::span<const Rational> point);

// Exact rational image of a double.
Rational exact(double v);
std::vector<Rational> exact(std::span<const double> v);

// Plain double evaluation, independent of the library's evaluator.
bool holds_approx(const ConstraintSet& s, std::span<const double> point, double tol);

// Vertex enumeration over the arrangement of all disjunct hyperplanes plus
// the faces of the box [-radius, radius]^k in the k unfixed coordinates. A
// closed feasible set meeting the box contains such a vertex, so this decides
// feasibility inside the box. Meant for k <= 3.
std::optional<std::vector<double>> find_point(const ConstraintSet& s, std::span<const std::optional<double>> fixed,
                                              double radius, double tol);

// Same with exact arithmetic and no fixed coordinates.
std::optional<std::vector<Rational>> find_point_exact(const ConstraintSet& s, const Rational& radius);

// Coordinates along `axis` of every vertex of the same arrangement.
std::vector<double> vertex_coordinates(const ConstraintSet& s, std::span<const std::optional<double>> fixed,
                                       std::size_t axis, double radius);

// True when the univariate system left after fixing every coordinate but
// `axis` to `prefix` has a solution (exact). Coordinates other than prefix
// and axis must not occur.
bool univariate_nonempty(const ConstraintSet& s, std::span<const std::optional<Rational>> fixed, std::size_t axis);

}  // namespace drl::testing

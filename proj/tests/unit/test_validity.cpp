#include <doctest.h>

#include "drl/validity.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace drl;
using namespace drl::testing;

TEST_CASE("hand cases") {
    const std::vector<Inequality> triangle = {ge0(var(0)), ge0(var(1)), ge0(-var(0) - var(1))};
    CHECK(proven_valid(triangle));
    const std::vector<Inequality> gap = {ge0(var(0)), ge0(var(1)), ge0(-var(0) - var(1) - constant(1))};
    CHECK_FALSE(proven_valid(gap));
    const std::vector<Inequality> slack = {ge0(var(0)), ge0(var(1)), ge0(-var(0) - var(1) + constant(1))};
    CHECK(proven_valid(slack));
    const std::vector<Inequality> pair = {ge0(var(0) - constant(2)), ge0(constant(3) - var(0))};
    CHECK(proven_valid(pair));
    const std::vector<Inequality> open = {ge0(var(0)), ge0(var(1))};
    CHECK_FALSE(proven_valid(open));
    CHECK_FALSE(proven_valid(std::span<const Inequality>{}));
}

TEST_CASE("a proof of validity is never wrong") {
    // Counterexample search at random and lattice points; a valid disjunction
    // holds everywhere.
    Rng rng(41);
    SetShape shape;
    shape.dimension = 2;
    std::size_t valid = 0;
    for (int i = 0; i < 3000; ++i) {
        std::vector<Inequality> ds;
        for (int k = uniform_int(rng, 2, 4); k > 0; --k) ds.push_back(random_inequality(rng, shape));
        if (!proven_valid(ds)) continue;
        ++valid;
        for (int j = 0; j < 400; ++j) {
            const std::vector<Rational> p = {uniform_rational(rng, -30, 30, 6), uniform_rational(rng, -30, 30, 6)};
            bool any = false;
            for (const auto& d : ds) any |= holds_exact(d, p);
            if (!any) FAIL("claimed valid disjunction fails at a point");
        }
    }
    MESSAGE(valid << " disjunctions proven valid");
    CHECK(valid > 0);
}

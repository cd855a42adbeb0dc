#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "drl/rational.hpp"
#include "oracles.hpp"

using namespace drl;

TEST_CASE("decimal literals convert exactly") {
    CHECK(parse_decimal("12") == 12);
    CHECK(parse_decimal("0.1") == Rational(1, 10));
    CHECK(parse_decimal("-0.125") == Rational(-1, 8));
    CHECK(parse_decimal("3.5e-2") == Rational(7, 200));
    CHECK(parse_decimal("2.5E3") == 2500);
    CHECK(parse_decimal("0.000001") == Rational(1, 1000000));
    CHECK(parse_decimal(".5") == Rational(1, 2));
    CHECK(parse_decimal("5.") == 5);
}

TEST_CASE("malformed decimals are rejected") {
    for (const char* bad : {"", "-", ".", "1.2.3", "abc", "1e", "1e+", "--1", "1,5", "0x10"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_decimal(bad), std::invalid_argument);
    }
}

TEST_CASE("fraction strings round-trip") {
    CHECK(to_fraction_string(Rational(3)) == "3/1");
    CHECK(to_fraction_string(Rational(-3, 2)) == "-3/2");
    CHECK(parse_fraction_string("-6/4") == Rational(-3, 2));
    CHECK(parse_fraction_string("7") == 7);
    CHECK_THROWS_AS(parse_fraction_string("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_fraction_string("1/-2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_fraction_string("a/b"), std::invalid_argument);

    testing::Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Rational q = testing::uniform_rational(rng, -1000, 1000, 97);
        CHECK(parse_fraction_string(to_fraction_string(q)) == q);
    }
}

TEST_CASE("display strings") {
    CHECK(to_display_string(Rational(3)) == "3");
    CHECK(to_display_string(Rational(1, 2)) == "0.5");
    CHECK(to_display_string(Rational(-1, 8)) == "-0.125");
    CHECK(to_display_string(Rational(1, 3)) == "1/3");
    CHECK(parse_decimal(to_display_string(Rational(3, 40))) == Rational(3, 40));
}

TEST_CASE("long double conversion") {
    CHECK(to_long_double(Rational(1, 4)) == 0.25L);
    CHECK(std::fabs(to_long_double(Rational(1, 3)) - 1.0L / 3.0L) < 1e-18L);
    CHECK(compare(Rational(1, 3), Rational(1, 2)) == std::strong_ordering::less);
}

#pragma once

#include <compare>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace drl {

// Arbitrary-precision rational, always kept in lowest terms with a positive
// denominator.
using Rational = mpq_class;

// Exact conversion of a decimal literal such as "12", "-0.125" or "3.5e-2".
// Throws std::invalid_argument on malformed input.
Rational parse_decimal(std::string_view text);

// "num/den" round-trip encoding used by the compiled artifact; the denominator
// is always written, even when it is 1.
std::string to_fraction_string(const Rational& value);
Rational parse_fraction_string(std::string_view text);

// Human-facing rendering: integers as "3", others as "1/3" or a terminating
// decimal when one exists ("0.5").
std::string to_display_string(const Rational& value);

// Nearest long double to value (exact for the small integers and dyadic
// fractions that dominate in practice).
long double to_long_double(const Rational& value);

inline std::strong_ordering compare(const Rational& a, const Rational& b) {
    const int c = cmp(a, b);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

}  // namespace drl

#include "drl/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace drl {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

mpz_class pow10(unsigned long exponent) {
    mpz_class result;
    mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
    return result;
}

}  // namespace

Rational parse_decimal(std::string_view text) {
    const std::string original(text);
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }

    long exponent = 0;
    if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_part = text.substr(e + 1);
        bool exp_negative = false;
        if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
            exp_negative = exp_part.front() == '-';
            exp_part.remove_prefix(1);
        }
        if (!all_digits(exp_part) || exp_part.size() > 6) {
            throw std::invalid_argument("malformed exponent in number '" + original + "'");
        }
        exponent = std::stol(std::string(exp_part));
        if (exp_negative) exponent = -exponent;
        text = text.substr(0, e);
    }

    std::string_view int_part = text;
    std::string_view frac_part;
    if (const auto dot = text.find('.'); dot != std::string_view::npos) {
        int_part = text.substr(0, dot);
        frac_part = text.substr(dot + 1);
    }
    if ((int_part.empty() && frac_part.empty()) ||
        (!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part))) {
        throw std::invalid_argument("malformed number '" + original + "'");
    }

    // d digits after the point -> denominator 10^d
    mpz_class digits(std::string(int_part) + std::string(frac_part), 10);
    Rational result(digits, pow10(frac_part.size()));
    if (exponent > 0) result *= Rational(pow10(static_cast<unsigned long>(exponent)));
    if (exponent < 0) result /= Rational(pow10(static_cast<unsigned long>(-exponent)));
    result.canonicalize();
    return negative ? Rational(-result) : result;
}

std::string to_fraction_string(const Rational& value) {
    return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Rational parse_fraction_string(std::string_view text) {
    const auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1")
                                                           : text.substr(slash + 1);
    std::string_view unsigned_num = num;
    if (!unsigned_num.empty() && unsigned_num.front() == '-') unsigned_num.remove_prefix(1);
    if (!all_digits(unsigned_num) || !all_digits(den)) {
        throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    }
    mpz_class d(std::string(den), 10);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational result(mpz_class(std::string(num), 10), d);
    result.canonicalize();
    return result;
}

std::string to_display_string(const Rational& value) {
    if (value.get_den() == 1) return value.get_num().get_str();

    // Terminating decimal iff the denominator has no prime factors besides 2, 5.
    mpz_class den = value.get_den();
    unsigned long twos = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(2).get_mpz_t());
    unsigned long fives = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(5).get_mpz_t());
    if (den != 1 || std::max(twos, fives) > 30) return to_fraction_string(value);

    const unsigned long places = std::max(twos, fives);
    mpz_class scaled = value.get_num() * pow10(places) / value.get_den();
    const bool negative = scaled < 0;
    if (negative) scaled = -scaled;
    std::string digits = scaled.get_str();
    if (digits.size() <= places) digits.insert(0, places - digits.size() + 1, '0');
    digits.insert(digits.size() - places, ".");
    return negative ? "-" + digits : digits;
}

long double to_long_double(const Rational& value) {
    if (mpz_fits_slong_p(value.get_num_mpz_t()) && mpz_fits_slong_p(value.get_den_mpz_t())) {
        return static_cast<long double>(value.get_num().get_si()) /
               static_cast<long double>(value.get_den().get_si());
    }
    return static_cast<long double>(value.get_d());
}

}  // namespace drl

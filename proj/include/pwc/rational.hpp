#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pwc {

/// Exact rational number, always in lowest terms with a positive denominator.
using Rat = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                          boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed textual input (bad rational, bad JSON shape).
class ParseError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace detail

/// Parses "p/q" or "p" (optionally signed numerator). Rejects q = 0 and
/// anything that is not a plain integer ratio.
inline Rat parse_rat(std::string_view text) {
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    const auto slash = s.find('/');
    std::string_view num = s.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view{"1"}
                                                           : s.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den))
        throw ParseError("malformed rational \"" + std::string(text) + "\"");
    BigInt p(std::string{num});
    BigInt q(std::string{den});
    if (q == 0)
        throw ParseError("zero denominator in \"" + std::string(text) + "\"");
    if (negative) p = -p;
    return Rat(p, q);
}

/// Canonical wire form "p/q"; integers are written with denominator 1.
inline std::string to_string(const Rat& r) {
    return boost::multiprecision::numerator(r).str() + "/" +
           boost::multiprecision::denominator(r).str();
}

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline Rat pow(Rat base, std::size_t exponent) {
    Rat result{1};
    while (exponent > 0) {
        if (exponent & 1U) result *= base;
        base *= base;
        exponent >>= 1U;
    }
    return result;
}

inline Rat abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

/// Rounds to the nearest multiple of 2^-bits (ties away from zero).
inline Rat round_dyadic(const Rat& r, unsigned bits) {
    BigInt scale = BigInt(1) << bits;
    BigInt num = boost::multiprecision::numerator(r) * scale;
    BigInt den = boost::multiprecision::denominator(r);
    BigInt twice = 2 * num + (num >= 0 ? den : BigInt(-den));
    BigInt q = twice / (2 * den);
    return Rat(q, scale);
}

}  // namespace pwc

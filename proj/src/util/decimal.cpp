#include "guidelm/util/decimal.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "guidelm/errors.hpp"

namespace guidelm {

std::int64_t pow10(int digits) {
    std::int64_t p = 1;
    for (int i = 0; i < digits; ++i) p *= 10;
    return p;
}

std::int64_t round_div(std::int64_t num, std::int64_t den, Rounding mode) {
    if (den == 0) throw std::domain_error("round_div: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const bool negative = num < 0;
    const std::int64_t mag = negative ? -num : num;
    std::int64_t q = mag / den;
    const std::int64_t r = mag % den;
    // compare 2r against den without overflow
    if (r > den - r) {
        ++q;
    } else if (r == den - r) {
        if (mode == Rounding::half_away_from_zero || (q % 2) == 1) ++q;
    }
    return negative ? -q : q;
}

template <int Digits>
Fixed<Digits> Fixed<Digits>::parse(std::string_view text) {
    const std::string_view original = text;
    auto fail = [&] { return ValidationError("not a decimal with at most " + std::to_string(Digits) +
                                             " fraction digits: '" + std::string(original) + "'"); };
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() || frac.size() > static_cast<std::size_t>(Digits)) throw fail();
    if (dot != std::string_view::npos && frac.empty()) throw fail();
    std::int64_t w = 0;
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size()) throw fail();
    std::int64_t f = 0;
    if (!frac.empty()) {
        auto [pf, ecf] = std::from_chars(frac.data(), frac.data() + frac.size(), f);
        if (ecf != std::errc{} || pf != frac.data() + frac.size()) throw fail();
        f *= pow10(Digits - static_cast<int>(frac.size()));
    }
    const std::int64_t v = w * pow10(Digits) + f;
    return Fixed{negative ? -v : v};
}

template <int Digits>
Fixed<Digits> Fixed<Digits>::from_double(double v) {
    return Fixed{static_cast<std::int64_t>(std::llround(v * static_cast<double>(pow10(Digits))))};
}

template <int Digits>
std::string Fixed<Digits>::str() const {
    const std::int64_t p = pow10(Digits);
    const std::int64_t mag = scaled < 0 ? -scaled : scaled;
    std::string out = scaled < 0 ? "-" : "";
    out += std::to_string(mag / p);
    if constexpr (Digits > 0) {
        std::string frac = std::to_string(mag % p);
        out += '.';
        out += std::string(static_cast<std::size_t>(Digits) - frac.size(), '0');
        out += frac;
    }
    return out;
}

template struct Fixed<1>;
template struct Fixed<2>;

}  // namespace guidelm

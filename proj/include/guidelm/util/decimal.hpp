#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace guidelm {

enum class Rounding {
    half_away_from_zero,
    half_to_even,
};

/// Exact integer division num/den rounded to the nearest integer. den must be non-zero.
std::int64_t round_div(std::int64_t num, std::int64_t den, Rounding mode = Rounding::half_away_from_zero);

std::int64_t pow10(int digits);

/// Exact decimal with a fixed number of fraction digits, stored as a scaled integer.
/// All report percentages go through this type so that rounding never touches binary floating point.
template <int Digits>
struct Fixed {
    static_assert(Digits >= 0 && Digits <= 6);
    static constexpr int digits = Digits;

    std::int64_t scaled = 0;

    static Fixed from_scaled(std::int64_t v) { return Fixed{v}; }

    /// 100 * part / whole at this precision.
    static Fixed percentage(std::int64_t part, std::int64_t whole, Rounding mode = Rounding::half_away_from_zero) {
        return Fixed{round_div(part * 100 * pow10(Digits), whole, mode)};
    }

    /// Parses "99.31", "-9.0", "7". More fraction digits than Digits is an error.
    static Fixed parse(std::string_view text);

    /// Nearest representable value; used only when re-reading JSON numbers.
    static Fixed from_double(double v);

    std::string str() const;
    double to_double() const { return static_cast<double>(scaled) / static_cast<double>(pow10(Digits)); }

    template <int Other>
    Fixed<Other> rescale(Rounding mode) const {
        if constexpr (Other >= Digits) {
            return Fixed<Other>{scaled * pow10(Other - Digits)};
        } else {
            return Fixed<Other>{round_div(scaled, pow10(Digits - Other), mode)};
        }
    }

    friend Fixed operator-(Fixed a, Fixed b) { return Fixed{a.scaled - b.scaled}; }
    friend Fixed operator+(Fixed a, Fixed b) { return Fixed{a.scaled + b.scaled}; }
    friend auto operator<=>(const Fixed&, const Fixed&) = default;
};

/// Acceptance rates: percent with two decimals.
using Rate = Fixed<2>;
/// Fine-tune deltas, first-choice shares and review percentages: percent with one decimal.
using Tenths = Fixed<1>;

extern template struct Fixed<1>;
extern template struct Fixed<2>;

}  // namespace guidelm

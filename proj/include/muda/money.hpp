#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "muda/errors.hpp"

namespace muda {

/// Exact fixed-point amount of currency.
///
/// Stored as an integer count of atomic units, 10^-4 currency units each.
/// All arithmetic is integer arithmetic, so sums of payments and fees can be
/// compared for exact equality (budget balance is an equality test, not a
/// tolerance test).
class Money {
public:
    /// Atomic units per currency unit.
    static constexpr std::int64_t kScale = 10'000;

    constexpr Money() = default;

    static constexpr Money from_atomic(std::int64_t atomic) {
        Money m;
        m.atomic_ = atomic;
        return m;
    }

    /// Whole currency units, e.g. units(50) == 50.0000.
    static constexpr Money units(std::int64_t whole) { return from_atomic(whole * kScale); }

    /// Converts a floating-point amount. Throws ParseError when the value
    /// does not land on the atomic grid (more than 4 decimal places).
    static Money from_double(double value) {
        if (!std::isfinite(value)) {
            throw ParseError("money value is not finite");
        }
        const double scaled = value * static_cast<double>(kScale);
        if (std::abs(scaled) > 9.0e18) {
            throw ParseError("money value out of range");
        }
        const double nearest = std::nearbyint(scaled);
        const double tol = 1e-6 * std::max(1.0, std::abs(scaled));
        if (std::abs(scaled - nearest) > tol) {
            throw ParseError("money value has more than 4 decimal places");
        }
        return from_atomic(static_cast<std::int64_t>(nearest));
    }

    constexpr std::int64_t atomic() const { return atomic_; }

    double to_double() const { return static_cast<double>(atomic_) / static_cast<double>(kScale); }

    /// Decimal rendering without trailing zeros: 75000 atomic -> "7.5".
    std::string str() const {
        std::int64_t a = atomic_;
        std::string sign;
        if (a < 0) {
            sign = "-";
            a = -a;
        }
        std::string out = sign + std::to_string(a / kScale);
        std::int64_t frac = a % kScale;
        if (frac != 0) {
            std::string digits = std::to_string(frac);
            digits.insert(digits.begin(), 4 - digits.size(), '0');
            while (digits.back() == '0') digits.pop_back();
            out += "." + digits;
        }
        return out;
    }

    constexpr Money& operator+=(Money rhs) {
        atomic_ += rhs.atomic_;
        return *this;
    }
    constexpr Money& operator-=(Money rhs) {
        atomic_ -= rhs.atomic_;
        return *this;
    }

    friend constexpr Money operator+(Money a, Money b) { return from_atomic(a.atomic_ + b.atomic_); }
    friend constexpr Money operator-(Money a, Money b) { return from_atomic(a.atomic_ - b.atomic_); }
    friend constexpr Money operator-(Money a) { return from_atomic(-a.atomic_); }
    friend constexpr Money operator*(Money a, std::int64_t n) { return from_atomic(a.atomic_ * n); }
    friend constexpr Money operator*(std::int64_t n, Money a) { return a * n; }

    friend constexpr auto operator<=>(Money a, Money b) = default;

    friend std::ostream& operator<<(std::ostream& os, Money m) { return os << m.str(); }

private:
    std::int64_t atomic_ = 0;
};

/// Midpoint on the atomic grid, rounded toward `low` when the exact midpoint
/// falls between two atomic units.
constexpr Money midpoint(Money low, Money high) {
    return Money::from_atomic(std::midpoint(low.atomic(), high.atomic()));
}

/// One atomic unit, the smallest representable price step.
inline constexpr Money kMoneyEpsilon = Money::from_atomic(1);

}  // namespace muda

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace citysim {

/// Currency held as an integer count of cents so that every transfer is exact.
class Money {
public:
    constexpr Money() = default;

    static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }
    static Money from_units(double units) { return Money(std::llround(units * 100.0)); }

    constexpr std::int64_t cents() const { return cents_; }
    constexpr double units() const { return static_cast<double>(cents_) / 100.0; }

    constexpr Money operator-() const { return Money(-cents_); }
    constexpr Money& operator+=(Money o) { cents_ += o.cents_; return *this; }
    constexpr Money& operator-=(Money o) { cents_ -= o.cents_; return *this; }
    friend constexpr Money operator+(Money a, Money b) { return Money(a.cents_ + b.cents_); }
    friend constexpr Money operator-(Money a, Money b) { return Money(a.cents_ - b.cents_); }
    friend constexpr Money operator*(Money a, std::int64_t n) { return Money(a.cents_ * n); }
    friend constexpr Money operator*(std::int64_t n, Money a) { return Money(a.cents_ * n); }

    /// Scales by a real factor, rounding to the nearest cent.
    Money scaled(double factor) const {
        return Money(std::llround(static_cast<double>(cents_) * factor));
    }

    friend constexpr auto operator<=>(Money, Money) = default;

    std::string str() const;

private:
    constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
    std::int64_t cents_ = 0;
};

constexpr Money max(Money a, Money b) { return a < b ? b : a; }
constexpr Money min(Money a, Money b) { return b < a ? b : a; }

/// Moves `amount` from one balance to another. The only way money changes hands.
constexpr void transfer(Money& from, Money& to, Money amount) {
    from -= amount;
    to += amount;
}

/// Whole units of a good purchasable with `budget` at `price` (price > 0).
constexpr std::int64_t affordable_units(Money budget, Money price) {
    if (price.cents() <= 0 || budget.cents() <= 0) return 0;
    return budget.cents() / price.cents();
}

} // namespace citysim

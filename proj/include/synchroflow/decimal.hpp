#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace synchroflow {

// Fixed-point kilogram quantity with 6 fractional digits, stored as a signed
// 64-bit count of micro-kilograms. Addition over int64 is exactly associative
// and commutative, which is what makes ledger totals independent of event
// delivery order.
class Decimal {
public:
    static constexpr int64_t kScale = 1'000'000;  // micro-kg per kg
    static constexpr int kFractionDigits = 6;

    constexpr Decimal() = default;

    static constexpr Decimal from_micro(int64_t micro) {
        Decimal d;
        d.micro_ = micro;
        return d;
    }

    // Parses a plain decimal string: optional '-', digits, optional '.' with
    // 1..6 fractional digits. No exponents, no '+', no whitespace. Returns
    // nullopt on malformed input or magnitude beyond the int64 micro range.
    static std::optional<Decimal> parse(std::string_view text);

    // Always renders with exactly 6 fractional digits, e.g. "0.005000".
    std::string str() const;

    constexpr int64_t micro() const { return micro_; }
    constexpr bool is_zero() const { return micro_ == 0; }
    constexpr bool is_negative() const { return micro_ < 0; }

    Decimal& operator+=(Decimal other);
    Decimal& operator-=(Decimal other);
    friend Decimal operator+(Decimal a, Decimal b) { return a += b; }
    friend Decimal operator-(Decimal a, Decimal b) { return a -= b; }
    constexpr Decimal operator-() const { return from_micro(-micro_); }

    friend constexpr auto operator<=>(Decimal, Decimal) = default;

    // this * fraction, truncated toward zero at micro resolution. The caller
    // keeps conservation exact by assigning the remainder (this - result) to
    // the complementary branch.
    Decimal scaled_floor(Decimal fraction) const;

private:
    int64_t micro_ = 0;
};

}  // namespace synchroflow

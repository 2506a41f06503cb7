#include "synchroflow/decimal.hpp"

#include <cstdio>
#include <limits>

#include "synchroflow/error.hpp"

namespace synchroflow {

std::optional<Decimal> Decimal::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;

    bool negative = false;
    size_t pos = 0;
    if (text[0] == '-') {
        negative = true;
        pos = 1;
    }

    uint64_t int_part = 0;
    size_t int_digits = 0;
    constexpr uint64_t kMaxMicroMagnitude =
        static_cast<uint64_t>(std::numeric_limits<int64_t>::max());

    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        int_part = int_part * 10 + static_cast<uint64_t>(text[pos] - '0');
        ++int_digits;
        if (int_digits > 13) return std::nullopt;  // > 9.2e12 kg cannot fit
        ++pos;
    }

    uint64_t frac_micro = 0;
    size_t frac_digits = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (frac_digits == static_cast<size_t>(kFractionDigits)) return std::nullopt;
            frac_micro = frac_micro * 10 + static_cast<uint64_t>(text[pos] - '0');
            ++frac_digits;
            ++pos;
        }
        if (frac_digits == 0) return std::nullopt;  // lone trailing '.'
    }

    if (pos != text.size()) return std::nullopt;
    if (int_digits == 0) return std::nullopt;  // ".5" and bare "-" are malformed

    for (size_t i = frac_digits; i < static_cast<size_t>(kFractionDigits); ++i)
        frac_micro *= 10;

    uint64_t magnitude = int_part * static_cast<uint64_t>(kScale) + frac_micro;
    if (magnitude > kMaxMicroMagnitude) return std::nullopt;

    int64_t micro = static_cast<int64_t>(magnitude);
    return from_micro(negative ? -micro : micro);
}

std::string Decimal::str() const {
    uint64_t magnitude;
    if (micro_ < 0) {
        magnitude = static_cast<uint64_t>(-(micro_ + 1)) + 1;
    } else {
        magnitude = static_cast<uint64_t>(micro_);
    }
    uint64_t whole = magnitude / static_cast<uint64_t>(kScale);
    uint64_t frac = magnitude % static_cast<uint64_t>(kScale);

    char frac_buf[8];
    std::snprintf(frac_buf, sizeof(frac_buf), "%06llu",
                  static_cast<unsigned long long>(frac));

    std::string out;
    if (micro_ < 0) out.push_back('-');
    out += std::to_string(whole);
    out.push_back('.');
    out += frac_buf;
    return out;
}

Decimal& Decimal::operator+=(Decimal other) {
    int64_t result;
    if (__builtin_add_overflow(micro_, other.micro_, &result))
        throw Error(Errc::overflow, "decimal addition overflow");
    micro_ = result;
    return *this;
}

Decimal& Decimal::operator-=(Decimal other) {
    int64_t result;
    if (__builtin_sub_overflow(micro_, other.micro_, &result))
        throw Error(Errc::overflow, "decimal subtraction overflow");
    micro_ = result;
    return *this;
}

Decimal Decimal::scaled_floor(Decimal fraction) const {
    __int128 product = static_cast<__int128>(micro_) * fraction.micro_;
    __int128 scaled = product / kScale;  // truncates toward zero
    if (scaled > std::numeric_limits<int64_t>::max() ||
        scaled < std::numeric_limits<int64_t>::min())
        throw Error(Errc::overflow, "decimal scaling overflow");
    return from_micro(static_cast<int64_t>(scaled));
}

}  // namespace synchroflow

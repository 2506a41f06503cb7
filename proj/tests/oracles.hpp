// Independent reference implementations used to check the library from the
// outside. Everything here is deliberately written against the raw wire
// bytes (nlohmann parsing, string splitting, naive loops) rather than
// reusing library code, so a shared bug cannot hide.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace oracle {

// Decimal kg string -> micro-kg, via plain string splitting.
inline int64_t micro(const std::string& text) {
    std::string t = text;
    bool negative = false;
    if (!t.empty() && t[0] == '-') {
        negative = true;
        t = t.substr(1);
    }
    std::string whole = t, frac;
    if (auto dot = t.find('.'); dot != std::string::npos) {
        whole = t.substr(0, dot);
        frac = t.substr(dot + 1);
    }
    if (frac.size() > 6) throw std::runtime_error("oracle: too many frac digits");
    while (frac.size() < 6) frac.push_back('0');
    int64_t value = std::stoll(whole.empty() ? "0" : whole) * 1'000'000 +
                    std::stoll(frac.empty() ? "0" : frac);
    return negative ? -value : value;
}

// Event-time window by definition: the unique w with w*width <= ts < (w+1)*width.
inline uint64_t window_of(uint64_t ts_ms, uint64_t width_ms) {
    return (ts_ms - ts_ms % width_ms) / width_ms;
}

// Watermark / finalization model, evolved one timestamp at a time.
struct Windows {
    uint64_t width_ms;
    uint64_t skew_ms;
    uint64_t max_ts = 0;
    bool any = false;

    void observe(uint64_t ts_ms) {
        if (!any || ts_ms > max_ts) max_ts = ts_ms;
        any = true;
    }
    uint64_t watermark() const {
        if (!any) return 0;
        return max_ts > skew_ms ? max_ts - skew_ms : 0;
    }
    // Count finalized windows by walking them, not by dividing.
    uint64_t finalized() const {
        uint64_t count = 0;
        while ((count + 1) * width_ms <= watermark()) ++count;
        return count;
    }
};

// Plain-set deduplication.
struct Dedup {
    std::set<std::pair<std::string, uint64_t>> seen;
    // true = fresh
    bool offer(const std::string& node, uint64_t seq) {
        return seen.insert({node, seq}).second;
    }
};

// Ground-truth mass per material for a log of wire lines, honoring the
// cumulative meaning of assembly_increment: the final total per
// (node_id, item_ref, material) counts once; every other kind sums directly.
// Parses with nlohmann only.
inline std::map<std::string, int64_t> delta_aware_totals_micro(
    const std::vector<std::string>& lines) {
    std::map<std::string, int64_t> direct;
    std::map<std::tuple<std::string, std::string, std::string>, int64_t> finals;
    std::set<std::pair<std::string, uint64_t>> seen;  // ignore duplicates
    for (const auto& line : lines) {
        auto doc = nlohmann::json::parse(line);
        const std::string node = doc.at("node_id").get<std::string>();
        const uint64_t seq = doc.at("seq").get<uint64_t>();
        if (!seen.insert({node, seq}).second) continue;
        const std::string kind = doc.at("kind").get<std::string>();
        const std::string material = doc.at("material").get<std::string>();
        const int64_t mass = micro(doc.at("mass_kg").get<std::string>());
        if (kind == "assembly_increment") {
            auto key = std::make_tuple(node, doc.at("item_ref").get<std::string>(),
                                       material);
            auto it = finals.find(key);
            if (it == finals.end() || mass > it->second) finals[key] = mass;
        } else {
            direct[material] += mass;
        }
    }
    auto totals = direct;
    for (const auto& [key, mass] : finals) totals[std::get<2>(key)] += mass;
    return totals;
}

// Contact geometry recomputed with doubles and explicit half-up rounding.
inline int half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace oracle

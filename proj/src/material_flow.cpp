#include "synchroflow/material_flow.hpp"

#include <algorithm>

#include "synchroflow/error.hpp"
#include "synchroflow/json_writer.hpp"

namespace synchroflow::mfa {

const char* stage_name(Stage stage) noexcept {
    switch (stage) {
        case Stage::mining: return "mining";
        case Stage::manufacturing: return "manufacturing";
        case Stage::use: return "use";
        case Stage::disassembly: return "disassembly";
        case Stage::sorting: return "sorting";
        case Stage::incineration: return "incineration";
        case Stage::external: return "external";
    }
    return "external";
}

std::optional<Stage> stage_from_name(std::string_view name) {
    if (name == "mining") return Stage::mining;
    if (name == "manufacturing") return Stage::manufacturing;
    if (name == "use") return Stage::use;
    if (name == "disassembly") return Stage::disassembly;
    if (name == "sorting") return Stage::sorting;
    if (name == "incineration") return Stage::incineration;
    if (name == "external") return Stage::external;
    return std::nullopt;
}

namespace {

bool valid_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v')
            return false;
    }
    return true;
}

}  // namespace

void ProcessGraph::register_process(ProcessNode node) {
    if (!valid_id(node.id))
        throw Error(Errc::invalid_id, "process id must be non-empty without whitespace");
    auto [it, inserted] = processes_.emplace(node.id, std::move(node));
    if (!inserted)
        throw Error(Errc::duplicate_process, "process already registered: " + it->first);
}

void ProcessGraph::register_material(Material material) {
    if (!valid_id(material.id))
        throw Error(Errc::invalid_id, "material id must be non-empty without whitespace");
    auto [it, inserted] = materials_.emplace(material.id, std::move(material));
    if (!inserted)
        throw Error(Errc::duplicate_material, "material already registered: " + it->first);
}

const ProcessNode* ProcessGraph::find_process(const std::string& id) const {
    auto it = processes_.find(id);
    return it == processes_.end() ? nullptr : &it->second;
}

const Material* ProcessGraph::find_material(const std::string& id) const {
    auto it = materials_.find(id);
    return it == materials_.end() ? nullptr : &it->second;
}

FlowLedger::FlowLedger(ProcessGraph graph, uint64_t window_width_ms)
    : graph_(std::move(graph)), window_width_ms_(window_width_ms) {
    if (window_width_ms_ == 0)
        throw Error(Errc::bad_config, "window width must be positive");
}

void FlowLedger::apply_flow(const std::string& from, const std::string& to,
                            const MaterialMass& mm, uint64_t window) {
    if (!graph_.has_process(from))
        throw Error(Errc::unknown_process, "unknown process: " + from);
    if (!graph_.has_process(to))
        throw Error(Errc::unknown_process, "unknown process: " + to);
    if (from == to)
        throw Error(Errc::self_loop, "flow from process to itself: " + from);
    if (!graph_.has_material(mm.material))
        throw Error(Errc::unknown_material, "unknown material: " + mm.material);
    if (mm.mass_kg.is_negative())
        throw Error(Errc::negative_mass, "flow mass must be non-negative");

    entries_[FlowKey{from, to, mm.material, window}] += mm.mass_kg;
}

Decimal FlowLedger::stock_at(const std::string& process, const std::string& material,
                             uint64_t window) const {
    if (!graph_.has_process(process))
        throw Error(Errc::unknown_process, "unknown process: " + process);
    if (!graph_.has_material(material))
        throw Error(Errc::unknown_material, "unknown material: " + material);

    Decimal stock;
    for (const auto& [key, mass] : entries_) {
        if (key.material != material || key.window > window) continue;
        if (key.to == process) stock += mass;
        if (key.from == process) stock -= mass;
    }
    return stock;
}

SankeyDocument FlowLedger::sankey_between(uint64_t window_lo, uint64_t window_hi) const {
    if (window_lo > window_hi)
        throw Error(Errc::invalid_window_range, "window_lo exceeds window_hi");

    SankeyDocument doc;
    for (const auto& [id, node] : graph_.processes()) doc.nodes.push_back(node);

    // entries_ is keyed (from, to, material, window), so summing in iteration
    // order groups links and yields them already sorted by (from, to, material).
    const Decimal zero;
    SankeyLink current;
    bool open = false;
    auto flush = [&] {
        if (open && current.mass_kg != zero) doc.links.push_back(current);
        open = false;
    };
    for (const auto& [key, mass] : entries_) {
        if (key.window < window_lo || key.window > window_hi) continue;
        if (!open || current.from != key.from || current.to != key.to ||
            current.material != key.material) {
            flush();
            current = SankeyLink{key.from, key.to, key.material, Decimal{}};
            open = true;
        }
        current.mass_kg += mass;
    }
    flush();
    return doc;
}

std::vector<BarPoint> FlowLedger::bar_series(const std::set<std::string>& area,
                                             const std::string& material,
                                             uint64_t window_hi) const {
    if (area.empty())
        throw Error(Errc::empty_area, "area must name at least one process");
    for (const auto& id : area) {
        if (!graph_.has_process(id))
            throw Error(Errc::unknown_process, "unknown process: " + id);
    }
    if (!graph_.has_material(material))
        throw Error(Errc::unknown_material, "unknown material: " + material);

    // Net stock delta of the area per window, then a running sum.
    std::map<uint64_t, Decimal> delta;
    for (const auto& [key, mass] : entries_) {
        if (key.material != material || key.window > window_hi) continue;
        bool to_in = area.count(key.to) != 0;
        bool from_in = area.count(key.from) != 0;
        if (to_in && !from_in) delta[key.window] += mass;
        if (from_in && !to_in) delta[key.window] -= mass;
    }

    std::vector<BarPoint> series;
    series.reserve(window_hi + 1);
    Decimal running;
    for (uint64_t w = 0; w <= window_hi; ++w) {
        auto it = delta.find(w);
        if (it != delta.end()) running += it->second;
        series.push_back(BarPoint{w, running});
    }
    return series;
}

BalanceReport FlowLedger::mass_balance_report(uint64_t window_hi) const {
    BalanceReport report;
    report.window_hi = window_hi;

    for (const auto& [pid, node] : graph_.processes()) {
        if (node.stage == Stage::external) continue;
        for (const auto& [mid, material] : graph_.materials()) {
            BalanceRow row;
            row.process = pid;
            row.material = mid;
            for (const auto& [key, mass] : entries_) {
                if (key.material != mid || key.window > window_hi) continue;
                if (key.to == pid) row.inflow_kg += mass;
                if (key.from == pid) row.outflow_kg += mass;
            }
            row.stock_kg = stock_at(pid, mid, window_hi);
            row.residual_kg = row.inflow_kg - row.outflow_kg - row.stock_kg;
            if (row.residual_kg != Decimal{}) ++report.violations;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

uint64_t FlowLedger::max_window() const {
    uint64_t max_w = 0;
    for (const auto& [key, mass] : entries_) max_w = std::max(max_w, key.window);
    return max_w;
}

std::string SankeyDocument::to_json() const {
    std::string out = "{\"nodes\":[";
    bool first = true;
    for (const auto& node : nodes) {
        if (!first) out.push_back(',');
        first = false;
        out += "{\"id\":" + json_quote(node.id) +
               ",\"stage\":" + json_quote(stage_name(node.stage)) + "}";
    }
    out += "],\"links\":[";
    first = true;
    for (const auto& link : links) {
        if (!first) out.push_back(',');
        first = false;
        out += "{\"from\":" + json_quote(link.from) + ",\"to\":" + json_quote(link.to) +
               ",\"material\":" + json_quote(link.material) +
               ",\"mass_kg\":" + json_quote(link.mass_kg.str()) + "}";
    }
    out += "]}";
    return out;
}

std::string bar_series_to_json(const std::vector<BarPoint>& series) {
    std::string out = "[";
    bool first = true;
    for (const auto& point : series) {
        if (!first) out.push_back(',');
        first = false;
        out += "{\"window\":" + std::to_string(point.window) +
               ",\"total_kg\":" + json_quote(point.total_kg.str()) + "}";
    }
    out += "]";
    return out;
}

std::string BalanceReport::to_json() const {
    std::string out = "{\"window_hi\":" + std::to_string(window_hi) + ",\"rows\":[";
    bool first = true;
    for (const auto& row : rows) {
        if (!first) out.push_back(',');
        first = false;
        out += "{\"process\":" + json_quote(row.process) +
               ",\"material\":" + json_quote(row.material) +
               ",\"inflow_kg\":" + json_quote(row.inflow_kg.str()) +
               ",\"outflow_kg\":" + json_quote(row.outflow_kg.str()) +
               ",\"stock_kg\":" + json_quote(row.stock_kg.str()) +
               ",\"residual_kg\":" + json_quote(row.residual_kg.str()) + "}";
    }
    out += "],\"violations\":" + std::to_string(violations) + "}";
    return out;
}

}  // namespace synchroflow::mfa

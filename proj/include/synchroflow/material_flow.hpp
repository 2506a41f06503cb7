#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "synchroflow/decimal.hpp"

namespace synchroflow::mfa {

// Lifecycle stages a process node can belong to. External marks the system
// boundary: it is the only stage whose stock is allowed to go negative
// (pure sources and sinks).
enum class Stage {
    mining,
    manufacturing,
    use,
    disassembly,
    sorting,
    incineration,
    external,
};

const char* stage_name(Stage stage) noexcept;
std::optional<Stage> stage_from_name(std::string_view name);

struct Material {
    std::string id;            // short lowercase identifier, e.g. "copper"
    std::string display_name;
};

struct ProcessNode {
    std::string id;
    Stage stage = Stage::external;
    std::string description;
};

struct MaterialMass {
    std::string material;
    Decimal mass_kg;
};

// Registry of processes and materials. Immutable once handed to a FlowLedger;
// registration order never affects any query (storage is id-sorted).
class ProcessGraph {
public:
    void register_process(ProcessNode node);
    void register_material(Material material);

    bool has_process(const std::string& id) const { return processes_.count(id) != 0; }
    bool has_material(const std::string& id) const { return materials_.count(id) != 0; }
    const ProcessNode* find_process(const std::string& id) const;
    const Material* find_material(const std::string& id) const;

    const std::map<std::string, ProcessNode>& processes() const { return processes_; }
    const std::map<std::string, Material>& materials() const { return materials_; }

private:
    std::map<std::string, ProcessNode> processes_;
    std::map<std::string, Material> materials_;
};

struct FlowKey {
    std::string from;
    std::string to;
    std::string material;
    uint64_t window = 0;

    friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

struct SankeyLink {
    std::string from;
    std::string to;
    std::string material;
    Decimal mass_kg;
};

struct SankeyDocument {
    std::vector<ProcessNode> nodes;   // sorted by id
    std::vector<SankeyLink> links;    // sorted by (from, to, material), zero-mass omitted

    std::string to_json() const;      // canonical bytes, no trailing newline
};

struct BarPoint {
    uint64_t window = 0;
    Decimal total_kg;
};

std::string bar_series_to_json(const std::vector<BarPoint>& series);

struct BalanceRow {
    std::string process;
    std::string material;
    Decimal inflow_kg;
    Decimal outflow_kg;
    Decimal stock_kg;
    Decimal residual_kg;  // inflow - outflow - stock; nonzero indicates a bug
};

struct BalanceReport {
    uint64_t window_hi = 0;
    std::vector<BalanceRow> rows;   // every non-External (process, material), sorted
    size_t violations = 0;          // rows whose residual exceeds 1e-9 kg

    std::string to_json() const;
};

// Cumulative per-window flow ledger over a fixed process graph. Masses are
// summed in exact fixed-point, so the final entries are a pure function of
// the applied flow multiset.
class FlowLedger {
public:
    FlowLedger() = default;
    FlowLedger(ProcessGraph graph, uint64_t window_width_ms);

    // Throws Error with codes unknown_process, unknown_material, self_loop,
    // negative_mass.
    void apply_flow(const std::string& from, const std::string& to,
                    const MaterialMass& mm, uint64_t window);

    // Cumulative inflow minus outflow through `window` inclusive. Zero for a
    // process with no incident flows. Throws unknown_process/unknown_material.
    Decimal stock_at(const std::string& process, const std::string& material,
                     uint64_t window) const;

    SankeyDocument sankey_between(uint64_t window_lo, uint64_t window_hi) const;

    std::vector<BarPoint> bar_series(const std::set<std::string>& area,
                                     const std::string& material,
                                     uint64_t window_hi) const;

    BalanceReport mass_balance_report(uint64_t window_hi) const;

    const std::map<FlowKey, Decimal>& entries() const { return entries_; }
    const ProcessGraph& graph() const { return graph_; }
    uint64_t window_width_ms() const { return window_width_ms_; }

    // Highest window index holding an entry; zero when the ledger is empty.
    uint64_t max_window() const;

private:
    ProcessGraph graph_;
    uint64_t window_width_ms_ = 60'000;
    std::map<FlowKey, Decimal> entries_;
};

}  // namespace synchroflow::mfa

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synchroflow/material_flow.hpp"
#include "synchroflow/perception.hpp"

namespace synchroflow::sim {

// What a simulated robot does each time its emit period elapses.
enum class RobotRole {
    manufacture,  // turns raw material into ready-to-assemble kits
    assemble,     // builds one product step per tick, reporting cumulatively
    disassemble,  // tears a retired product down component by component
    sort,         // splits recovered mass between reuse and incineration
};

const char* role_name(RobotRole role);
std::optional<RobotRole> role_from_name(std::string_view name);

struct RobotNodeConfig {
    std::string node_id;
    RobotRole role = RobotRole::assemble;
    // Added to the cell clock when stamping ts_ms; models unsynchronized
    // node clocks. Stamps clamp at zero.
    int64_t clock_skew_ms = 0;
    uint64_t emit_period_ms = 5'000;
    std::string from_process;
    std::string to_process;           // unused for sort
    std::string recover_to_process;   // sort only
    std::string incinerate_to_process;  // sort only
};

// Transport fault model applied between the cell and the aggregator.
struct NetworkModel {
    uint64_t reorder_window_ms = 0;  // max per-copy delivery jitter
    double duplicate_prob = 0.0;     // [0,1]; 1.0 means every line twice
    double loss_prob = 0.0;          // [0,1)
    uint64_t rng_seed = 0;
};

struct ScenarioConfig {
    uint64_t duration_ms = 600'000;
    uint64_t window_ms = 60'000;
    uint64_t skew_allowance_ms = 5'000;
    NetworkModel network;
    mfa::ProcessGraph graph;
    perception::BillOfMaterials bom;
    // Component labels making up one product, in assembly order.
    std::vector<perception::ComponentLabel> product;
    // Fraction of sorted mass routed back to manufacturing; the remainder
    // is incinerated. Parsed as a decimal string, e.g. "0.7".
    Decimal recovery_fraction;
    std::vector<RobotNodeConfig> nodes;
};

// Throws Error(invalid_scenario) describing the first problem found.
void validate_scenario(const ScenarioConfig& cfg);

// Loads a scenario JSON file. A "bom" string value is resolved relative to
// the scenario file's directory; an object value is parsed inline.
ScenarioConfig load_scenario(const std::string& path);

ScenarioConfig scenario_from_json(const nlohmann::json& doc,
                                  const std::string& base_dir);

// The built-in electronics-cell scenario: one manufacturing robot, one
// assembly robot, one disassembly robot and a sorter moving desktop-PC
// component mass through mining -> manufacturing -> use -> disassembly ->
// {manufacturing, incineration}.
ScenarioConfig default_scenario();

nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

}  // namespace synchroflow::sim

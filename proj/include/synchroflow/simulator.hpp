#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synchroflow/scenario.hpp"

namespace synchroflow::sim {

// A wire line together with the cell-clock millisecond it left (sent log) or
// arrived (delivered log).
struct TimedLine {
    uint64_t at_ms = 0;
    std::string line;

    friend bool operator==(const TimedLine&, const TimedLine&) = default;
};

// Deterministic discrete-event simulation of one robotic cell. Each node
// emits on multiples of its period; ties process in node declaration order.
// Re-running with the same config reproduces the sent log byte for byte —
// all randomness lives in the network model, not here.
class CellSimulator {
public:
    explicit CellSimulator(ScenarioConfig cfg);  // validates the config

    // Advances the cell clock by dt_ms and returns the lines sent during
    // (now, now + dt_ms], ordered by send time.
    std::vector<TimedLine> step(uint64_t dt_ms);

    uint64_t now_ms() const { return clock_ms_; }
    const ScenarioConfig& config() const { return cfg_; }

private:
    struct Teardown {
        std::string item_ref;
        size_t remaining = 0;  // components left, counted from the top
    };

    struct NodeRuntime {
        size_t cfg_index = 0;
        uint64_t next_seq = 1;
        uint64_t emissions = 0;  // last k for which k*period already fired
        // assemble
        bool item_active = false;
        uint64_t items_started = 0;
        size_t item_step = 0;
        std::string item_ref;
        std::map<std::string, Decimal> item_cumulative;
        // manufacture
        uint64_t kits_made = 0;
        // disassemble
        std::optional<Teardown> teardown;
    };

    void emit(std::vector<TimedLine>& out, NodeRuntime& rt, uint64_t t_ms,
              events::EventKind kind, const std::string& from,
              const std::string& to, const std::string& material,
              Decimal mass_kg, std::optional<uint64_t> step,
              std::optional<std::string> item_ref);
    void tick_manufacture(std::vector<TimedLine>& out, NodeRuntime& rt, uint64_t t_ms);
    void tick_assemble(std::vector<TimedLine>& out, NodeRuntime& rt, uint64_t t_ms);
    void tick_disassemble(std::vector<TimedLine>& out, NodeRuntime& rt, uint64_t t_ms);
    void tick_sort(std::vector<TimedLine>& out, NodeRuntime& rt, uint64_t t_ms);

    ScenarioConfig cfg_;
    uint64_t clock_ms_ = 0;
    std::vector<NodeRuntime> nodes_;
    uint64_t kits_ready_ = 0;                 // manufacture -> assemble handoff
    std::deque<std::string> retired_items_;   // assemble -> disassemble handoff
    std::map<std::string, Decimal> sorter_backlog_;  // material -> pending mass
};

// Applies the network fault model to a sent log: each line may be lost,
// duplicated (independent fates per copy), and delayed by a uniform jitter in
// [0, reorder_window_ms]. Output is sorted by delivery time, ties keeping
// send order, so per-node sequences can only be displaced by the jitter
// bound. Seeded and fully deterministic.
std::vector<TimedLine> perturb(const NetworkModel& net,
                               const std::vector<TimedLine>& sent);

struct ScenarioRun {
    std::vector<TimedLine> sent;
    std::vector<TimedLine> delivered;
};

// Runs the whole scenario in one step and perturbs the sent log.
ScenarioRun run_scenario(const ScenarioConfig& cfg);

std::vector<std::string> lines_of(const std::vector<TimedLine>& log);

// Ground-truth mass per material injected by a sent log. Assembly lines are
// cumulative per (node, item, material) — their contribution is the final
// total, not the sum of the lines — while every other kind sums directly.
std::map<std::string, Decimal> injected_totals(const std::vector<TimedLine>& sent);

}  // namespace synchroflow::sim

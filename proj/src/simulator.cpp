#include "synchroflow/simulator.hpp"

#include <algorithm>
#include <random>
#include <tuple>

#include "synchroflow/error.hpp"

namespace synchroflow::sim {

namespace {

// Sender timestamp: cell clock plus the node's skew, clamped at zero.
uint64_t stamp(uint64_t t_ms, int64_t skew_ms) {
    const int64_t stamped = static_cast<int64_t>(t_ms) + skew_ms;
    return stamped < 0 ? 0 : static_cast<uint64_t>(stamped);
}

}  // namespace

CellSimulator::CellSimulator(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    validate_scenario(cfg_);
    if (cfg_.network.reorder_window_ms > 86'400'000ULL) {
        throw Error(Errc::invalid_scenario,
                    "network.reorder_window_ms is implausibly large");
    }
    nodes_.resize(cfg_.nodes.size());
    for (size_t i = 0; i < nodes_.size(); ++i) nodes_[i].cfg_index = i;
}

void CellSimulator::emit(std::vector<TimedLine>& out, NodeRuntime& rt,
                         uint64_t t_ms, events::EventKind kind,
                         const std::string& from, const std::string& to,
                         const std::string& material, Decimal mass_kg,
                         std::optional<uint64_t> step,
                         std::optional<std::string> item_ref) {
    const auto& node_cfg = cfg_.nodes[rt.cfg_index];
    events::SynchroEvent event;
    event.node_id = node_cfg.node_id;
    event.seq = rt.next_seq++;
    event.ts_ms = stamp(t_ms, node_cfg.clock_skew_ms);
    event.kind = kind;
    event.from = from;
    event.to = to;
    event.material = material;
    event.mass_kg = mass_kg;
    event.step = step;
    event.item_ref = std::move(item_ref);
    out.push_back(TimedLine{t_ms, events::encode_event(event)});
}

void CellSimulator::tick_manufacture(std::vector<TimedLine>& out,
                                     NodeRuntime& rt, uint64_t t_ms) {
    const auto& node_cfg = cfg_.nodes[rt.cfg_index];
    ++rt.kits_made;
    const std::string kit_ref =
        node_cfg.node_id + "-kit-" + std::to_string(rt.kits_made);

    // One full component kit per tick, reported as a single-step assembly:
    // the cumulative mass equals the whole kit.
    std::map<std::string, Decimal> kit_total;
    for (auto label : cfg_.product) {
        for (const auto& entry : *cfg_.bom.find(label)) {
            kit_total[entry.material] += entry.mass_kg;
        }
    }
    for (const auto& [material, mass] : kit_total) {
        emit(out, rt, t_ms, events::EventKind::assembly_increment,
             node_cfg.from_process, node_cfg.to_process, material, mass, 1,
             kit_ref);
    }
    ++kits_ready_;
}

void CellSimulator::tick_assemble(std::vector<TimedLine>& out, NodeRuntime& rt,
                                  uint64_t t_ms) {
    const auto& node_cfg = cfg_.nodes[rt.cfg_index];
    if (!rt.item_active) {
        if (kits_ready_ == 0) return;  // no kit staged; idle this tick
        --kits_ready_;
        rt.item_active = true;
        ++rt.items_started;
        rt.item_step = 0;
        rt.item_ref =
            node_cfg.node_id + "-pc-" + std::to_string(rt.items_started);
        rt.item_cumulative.clear();
    }

    ++rt.item_step;
    const auto label = cfg_.product[rt.item_step - 1];
    for (const auto& entry : *cfg_.bom.find(label)) {
        rt.item_cumulative[entry.material] += entry.mass_kg;
    }
    // Cumulative reporting: every touched material restates its running
    // total each step, so a dropped line never leaves a silent gap.
    for (const auto& [material, total] : rt.item_cumulative) {
        emit(out, rt, t_ms, events::EventKind::assembly_increment,
             node_cfg.from_process, node_cfg.to_process, material, total,
             rt.item_step, rt.item_ref);
    }
    if (rt.item_step == cfg_.product.size()) {
        rt.item_active = false;
        retired_items_.push_back(rt.item_ref);
    }
}

void CellSimulator::tick_disassemble(std::vector<TimedLine>& out,
                                     NodeRuntime& rt, uint64_t t_ms) {
    const auto& node_cfg = cfg_.nodes[rt.cfg_index];
    if (!rt.teardown) {
        if (retired_items_.empty()) return;  // nothing to tear down
        rt.teardown = Teardown{retired_items_.front(), cfg_.product.size()};
        retired_items_.pop_front();
    }

    // Components come off in reverse assembly order.
    const size_t index = rt.teardown->remaining - 1;
    const auto label = cfg_.product[index];
    for (const auto& entry : *cfg_.bom.find(label)) {
        emit(out, rt, t_ms, events::EventKind::disassembly_extraction,
             node_cfg.from_process, node_cfg.to_process, entry.material,
             entry.mass_kg, std::nullopt, rt.teardown->item_ref);
        sorter_backlog_[entry.material] += entry.mass_kg;
    }
    if (--rt.teardown->remaining == 0) rt.teardown.reset();
}

void CellSimulator::tick_sort(std::vector<TimedLine>& out, NodeRuntime& rt,
                              uint64_t t_ms) {
    const auto& node_cfg = cfg_.nodes[rt.cfg_index];
    for (auto& [material, mass] : sorter_backlog_) {
        if (mass.is_zero()) continue;
        // Split exactly: the floor goes back to manufacturing and the
        // remainder is incinerated, so recovered + incinerated == input.
        const Decimal recovered = mass.scaled_floor(cfg_.recovery_fraction);
        const Decimal incinerated = mass - recovered;
        if (!recovered.is_zero()) {
            emit(out, rt, t_ms, events::EventKind::sort_transfer,
                 node_cfg.from_process, node_cfg.recover_to_process, material,
                 recovered, std::nullopt, std::nullopt);
        }
        if (!incinerated.is_zero()) {
            emit(out, rt, t_ms, events::EventKind::incineration_transfer,
                 node_cfg.from_process, node_cfg.incinerate_to_process,
                 material, incinerated, std::nullopt, std::nullopt);
        }
        mass = Decimal{};
    }
}

std::vector<TimedLine> CellSimulator::step(uint64_t dt_ms) {
    std::vector<TimedLine> out;
    const uint64_t horizon = clock_ms_ + dt_ms;

    struct Due {
        uint64_t t_ms;
        size_t node;
        uint64_t k;
    };
    std::vector<Due> due;
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const uint64_t period = cfg_.nodes[i].emit_period_ms;
        for (uint64_t k = nodes_[i].emissions + 1; k * period <= horizon; ++k) {
            due.push_back(Due{k * period, i, k});
        }
    }
    std::sort(due.begin(), due.end(), [](const Due& a, const Due& b) {
        return a.t_ms != b.t_ms ? a.t_ms < b.t_ms : a.node < b.node;
    });

    for (const auto& d : due) {
        NodeRuntime& rt = nodes_[d.node];
        rt.emissions = d.k;
        switch (cfg_.nodes[d.node].role) {
            case RobotRole::manufacture: tick_manufacture(out, rt, d.t_ms); break;
            case RobotRole::assemble: tick_assemble(out, rt, d.t_ms); break;
            case RobotRole::disassemble: tick_disassemble(out, rt, d.t_ms); break;
            case RobotRole::sort: tick_sort(out, rt, d.t_ms); break;
        }
    }
    clock_ms_ = horizon;
    return out;
}

std::vector<TimedLine> perturb(const NetworkModel& net,
                               const std::vector<TimedLine>& sent) {
    std::mt19937_64 rng(net.rng_seed);
    // 53-bit uniform in [0, 1); the standard bit-shift construction so the
    // stream is stable across standard libraries.
    auto unit = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    std::vector<TimedLine> delivered;
    delivered.reserve(sent.size());
    for (const auto& record : sent) {
        if (net.loss_prob > 0.0 && unit() < net.loss_prob) continue;
        int copies = 1;
        if (net.duplicate_prob > 0.0 && unit() < net.duplicate_prob) copies = 2;
        for (int c = 0; c < copies; ++c) {
            uint64_t jitter = 0;
            if (net.reorder_window_ms != 0) {
                jitter = rng() % (net.reorder_window_ms + 1);
            }
            delivered.push_back(TimedLine{record.at_ms + jitter, record.line});
        }
    }
    // Stable: equal delivery times keep send order, so displacement is
    // bounded by reorder_window_ms.
    std::stable_sort(delivered.begin(), delivered.end(),
                     [](const TimedLine& a, const TimedLine& b) {
                         return a.at_ms < b.at_ms;
                     });
    return delivered;
}

ScenarioRun run_scenario(const ScenarioConfig& cfg) {
    CellSimulator simulator(cfg);
    ScenarioRun run;
    run.sent = simulator.step(cfg.duration_ms);
    run.delivered = perturb(cfg.network, run.sent);
    return run;
}

std::vector<std::string> lines_of(const std::vector<TimedLine>& log) {
    std::vector<std::string> lines;
    lines.reserve(log.size());
    for (const auto& record : log) lines.push_back(record.line);
    return lines;
}

std::map<std::string, Decimal> injected_totals(const std::vector<TimedLine>& sent) {
    std::map<std::string, Decimal> totals;
    std::map<std::tuple<std::string, std::string, std::string>, Decimal> finals;
    for (const auto& record : sent) {
        auto decoded = events::decode_event(record.line);
        if (!decoded.ok()) continue;  // foreign lines contribute nothing
        const auto& event = *decoded.event;
        if (event.kind == events::EventKind::assembly_increment) {
            finals[{event.node_id, event.item_ref.value_or(""), event.material}] =
                event.mass_kg;
        } else {
            totals[event.material] += event.mass_kg;
        }
    }
    for (const auto& [key, mass] : finals) totals[std::get<2>(key)] += mass;
    return totals;
}

}  // namespace synchroflow::sim

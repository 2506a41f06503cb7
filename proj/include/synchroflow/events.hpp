#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synchroflow/decimal.hpp"
#include "synchroflow/material_flow.hpp"

namespace synchroflow::events {

enum class EventKind {
    assembly_increment,
    disassembly_extraction,
    sort_transfer,
    use_transfer,
    incineration_transfer,
};

const char* kind_name(EventKind kind) noexcept;
std::optional<EventKind> kind_from_name(std::string_view name);

// One timestamped material-mass transfer reported by a robotic node. The
// (node_id, seq) pair is the deduplication identity; ts_ms is the sender's
// clock. AssemblyIncrement events carry the cumulative mass assembled so far
// for (node_id, item_ref, material), not a delta.
struct SynchroEvent {
    std::string node_id;
    uint64_t seq = 0;
    uint64_t ts_ms = 0;
    EventKind kind = EventKind::use_transfer;
    std::string from;
    std::string to;
    std::string material;
    Decimal mass_kg;
    std::optional<uint64_t> step;       // assembly step index n
    std::optional<std::string> item_ref;

    friend bool operator==(const SynchroEvent&, const SynchroEvent&) = default;
};

inline constexpr int kWireVersion = 1;

// Canonical wire line (no trailing newline): one JSON object with keys in
// fixed order v, node_id, seq, ts_ms, kind, from, to, material, mass_kg,
// then step and item_ref when present. mass_kg renders with 6 fractional
// digits.
std::string encode_event(const SynchroEvent& event);

struct DecodedEvent {
    std::optional<SynchroEvent> event;
    std::string error;                 // machine-readable code when !event
    std::string detail;
    std::optional<uint64_t> seq;       // seq when recoverable from a bad line

    bool ok() const { return event.has_value(); }
};

// Strict v=1 parser: rejects unknown keys, wrong types, missing fields,
// negative or over-precise masses. Never throws on hostile input.
DecodedEvent decode_event(std::string_view line);

struct Violation {
    std::string code;
    std::string detail;
};

// Structural checks against a process graph: unknown process/material,
// self-loop, negative mass, kind/stage consistency, step presence. Returns
// all violations; the event is acceptable iff the list is empty.
std::vector<Violation> validate_event(const SynchroEvent& event,
                                      const mfa::ProcessGraph& graph);

}  // namespace synchroflow::events

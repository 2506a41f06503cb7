#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "synchroflow/dedup.hpp"
#include "synchroflow/events.hpp"
#include "synchroflow/journal.hpp"
#include "synchroflow/material_flow.hpp"
#include "synchroflow/windowing.hpp"

namespace synchroflow::agg {

struct Metrics {
    uint64_t accepted = 0;
    uint64_t duplicates = 0;
    uint64_t invalid = 0;
    uint64_t late = 0;
    uint64_t corrupt_journal = 0;
};

enum class IngestStatus { applied, duplicate, invalid };

const char* ingest_status_name(IngestStatus status) noexcept;

struct IngestResult {
    IngestStatus status = IngestStatus::invalid;
    std::string error;             // machine-readable code when invalid
    std::optional<uint64_t> seq;   // echoed when recoverable from the line

    // {"seq":<n|null>,"status":"applied|duplicate|invalid"[,"error":"..."]}
    std::string ack_json() const;
};

// Cumulative-assembly key: totals are tracked per reporting node, per item
// being built, per material.
struct AssemblyKey {
    std::string node_id;
    std::string item_ref;
    std::string material;

    friend auto operator<=>(const AssemblyKey&, const AssemblyKey&) = default;
};

// Single-writer ingest pipeline over a mass-conserving flow ledger.
//
// Per line: decode -> structural validation -> dedup on (node_id, seq) ->
// cumulative-decrease check -> journal -> watermark advance -> window
// routing -> ledger apply. Only fully accepted lines reach the journal, so
// replaying it reproduces ledger, watermark, assembly progress and the
// replay-stable counters byte for byte.
class Aggregator {
public:
    Aggregator(mfa::ProcessGraph graph, uint64_t window_width_ms,
               uint64_t skew_allowance_ms);

    // Opens the write-ahead journal; every subsequently applied line is
    // appended before it mutates the ledger.
    void open_journal(const std::string& path, bool fsync_each);
    void close_journal();

    IngestResult ingest_line(std::string_view line);

    // Re-applies a journal, skipping (and counting) lines that fail any
    // acceptance check. Returns the number of lines applied. Call before
    // open_journal so replayed lines are not appended again.
    size_t replay_stream(std::istream& in);
    size_t replay_file(const std::string& path);  // missing file: no-op, 0

    // Query serializations; all bytes are canonical and deterministic.
    // Window bounds default to [0, max populated window].
    std::string sankey_json(std::optional<uint64_t> lo,
                            std::optional<uint64_t> hi) const;
    std::string bars_json(const std::set<std::string>& area,
                          const std::string& material,
                          std::optional<uint64_t> hi) const;
    std::string balance_json(std::optional<uint64_t> hi) const;
    std::string metrics_json() const;

    // Full replay-stable state: ledger entries, assembly progress, watermark
    // and the accepted/late counters. Equal ingest multisets (up to delivery
    // orders the skew allowance permits) produce identical snapshots.
    std::string snapshot_json() const;

    const Metrics& metrics() const { return metrics_; }
    const mfa::FlowLedger& ledger() const { return ledger_; }
    const events::WindowAssigner& windows() const { return assigner_; }
    const std::map<AssemblyKey, Decimal>& assembly_progress() const {
        return assembly_progress_;
    }

private:
    IngestResult classify(std::string_view line, events::SynchroEvent& event);

    mfa::FlowLedger ledger_;
    events::WindowAssigner assigner_;
    events::DedupIndex dedup_;
    std::map<AssemblyKey, Decimal> assembly_progress_;
    Metrics metrics_;
    JournalWriter journal_;
    bool replaying_ = false;
};

}  // namespace synchroflow::agg

#include "synchroflow/aggregator.hpp"

#include <filesystem>
#include <fstream>

#include "synchroflow/error.hpp"
#include "synchroflow/json_writer.hpp"

namespace synchroflow::agg {

const char* ingest_status_name(IngestStatus status) noexcept {
    switch (status) {
        case IngestStatus::applied: return "applied";
        case IngestStatus::duplicate: return "duplicate";
        case IngestStatus::invalid: return "invalid";
    }
    return "?";
}

std::string IngestResult::ack_json() const {
    std::string out = "{\"seq\":";
    out += seq ? std::to_string(*seq) : "null";
    out += ",\"status\":";
    out += json_quote(ingest_status_name(status));
    if (!error.empty()) {
        out += ",\"error\":";
        out += json_quote(error);
    }
    out += "}";
    return out;
}

Aggregator::Aggregator(mfa::ProcessGraph graph, uint64_t window_width_ms,
                       uint64_t skew_allowance_ms)
    : ledger_(std::move(graph), window_width_ms),
      assigner_(window_width_ms, skew_allowance_ms) {}

void Aggregator::open_journal(const std::string& path, bool fsync_each) {
    journal_.open(path, fsync_each);
}

void Aggregator::close_journal() { journal_.close(); }

IngestResult Aggregator::ingest_line(std::string_view line) {
    auto decoded = events::decode_event(line);
    if (!decoded.ok()) {
        ++metrics_.invalid;
        return IngestResult{IngestStatus::invalid, decoded.error, decoded.seq};
    }
    events::SynchroEvent& event = *decoded.event;

    auto violations = events::validate_event(event, ledger_.graph());
    if (!violations.empty()) {
        ++metrics_.invalid;
        return IngestResult{IngestStatus::invalid, violations.front().code,
                            event.seq};
    }

    if (dedup_.seen(event.node_id, event.seq)) {
        ++metrics_.duplicates;
        return IngestResult{IngestStatus::duplicate, "", event.seq};
    }

    // Cumulative assembly totals must never shrink. A stale line overtaken
    // by a later cumulative carries no new mass, so rejecting it is lossless.
    Decimal delta = event.mass_kg;
    AssemblyKey key;
    const bool is_assembly = event.kind == events::EventKind::assembly_increment;
    if (is_assembly) {
        key = AssemblyKey{event.node_id, *event.item_ref, event.material};
        auto it = assembly_progress_.find(key);
        const Decimal last = it == assembly_progress_.end() ? Decimal{} : it->second;
        if (event.mass_kg < last) {
            ++metrics_.invalid;
            return IngestResult{IngestStatus::invalid, "cumulative_decrease",
                                event.seq};
        }
        delta = event.mass_kg - last;
    }

    // Accepted: record identity, persist, then mutate state.
    dedup_.accept(event.node_id, event.seq);
    if (!replaying_ && journal_.enabled()) journal_.append(line);

    assigner_.advance_watermark(event.ts_ms);
    const auto routed = assigner_.route(event.ts_ms);
    if (routed.late) ++metrics_.late;
    ++metrics_.accepted;

    if (is_assembly) assembly_progress_[key] = event.mass_kg;
    if (!delta.is_zero()) {
        ledger_.apply_flow(event.from, event.to,
                           mfa::MaterialMass{event.material, delta},
                           routed.window);
    }
    return IngestResult{IngestStatus::applied, "", event.seq};
}

size_t Aggregator::replay_stream(std::istream& in) {
    replaying_ = true;
    size_t applied = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto result = ingest_line(line);
        if (result.status == IngestStatus::applied) {
            ++applied;
        } else {
            // A journal holds exactly the applied history; anything else
            // means the file was corrupted or edited.
            ++metrics_.corrupt_journal;
        }
    }
    replaying_ = false;
    return applied;
}

size_t Aggregator::replay_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return 0;
    return replay_stream(in);
}

std::string Aggregator::sankey_json(std::optional<uint64_t> lo,
                                    std::optional<uint64_t> hi) const {
    const uint64_t window_lo = lo.value_or(0);
    const uint64_t window_hi = hi.value_or(ledger_.max_window());
    return ledger_.sankey_between(window_lo, window_hi).to_json();
}

std::string Aggregator::bars_json(const std::set<std::string>& area,
                                  const std::string& material,
                                  std::optional<uint64_t> hi) const {
    const uint64_t window_hi = hi.value_or(ledger_.max_window());
    return mfa::bar_series_to_json(ledger_.bar_series(area, material, window_hi));
}

std::string Aggregator::balance_json(std::optional<uint64_t> hi) const {
    const uint64_t window_hi = hi.value_or(ledger_.max_window());
    return ledger_.mass_balance_report(window_hi).to_json();
}

std::string Aggregator::metrics_json() const {
    std::string out = "{\"accepted\":" + std::to_string(metrics_.accepted);
    out += ",\"corrupt_journal\":" + std::to_string(metrics_.corrupt_journal);
    out += ",\"duplicates\":" + std::to_string(metrics_.duplicates);
    out += ",\"invalid\":" + std::to_string(metrics_.invalid);
    out += ",\"late\":" + std::to_string(metrics_.late);
    out += ",\"watermark_ms\":" + std::to_string(assigner_.watermark_ms());
    out += ",\"windows_finalized\":" + std::to_string(assigner_.finalized_count());
    out += "}";
    return out;
}

std::string Aggregator::snapshot_json() const {
    std::string out = "{\"accepted\":" + std::to_string(metrics_.accepted);

    out += ",\"assembly_progress\":[";
    bool first = true;
    for (const auto& [key, total] : assembly_progress_) {
        if (!first) out += ",";
        first = false;
        out += "{\"node_id\":" + json_quote(key.node_id);
        out += ",\"item_ref\":" + json_quote(key.item_ref);
        out += ",\"material\":" + json_quote(key.material);
        out += ",\"cumulative_kg\":" + json_quote(total.str());
        out += "}";
    }
    out += "]";

    out += ",\"late\":" + std::to_string(metrics_.late);

    out += ",\"ledger\":[";
    first = true;
    for (const auto& [key, mass] : ledger_.entries()) {
        if (!first) out += ",";
        first = false;
        out += "{\"from\":" + json_quote(key.from);
        out += ",\"to\":" + json_quote(key.to);
        out += ",\"material\":" + json_quote(key.material);
        out += ",\"window\":" + std::to_string(key.window);
        out += ",\"mass_kg\":" + json_quote(mass.str());
        out += "}";
    }
    out += "]";

    out += ",\"watermark_ms\":" + std::to_string(assigner_.watermark_ms());
    out += ",\"window_width_ms\":" + std::to_string(assigner_.window_width_ms());
    out += ",\"windows_finalized\":" + std::to_string(assigner_.finalized_count());
    out += "}";
    return out;
}

}  // namespace synchroflow::agg

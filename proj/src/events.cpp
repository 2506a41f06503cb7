#include "synchroflow/events.hpp"

#include <nlohmann/json.hpp>

#include "synchroflow/json_writer.hpp"

namespace synchroflow::events {

using nlohmann::json;

const char* kind_name(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::assembly_increment: return "assembly_increment";
        case EventKind::disassembly_extraction: return "disassembly_extraction";
        case EventKind::sort_transfer: return "sort_transfer";
        case EventKind::use_transfer: return "use_transfer";
        case EventKind::incineration_transfer: return "incineration_transfer";
    }
    return "use_transfer";
}

std::optional<EventKind> kind_from_name(std::string_view name) {
    if (name == "assembly_increment") return EventKind::assembly_increment;
    if (name == "disassembly_extraction") return EventKind::disassembly_extraction;
    if (name == "sort_transfer") return EventKind::sort_transfer;
    if (name == "use_transfer") return EventKind::use_transfer;
    if (name == "incineration_transfer") return EventKind::incineration_transfer;
    return std::nullopt;
}

std::string encode_event(const SynchroEvent& event) {
    std::string out = "{\"v\":1";
    out += ",\"node_id\":" + json_quote(event.node_id);
    out += ",\"seq\":" + std::to_string(event.seq);
    out += ",\"ts_ms\":" + std::to_string(event.ts_ms);
    out += ",\"kind\":" + json_quote(kind_name(event.kind));
    out += ",\"from\":" + json_quote(event.from);
    out += ",\"to\":" + json_quote(event.to);
    out += ",\"material\":" + json_quote(event.material);
    out += ",\"mass_kg\":" + json_quote(event.mass_kg.str());
    if (event.step) out += ",\"step\":" + std::to_string(*event.step);
    if (event.item_ref) out += ",\"item_ref\":" + json_quote(*event.item_ref);
    out += "}";
    return out;
}

namespace {

DecodedEvent fail(std::string code, std::string detail,
                  std::optional<uint64_t> seq = std::nullopt) {
    DecodedEvent result;
    result.error = std::move(code);
    result.detail = std::move(detail);
    result.seq = seq;
    return result;
}

bool get_u64(const json& obj, const char* key, uint64_t& out) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_unsigned()) return false;
    out = it->get<uint64_t>();
    return true;
}

bool get_string(const json& obj, const char* key, std::string& out) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
}

constexpr const char* kKnownKeys[] = {"v",    "node_id", "seq",      "ts_ms",
                                      "kind", "from",    "to",       "material",
                                      "mass_kg", "step", "item_ref"};

}  // namespace

DecodedEvent decode_event(std::string_view line) {
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) return fail("malformed_json", "line is not valid JSON");
    if (!obj.is_object()) return fail("malformed_json", "line is not a JSON object");

    std::optional<uint64_t> seq_hint;
    if (uint64_t s = 0; get_u64(obj, "seq", s)) seq_hint = s;

    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : kKnownKeys) {
            if (key == k) {
                known = true;
                break;
            }
        }
        if (!known) return fail("unknown_key", "unknown key at v=1: " + key, seq_hint);
    }

    auto v = obj.find("v");
    if (v == obj.end() || !v->is_number_integer())
        return fail("missing_field", "missing integer schema version \"v\"", seq_hint);
    if (v->get<int64_t>() != kWireVersion)
        return fail("unsupported_version",
                    "unsupported schema version " + v->dump(), seq_hint);

    SynchroEvent event;
    if (!get_string(obj, "node_id", event.node_id) || event.node_id.empty())
        return fail("missing_field", "node_id must be a non-empty string", seq_hint);
    if (!get_u64(obj, "seq", event.seq))
        return fail("missing_field", "seq must be an unsigned integer", seq_hint);
    if (!get_u64(obj, "ts_ms", event.ts_ms))
        return fail("missing_field", "ts_ms must be an unsigned integer", seq_hint);

    std::string kind_text;
    if (!get_string(obj, "kind", kind_text))
        return fail("missing_field", "kind must be a string", seq_hint);
    auto kind = kind_from_name(kind_text);
    if (!kind) return fail("unknown_kind", "unknown event kind: " + kind_text, seq_hint);
    event.kind = *kind;

    if (!get_string(obj, "from", event.from) || event.from.empty())
        return fail("missing_field", "from must be a non-empty string", seq_hint);
    if (!get_string(obj, "to", event.to) || event.to.empty())
        return fail("missing_field", "to must be a non-empty string", seq_hint);
    if (!get_string(obj, "material", event.material) || event.material.empty())
        return fail("missing_field", "material must be a non-empty string", seq_hint);

    std::string mass_text;
    if (!get_string(obj, "mass_kg", mass_text))
        return fail("missing_field", "mass_kg must be a decimal string", seq_hint);
    auto mass = Decimal::parse(mass_text);
    if (!mass)
        return fail("bad_mass", "mass_kg is not a decimal with <=6 fractional digits",
                    seq_hint);
    if (mass->is_negative()) return fail("negative_mass", "mass_kg must be >= 0", seq_hint);
    event.mass_kg = *mass;

    if (obj.contains("step")) {
        uint64_t step = 0;
        if (!get_u64(obj, "step", step))
            return fail("bad_field", "step must be an unsigned integer", seq_hint);
        event.step = step;
    }
    if (obj.contains("item_ref")) {
        std::string item_ref;
        if (!get_string(obj, "item_ref", item_ref))
            return fail("bad_field", "item_ref must be a string", seq_hint);
        event.item_ref = std::move(item_ref);
    }

    DecodedEvent result;
    result.seq = event.seq;
    result.event = std::move(event);
    return result;
}

std::vector<Violation> validate_event(const SynchroEvent& event,
                                      const mfa::ProcessGraph& graph) {
    using mfa::Stage;
    std::vector<Violation> violations;

    const auto* from = graph.find_process(event.from);
    const auto* to = graph.find_process(event.to);
    if (!from) violations.push_back({"unknown_process", "unknown process: " + event.from});
    if (!to) violations.push_back({"unknown_process", "unknown process: " + event.to});
    if (!graph.has_material(event.material))
        violations.push_back({"unknown_material", "unknown material: " + event.material});
    if (event.from == event.to)
        violations.push_back({"self_loop", "from and to name the same process"});
    if (event.mass_kg.is_negative())
        violations.push_back({"negative_mass", "mass_kg must be >= 0"});

    bool step_expected = event.kind == EventKind::assembly_increment;
    if (step_expected && !event.step)
        violations.push_back({"missing_step", "assembly_increment requires step"});
    if (!step_expected && event.step)
        violations.push_back({"unexpected_step", "step is only valid on assembly_increment"});
    if (step_expected && !event.item_ref)
        violations.push_back(
            {"missing_item_ref",
             "assembly_increment requires item_ref (cumulative totals are per item)"});

    // Stage consistency: each kind pins the stage on the side that names it.
    // Assembly builds into manufacturing or use, extraction lands in
    // disassembly, sorting moves material out of disassembly/sorting, and the
    // two plain transfers are pinned to their destination stage.
    if (from && to) {
        bool consistent = true;
        switch (event.kind) {
            case EventKind::assembly_increment:
                consistent = to->stage == Stage::manufacturing || to->stage == Stage::use;
                break;
            case EventKind::disassembly_extraction:
                consistent = to->stage == Stage::disassembly;
                break;
            case EventKind::sort_transfer:
                consistent =
                    from->stage == Stage::disassembly || from->stage == Stage::sorting;
                break;
            case EventKind::use_transfer:
                consistent = to->stage == Stage::use;
                break;
            case EventKind::incineration_transfer:
                consistent = to->stage == Stage::incineration;
                break;
        }
        if (!consistent)
            violations.push_back(
                {"kind_stage_mismatch",
                 std::string(kind_name(event.kind)) + " is inconsistent with stages " +
                     mfa::stage_name(from->stage) + " -> " + mfa::stage_name(to->stage)});
    }
    return violations;
}

}  // namespace synchroflow::events

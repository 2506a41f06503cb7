#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "synchroflow/error.hpp"
#include "synchroflow/json_writer.hpp"
#include "synchroflow/perception.hpp"

namespace synchroflow::perception {

using nlohmann::json;

void BillOfMaterials::set_entries(ComponentLabel label,
                                  std::vector<mfa::MaterialMass> entries) {
    for (const auto& entry : entries) {
        if (entry.mass_kg.is_negative())
            throw Error(Errc::negative_mass,
                        "BOM mass must be non-negative for material " + entry.material);
    }
    entries_[label] = std::move(entries);
}

const std::vector<mfa::MaterialMass>* BillOfMaterials::find(ComponentLabel label) const {
    auto it = entries_.find(label);
    return it == entries_.end() ? nullptr : &it->second;
}

Decimal BillOfMaterials::total_mass(ComponentLabel label) const {
    const auto* entries = find(label);
    if (!entries)
        throw Error(Errc::missing_bom_entry,
                    std::string("no BOM entry for label: ") + label_name(label));
    Decimal total;
    for (const auto& entry : *entries) total += entry.mass_kg;
    return total;
}

BillOfMaterials BillOfMaterials::from_json_text(const std::string& text) {
    json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error(Errc::bad_config, "BOM config must be a JSON object");

    BillOfMaterials bom;
    for (const auto& [key, value] : doc.items()) {
        auto label = label_from_name(key);
        if (!label)
            throw Error(Errc::unknown_label, "BOM label outside the 4-class schema: " + key);
        if (!value.is_array())
            throw Error(Errc::bad_config, "BOM entry for " + key + " must be an array");
        std::vector<mfa::MaterialMass> entries;
        for (const auto& item : value) {
            if (!item.is_object() || !item.contains("material") ||
                !item["material"].is_string() || !item.contains("mass_kg") ||
                !item["mass_kg"].is_string())
                throw Error(Errc::bad_config,
                            "BOM entries need string fields material and mass_kg");
            auto mass = Decimal::parse(item["mass_kg"].get<std::string>());
            if (!mass || mass->is_negative())
                throw Error(Errc::bad_config, "BOM mass_kg must be a non-negative decimal");
            entries.push_back({item["material"].get<std::string>(), *mass});
        }
        bom.set_entries(*label, std::move(entries));
    }
    return bom;
}

BillOfMaterials BillOfMaterials::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open BOM config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::string BillOfMaterials::to_json() const {
    std::string out = "{";
    bool first_label = true;
    for (const auto& [label, entries] : entries_) {
        if (!first_label) out.push_back(',');
        first_label = false;
        out += json_quote(label_name(label)) + ":[";
        bool first_entry = true;
        for (const auto& entry : entries) {
            if (!first_entry) out.push_back(',');
            first_entry = false;
            out += "{\"material\":" + json_quote(entry.material) +
                   ",\"mass_kg\":" + json_quote(entry.mass_kg.str()) + "}";
        }
        out += "]";
    }
    out += "}";
    return out;
}

std::vector<events::SynchroEvent> detections_to_events(
    const std::vector<BoundingBox>& boxes, const BillOfMaterials& bom,
    const DetectionEventOptions& options) {
    std::vector<events::SynchroEvent> result;
    uint64_t seq = options.seq_start;
    for (const auto& box : boxes) {
        if (box.confidence && *box.confidence < options.min_confidence) continue;
        const auto* entries = bom.find(box.label);
        if (!entries)
            throw Error(Errc::missing_bom_entry,
                        std::string("no BOM entry for label: ") + label_name(box.label));
        for (const auto& entry : *entries) {
            events::SynchroEvent event;
            event.node_id = options.node_id;
            event.seq = seq++;
            event.ts_ms = options.ts_ms;
            event.kind = events::EventKind::disassembly_extraction;
            event.from = options.from_process;
            event.to = options.to_process;
            event.material = entry.material;
            event.mass_kg = entry.mass_kg;
            result.push_back(std::move(event));
        }
    }
    return result;
}

}  // namespace synchroflow::perception

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synchroflow/decimal.hpp"
#include "synchroflow/events.hpp"

namespace synchroflow::perception {

// The closed 4-class label schema of the PC-desktop detector.
enum class ComponentLabel { cable, screw, fan, motherboard };

const char* label_name(ComponentLabel label) noexcept;
// Case-insensitive; anything outside the four classes is rejected.
std::optional<ComponentLabel> label_from_name(std::string_view name);

struct BoundingBox {
    ComponentLabel label = ComponentLabel::cable;
    int xmin = 0;
    int ymin = 0;
    int xmax = 0;
    int ymax = 0;
    std::optional<double> confidence;  // in [0,1] when coming from a detector

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct VocAnnotation {
    std::string filename;
    int width = 0;
    int height = 0;
    std::vector<BoundingBox> objects;

    friend bool operator==(const VocAnnotation&, const VocAnnotation&) = default;
};

// Parses a Pascal VOC annotation document (the supported subset: filename,
// size/{width,height}, object/{name,bndbox}). Unsupported elements are
// ignored. Throws Error with malformed_xml, unknown_label, degenerate_box or
// box_out_of_bounds.
VocAnnotation parse_voc(const std::string& xml_text);

// Deterministic serialization of the supported subset; parse(serialize(a)) == a.
std::string serialize_voc(const VocAnnotation& annotation);

enum class ContactStrategy { antipodal_grip, suction_quad, screwdriver_point };

const char* strategy_name(ContactStrategy strategy) noexcept;

struct ContactPlan {
    ContactStrategy strategy = ContactStrategy::screwdriver_point;
    std::vector<std::pair<int, int>> points;  // 2 antipodal, 4 suction, 1 screwdriver
};

// Gripper closing direction for antipodal grasps: vertical means the contacts
// sit on the top and bottom edges. Squares tie-break to vertical.
enum class ClosingAxis { vertical, horizontal };
ClosingAxis closing_axis(const BoundingBox& box);

// Contact geometry per class: cable/fan -> midpoints of the two longer sides,
// motherboard -> the four corners in (xmin,ymin),(xmax,ymin),(xmax,ymax),
// (xmin,ymax) order, screw -> the box center. Exact rational arithmetic,
// rounded half-up to integer pixels at output.
ContactPlan derive_contacts(const BoundingBox& box);

// Per component class: the constituent materials and their masses. Loaded
// from configuration; the shipped numbers are indicative examples only.
class BillOfMaterials {
public:
    void set_entries(ComponentLabel label, std::vector<mfa::MaterialMass> entries);
    const std::vector<mfa::MaterialMass>* find(ComponentLabel label) const;

    // Sum of all entry masses for the label; throws missing_bom_entry.
    Decimal total_mass(ComponentLabel label) const;

    const std::map<ComponentLabel, std::vector<mfa::MaterialMass>>& entries() const {
        return entries_;
    }

    // Config format: {"<label>": [{"material": "...", "mass_kg": "..."}]}.
    static BillOfMaterials from_json_text(const std::string& text);
    static BillOfMaterials load(const std::string& path);
    std::string to_json() const;

private:
    std::map<ComponentLabel, std::vector<mfa::MaterialMass>> entries_;
};

struct DetectionEventOptions {
    std::string node_id;
    uint64_t seq_start = 1;
    uint64_t ts_ms = 0;
    std::string from_process;
    std::string to_process;
    double min_confidence = 0.5;  // boxes below this produce no events
};

// One DisassemblyExtraction event per (box, BOM material entry); seq assigned
// consecutively from seq_start. Boxes carrying a confidence below the
// threshold are skipped. Throws missing_bom_entry naming the label.
std::vector<events::SynchroEvent> detections_to_events(
    const std::vector<BoundingBox>& boxes, const BillOfMaterials& bom,
    const DetectionEventOptions& options);

// SVG overlay: one class-colored rectangle per box (blue motherboard, yellow
// fan, red cable, green screw) with red contact markers — dots for grip and
// suction contacts, open circles for screwdriver positions. Byte-deterministic.
std::string render_overlay(const VocAnnotation& annotation,
                           const std::vector<ContactPlan>& plans);

}  // namespace synchroflow::perception

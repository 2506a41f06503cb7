#include "synchroflow/error.hpp"

namespace synchroflow {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::duplicate_process: return "duplicate_process";
        case Errc::duplicate_material: return "duplicate_material";
        case Errc::invalid_id: return "invalid_id";
        case Errc::unknown_process: return "unknown_process";
        case Errc::unknown_material: return "unknown_material";
        case Errc::self_loop: return "self_loop";
        case Errc::negative_mass: return "negative_mass";
        case Errc::invalid_window_range: return "invalid_window_range";
        case Errc::empty_area: return "empty_area";
        case Errc::unknown_label: return "unknown_label";
        case Errc::malformed_xml: return "malformed_xml";
        case Errc::box_out_of_bounds: return "box_out_of_bounds";
        case Errc::degenerate_box: return "degenerate_box";
        case Errc::missing_bom_entry: return "missing_bom_entry";
        case Errc::invalid_scenario: return "invalid_scenario";
        case Errc::bad_config: return "bad_config";
        case Errc::io_error: return "io_error";
        case Errc::overflow: return "overflow";
    }
    return "unknown_error";
}

}  // namespace synchroflow

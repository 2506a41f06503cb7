#pragma once

#include <string>
#include <string_view>

namespace synchroflow {

// JSON string escaping per RFC 8259 (control characters as \u00XX). All
// exported documents (wire lines, Sankey, bar series, snapshots) are composed
// by hand through this so their bytes are fully under our control;
// nlohmann::json is used only for parsing input.
std::string json_escape(std::string_view text);

// Returns the escaped text wrapped in double quotes.
std::string json_quote(std::string_view text);

}  // namespace synchroflow

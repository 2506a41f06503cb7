#pragma once

#include <stdexcept>
#include <string>

namespace synchroflow {

// Machine-readable error codes. The string form of each code is what appears
// in HTTP error bodies and CLI diagnostics.
enum class Errc {
    duplicate_process,
    duplicate_material,
    invalid_id,
    unknown_process,
    unknown_material,
    self_loop,
    negative_mass,
    invalid_window_range,
    empty_area,
    unknown_label,
    malformed_xml,
    box_out_of_bounds,
    degenerate_box,
    missing_bom_entry,
    invalid_scenario,
    bad_config,
    io_error,
    overflow,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Errc code() const noexcept { return code_; }
    const char* code_name() const noexcept { return errc_name(code_); }

private:
    Errc code_;
};

}  // namespace synchroflow

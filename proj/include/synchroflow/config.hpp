#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "synchroflow/material_flow.hpp"

namespace synchroflow::config {

// Parses {"processes": [{"id","stage","description"?}], "materials":
// [{"id","display_name"?}]} into a registered graph. Throws bad_config.
mfa::ProcessGraph graph_from_json(const nlohmann::json& doc);

nlohmann::json load_json_file(const std::string& path);

// Aggregator service settings. Sources, lowest to highest precedence:
// config file, SYNCHROFLOW_* environment variables, command-line flags.
struct ServiceConfig {
    std::string listen = "127.0.0.1:7600";   // TCP ingest, host:port
    std::string http = "127.0.0.1:7601";     // HTTP query endpoint, host:port
    std::string journal;                     // empty disables journaling
    std::string fsync = "always";            // "always" | "never"
    uint64_t window_ms = 60'000;
    uint64_t skew_allowance_ms = 5'000;
    mfa::ProcessGraph graph;
};

ServiceConfig service_config_from_json(const nlohmann::json& doc);

// Applies SYNCHROFLOW_LISTEN, SYNCHROFLOW_HTTP, SYNCHROFLOW_JOURNAL,
// SYNCHROFLOW_FSYNC, SYNCHROFLOW_WINDOW_MS and SYNCHROFLOW_SKEW_MS.
void apply_env_overrides(ServiceConfig& cfg);

struct HostPort {
    std::string host;
    uint16_t port = 0;
};

// Splits "host:port"; throws bad_config on anything else. Port 0 is legal
// and means "let the OS pick" — the service reports the bound port.
HostPort parse_host_port(const std::string& text);

}  // namespace synchroflow::config

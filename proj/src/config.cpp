#include "synchroflow/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "synchroflow/error.hpp"

namespace synchroflow::config {

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw Error(Errc::bad_config, what);
}

std::string require_string(const nlohmann::json& obj, const char* key,
                           const char* where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        bad(std::string(where) + ": missing or non-string \"" + key + "\"");
    }
    return it->get<std::string>();
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto doc = nlohmann::json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) bad(path + ": malformed JSON");
    return doc;
}

mfa::ProcessGraph graph_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) bad("graph: expected an object");
    mfa::ProcessGraph graph;

    auto procs = doc.find("processes");
    if (procs == doc.end() || !procs->is_array()) {
        bad("graph: missing \"processes\" array");
    }
    for (const auto& entry : *procs) {
        if (!entry.is_object()) bad("graph.processes: expected objects");
        mfa::ProcessNode node;
        node.id = require_string(entry, "id", "graph.processes");
        auto stage_name = require_string(entry, "stage", "graph.processes");
        auto stage = mfa::stage_from_name(stage_name);
        if (!stage) bad("graph.processes: unknown stage \"" + stage_name + "\"");
        node.stage = *stage;
        if (auto it = entry.find("description"); it != entry.end()) {
            if (!it->is_string()) bad("graph.processes: non-string description");
            node.description = it->get<std::string>();
        }
        graph.register_process(node);
    }

    auto mats = doc.find("materials");
    if (mats == doc.end() || !mats->is_array()) {
        bad("graph: missing \"materials\" array");
    }
    for (const auto& entry : *mats) {
        if (!entry.is_object()) bad("graph.materials: expected objects");
        mfa::Material material;
        material.id = require_string(entry, "id", "graph.materials");
        if (auto it = entry.find("display_name"); it != entry.end()) {
            if (!it->is_string()) bad("graph.materials: non-string display_name");
            material.display_name = it->get<std::string>();
        } else {
            material.display_name = material.id;
        }
        graph.register_material(material);
    }
    return graph;
}

ServiceConfig service_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) bad("config: expected an object");
    ServiceConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "listen" || key == "http" || key == "journal" ||
            key == "fsync") {
            if (!value.is_string()) bad("config." + key + ": expected a string");
            const auto text = value.get<std::string>();
            if (key == "listen") cfg.listen = text;
            else if (key == "http") cfg.http = text;
            else if (key == "journal") cfg.journal = text;
            else cfg.fsync = text;
        } else if (key == "window_ms" || key == "skew_allowance_ms") {
            if (!value.is_number_unsigned()) {
                bad("config." + key + ": expected a non-negative integer");
            }
            const auto n = value.get<uint64_t>();
            if (key == "window_ms") cfg.window_ms = n;
            else cfg.skew_allowance_ms = n;
        } else if (key == "graph") {
            cfg.graph = graph_from_json(value);
        } else {
            bad("config: unknown key \"" + key + "\"");
        }
    }
    if (cfg.window_ms == 0) bad("config.window_ms: must be positive");
    if (cfg.fsync != "always" && cfg.fsync != "never") {
        bad("config.fsync: expected \"always\" or \"never\"");
    }
    return cfg;
}

void apply_env_overrides(ServiceConfig& cfg) {
    auto text = [](const char* name) -> std::optional<std::string> {
        const char* value = std::getenv(name);
        if (value == nullptr || *value == '\0') return std::nullopt;
        return std::string(value);
    };
    auto number = [&text](const char* name) -> std::optional<uint64_t> {
        auto raw = text(name);
        if (!raw) return std::nullopt;
        uint64_t n = 0;
        for (char c : *raw) {
            if (c < '0' || c > '9') {
                bad(std::string(name) + ": expected a non-negative integer");
            }
            n = n * 10 + static_cast<uint64_t>(c - '0');
        }
        return n;
    };
    if (auto v = text("SYNCHROFLOW_LISTEN")) cfg.listen = *v;
    if (auto v = text("SYNCHROFLOW_HTTP")) cfg.http = *v;
    if (auto v = text("SYNCHROFLOW_JOURNAL")) cfg.journal = *v;
    if (auto v = text("SYNCHROFLOW_FSYNC")) {
        if (*v != "always" && *v != "never") {
            bad("SYNCHROFLOW_FSYNC: expected \"always\" or \"never\"");
        }
        cfg.fsync = *v;
    }
    if (auto v = number("SYNCHROFLOW_WINDOW_MS")) {
        if (*v == 0) bad("SYNCHROFLOW_WINDOW_MS: must be positive");
        cfg.window_ms = *v;
    }
    if (auto v = number("SYNCHROFLOW_SKEW_MS")) cfg.skew_allowance_ms = *v;
}

HostPort parse_host_port(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        bad("address \"" + text + "\": expected host:port");
    }
    HostPort hp;
    hp.host = text.substr(0, colon);
    uint32_t port = 0;
    for (size_t i = colon + 1; i < text.size(); ++i) {
        char c = text[i];
        if (c < '0' || c > '9') bad("address \"" + text + "\": bad port");
        port = port * 10 + static_cast<uint32_t>(c - '0');
        if (port > 65535) bad("address \"" + text + "\": port out of range");
    }
    hp.port = static_cast<uint16_t>(port);
    return hp;
}

}  // namespace synchroflow::config

#include "synchroflow/scenario.hpp"

#include <filesystem>
#include <map>
#include <set>

#include "synchroflow/config.hpp"
#include "synchroflow/error.hpp"

namespace synchroflow::sim {

namespace {

[[noreturn]] void invalid(const std::string& what) {
    throw Error(Errc::invalid_scenario, what);
}

uint64_t require_uint(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_unsigned()) {
        invalid(std::string("scenario: missing or bad \"") + key + "\"");
    }
    return it->get<uint64_t>();
}

std::string require_string(const nlohmann::json& obj, const char* key,
                           const char* where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        invalid(std::string(where) + ": missing or non-string \"" + key + "\"");
    }
    return it->get<std::string>();
}

double require_prob(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        invalid(std::string("scenario.network: missing or bad \"") + key + "\"");
    }
    return it->get<double>();
}

}  // namespace

const char* role_name(RobotRole role) {
    switch (role) {
        case RobotRole::manufacture: return "manufacture";
        case RobotRole::assemble: return "assemble";
        case RobotRole::disassemble: return "disassemble";
        case RobotRole::sort: return "sort";
    }
    return "?";
}

std::optional<RobotRole> role_from_name(std::string_view name) {
    if (name == "manufacture") return RobotRole::manufacture;
    if (name == "assemble") return RobotRole::assemble;
    if (name == "disassemble") return RobotRole::disassemble;
    if (name == "sort") return RobotRole::sort;
    return std::nullopt;
}

void validate_scenario(const ScenarioConfig& cfg) {
    if (cfg.window_ms == 0) invalid("window_ms must be positive");
    if (cfg.network.duplicate_prob < 0.0 || cfg.network.duplicate_prob > 1.0) {
        invalid("network.duplicate_prob must lie in [0, 1]");
    }
    if (cfg.network.loss_prob < 0.0 || cfg.network.loss_prob >= 1.0) {
        invalid("network.loss_prob must lie in [0, 1)");
    }
    if (cfg.recovery_fraction < Decimal{} ||
        cfg.recovery_fraction > Decimal::from_micro(Decimal::kScale)) {
        invalid("recovery_fraction must lie in [0, 1]");
    }
    if (cfg.nodes.empty()) invalid("at least one node is required");

    std::set<std::string> seen_ids;
    bool needs_product = false;
    for (const auto& node : cfg.nodes) {
        const std::string where = "node \"" + node.node_id + "\"";
        if (node.node_id.empty()) invalid("node_id must not be empty");
        if (!seen_ids.insert(node.node_id).second) {
            invalid("duplicate node_id \"" + node.node_id + "\"");
        }
        if (node.emit_period_ms == 0) {
            invalid(where + ": emit_period_ms must be positive");
        }
        auto check_process = [&](const std::string& id, const char* field) {
            if (cfg.graph.find_process(id) == nullptr) {
                invalid(where + ": " + field + " \"" + id +
                        "\" is not a registered process");
            }
        };
        check_process(node.from_process, "from");
        if (node.role == RobotRole::sort) {
            check_process(node.recover_to_process, "recover_to");
            check_process(node.incinerate_to_process, "incinerate_to");
        } else {
            check_process(node.to_process, "to");
            needs_product = true;
        }
    }
    if (needs_product && cfg.product.empty()) {
        invalid("product must list at least one component");
    }
    for (auto label : cfg.product) {
        const auto* entries = cfg.bom.find(label);
        if (entries == nullptr || entries->empty()) {
            invalid(std::string("bill of materials has no entry for \"") +
                    perception::label_name(label) + "\"");
        }
        for (const auto& entry : *entries) {
            if (cfg.graph.find_material(entry.material) == nullptr) {
                invalid("bill of materials references unregistered material \"" +
                        entry.material + "\"");
            }
        }
    }
}

ScenarioConfig scenario_from_json(const nlohmann::json& doc,
                                  const std::string& base_dir) {
    if (!doc.is_object()) invalid("scenario: expected an object");
    ScenarioConfig cfg;
    cfg.duration_ms = require_uint(doc, "duration_ms");
    cfg.window_ms = require_uint(doc, "window_ms");
    cfg.skew_allowance_ms = require_uint(doc, "skew_allowance_ms");

    auto net = doc.find("network");
    if (net == doc.end() || !net->is_object()) {
        invalid("scenario: missing \"network\" object");
    }
    cfg.network.reorder_window_ms = require_uint(*net, "reorder_window_ms");
    cfg.network.duplicate_prob = require_prob(*net, "duplicate_prob");
    cfg.network.loss_prob = require_prob(*net, "loss_prob");
    cfg.network.rng_seed = require_uint(*net, "seed");

    auto graph = doc.find("graph");
    if (graph == doc.end()) invalid("scenario: missing \"graph\"");
    cfg.graph = config::graph_from_json(*graph);

    auto bom = doc.find("bom");
    if (bom == doc.end()) invalid("scenario: missing \"bom\"");
    if (bom->is_string()) {
        auto path = std::filesystem::path(bom->get<std::string>());
        if (path.is_relative() && !base_dir.empty()) {
            path = std::filesystem::path(base_dir) / path;
        }
        cfg.bom = perception::BillOfMaterials::load(path.string());
    } else if (bom->is_object()) {
        cfg.bom = perception::BillOfMaterials::from_json_text(bom->dump());
    } else {
        invalid("scenario.bom: expected a path string or an inline object");
    }

    auto product = doc.find("product");
    if (product == doc.end() || !product->is_array()) {
        invalid("scenario: missing \"product\" array");
    }
    for (const auto& entry : *product) {
        if (!entry.is_string()) invalid("scenario.product: expected strings");
        auto label = perception::label_from_name(entry.get<std::string>());
        if (!label) {
            invalid("scenario.product: unknown component \"" +
                    entry.get<std::string>() + "\"");
        }
        cfg.product.push_back(*label);
    }

    auto fraction_text = require_string(doc, "recovery_fraction", "scenario");
    auto fraction = Decimal::parse(fraction_text);
    if (!fraction) invalid("scenario.recovery_fraction: bad decimal");
    cfg.recovery_fraction = *fraction;

    auto nodes = doc.find("nodes");
    if (nodes == doc.end() || !nodes->is_array()) {
        invalid("scenario: missing \"nodes\" array");
    }
    for (const auto& entry : *nodes) {
        if (!entry.is_object()) invalid("scenario.nodes: expected objects");
        RobotNodeConfig node;
        node.node_id = require_string(entry, "node_id", "scenario.nodes");
        auto role_text = require_string(entry, "role", "scenario.nodes");
        auto role = role_from_name(role_text);
        if (!role) invalid("scenario.nodes: unknown role \"" + role_text + "\"");
        node.role = *role;
        auto skew = entry.find("clock_skew_ms");
        if (skew == entry.end() || !skew->is_number_integer()) {
            invalid("scenario.nodes: missing or bad \"clock_skew_ms\"");
        }
        node.clock_skew_ms = skew->get<int64_t>();
        node.emit_period_ms = require_uint(entry, "emit_period_ms");
        node.from_process = require_string(entry, "from", "scenario.nodes");
        if (node.role == RobotRole::sort) {
            node.recover_to_process =
                require_string(entry, "recover_to", "scenario.nodes");
            node.incinerate_to_process =
                require_string(entry, "incinerate_to", "scenario.nodes");
        } else {
            node.to_process = require_string(entry, "to", "scenario.nodes");
        }
        cfg.nodes.push_back(std::move(node));
    }

    validate_scenario(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    auto doc = config::load_json_file(path);
    auto base = std::filesystem::path(path).parent_path().string();
    return scenario_from_json(doc, base);
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.duration_ms = 600'000;
    cfg.window_ms = 60'000;
    cfg.skew_allowance_ms = 5'000;
    cfg.network = NetworkModel{3'000, 0.1, 0.0, 42};

    cfg.graph.register_process({"mining", mfa::Stage::external,
                                "raw material boundary"});
    cfg.graph.register_process({"manufacturing", mfa::Stage::manufacturing,
                                "component manufacturing line"});
    cfg.graph.register_process({"use", mfa::Stage::use, "deployed products"});
    cfg.graph.register_process({"disassembly", mfa::Stage::disassembly,
                                "teardown cell"});
    cfg.graph.register_process({"incineration", mfa::Stage::incineration,
                                "energy recovery"});
    cfg.graph.register_material({"aluminum", "Aluminum"});
    cfg.graph.register_material({"copper", "Copper"});
    cfg.graph.register_material({"gold", "Gold"});
    cfg.graph.register_material({"plastic", "Plastic"});
    cfg.graph.register_material({"steel", "Steel"});

    using perception::ComponentLabel;
    auto mass = [](const char* text) { return *Decimal::parse(text); };
    cfg.bom.set_entries(ComponentLabel::motherboard,
                        {{"copper", mass("0.090")},
                         {"gold", mass("0.000300")},
                         {"plastic", mass("0.060")}});
    cfg.bom.set_entries(ComponentLabel::fan, {{"aluminum", mass("0.080")},
                                              {"plastic", mass("0.040")}});
    cfg.bom.set_entries(ComponentLabel::cable, {{"copper", mass("0.030")},
                                                {"plastic", mass("0.020")}});
    cfg.bom.set_entries(ComponentLabel::screw, {{"steel", mass("0.005")}});

    cfg.product = {ComponentLabel::motherboard, ComponentLabel::fan,
                   ComponentLabel::cable, ComponentLabel::cable,
                   ComponentLabel::screw, ComponentLabel::screw,
                   ComponentLabel::screw, ComponentLabel::screw};
    cfg.recovery_fraction = mass("0.7");

    RobotNodeConfig ro1;
    ro1.node_id = "ro1";
    ro1.role = RobotRole::manufacture;
    ro1.clock_skew_ms = 1'500;
    ro1.emit_period_ms = 7'000;
    ro1.from_process = "mining";
    ro1.to_process = "manufacturing";

    RobotNodeConfig ro2;
    ro2.node_id = "ro2";
    ro2.role = RobotRole::assemble;
    ro2.clock_skew_ms = -2'200;
    ro2.emit_period_ms = 5'000;
    ro2.from_process = "manufacturing";
    ro2.to_process = "use";

    RobotNodeConfig ro3;
    ro3.node_id = "ro3";
    ro3.role = RobotRole::disassemble;
    ro3.clock_skew_ms = 800;
    ro3.emit_period_ms = 4'000;
    ro3.from_process = "use";
    ro3.to_process = "disassembly";

    RobotNodeConfig sorter;
    sorter.node_id = "sorter";
    sorter.role = RobotRole::sort;
    sorter.clock_skew_ms = -400;
    sorter.emit_period_ms = 15'000;
    sorter.from_process = "disassembly";
    sorter.recover_to_process = "manufacturing";
    sorter.incinerate_to_process = "incineration";

    cfg.nodes = {ro1, ro2, ro3, sorter};
    validate_scenario(cfg);
    return cfg;
}

nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    nlohmann::json doc;
    doc["duration_ms"] = cfg.duration_ms;
    doc["window_ms"] = cfg.window_ms;
    doc["skew_allowance_ms"] = cfg.skew_allowance_ms;
    doc["network"] = {{"reorder_window_ms", cfg.network.reorder_window_ms},
                      {"duplicate_prob", cfg.network.duplicate_prob},
                      {"loss_prob", cfg.network.loss_prob},
                      {"seed", cfg.network.rng_seed}};

    nlohmann::json procs = nlohmann::json::array();
    for (const auto& [id, node] : cfg.graph.processes()) {
        nlohmann::json entry = {{"id", node.id},
                                {"stage", mfa::stage_name(node.stage)}};
        if (!node.description.empty()) entry["description"] = node.description;
        procs.push_back(std::move(entry));
    }
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& [id, material] : cfg.graph.materials()) {
        mats.push_back(nlohmann::json{{"id", material.id},
                                      {"display_name", material.display_name}});
    }
    doc["graph"] = {{"processes", std::move(procs)},
                    {"materials", std::move(mats)}};

    doc["bom"] = nlohmann::json::parse(cfg.bom.to_json());
    nlohmann::json product = nlohmann::json::array();
    for (auto label : cfg.product) product.push_back(perception::label_name(label));
    doc["product"] = std::move(product);
    doc["recovery_fraction"] = cfg.recovery_fraction.str();

    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : cfg.nodes) {
        nlohmann::json entry = {{"node_id", node.node_id},
                                {"role", role_name(node.role)},
                                {"clock_skew_ms", node.clock_skew_ms},
                                {"emit_period_ms", node.emit_period_ms},
                                {"from", node.from_process}};
        if (node.role == RobotRole::sort) {
            entry["recover_to"] = node.recover_to_process;
            entry["incinerate_to"] = node.incinerate_to_process;
        } else {
            entry["to"] = node.to_process;
        }
        nodes.push_back(std::move(entry));
    }
    doc["nodes"] = std::move(nodes);
    return doc;
}

}  // namespace synchroflow::sim

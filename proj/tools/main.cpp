// synchroflow — single entry point for the aggregator service, the cell
// simulator, VOC-to-contact-plan conversion, and offline journal exports.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "synchroflow/aggregator.hpp"
#include "synchroflow/config.hpp"
#include "synchroflow/error.hpp"
#include "synchroflow/json_writer.hpp"
#include "synchroflow/perception.hpp"
#include "synchroflow/scenario.hpp"
#include "synchroflow/service.hpp"
#include "synchroflow/simulator.hpp"

namespace {

using namespace synchroflow;

volatile std::sig_atomic_t g_signal = 0;

void handle_signal(int sig) { g_signal = sig; }

// 0 success, 1 runtime failure, 2 usage/config error.
int exit_code_for(Errc code) {
    switch (code) {
        case Errc::io_error:
        case Errc::overflow:
            return 1;
        default:
            return 2;
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(Errc::io_error, "short write to " + path);
}

void write_lines_file(const std::string& path,
                      const std::vector<std::string>& lines) {
    std::string content;
    for (const auto& line : lines) {
        content += line;
        content += '\n';
    }
    write_text_file(path, content);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> listen;
    std::optional<std::string> http;
    std::optional<std::string> journal;
    std::optional<uint64_t> window_ms;
    std::optional<uint64_t> skew_ms;
    std::optional<std::string> fsync;
};

// Precedence: built-in defaults < config file < environment < flags.
config::ServiceConfig resolve_service_config(const CommonFlags& flags) {
    config::ServiceConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = config::service_config_from_json(
            config::load_json_file(flags.config_path));
    }
    config::apply_env_overrides(cfg);
    if (flags.listen) cfg.listen = *flags.listen;
    if (flags.http) cfg.http = *flags.http;
    if (flags.journal) cfg.journal = *flags.journal;
    if (flags.window_ms) cfg.window_ms = *flags.window_ms;
    if (flags.skew_ms) cfg.skew_allowance_ms = *flags.skew_ms;
    if (flags.fsync) cfg.fsync = *flags.fsync;
    if (cfg.window_ms == 0) throw Error(Errc::bad_config, "window-ms must be positive");
    if (cfg.fsync != "always" && cfg.fsync != "never") {
        throw Error(Errc::bad_config, "fsync must be \"always\" or \"never\"");
    }
    if (cfg.graph.processes().empty()) {
        cfg.graph = sim::default_scenario().graph;  // built-in electronics cell
    }
    return cfg;
}

int cmd_serve(const CommonFlags& flags) {
    auto cfg = resolve_service_config(flags);
    svc::AggregatorService service(cfg);
    service.start();

    std::cout << "synchroflow aggregator up: ingest tcp://" << cfg.listen
              << " (port " << service.ingest_port() << "), queries http://"
              << cfg.http << " (port " << service.http_port() << ")\n";
    if (!cfg.journal.empty()) {
        std::cout << "journal " << cfg.journal << " (fsync=" << cfg.fsync
                  << "), replayed " << service.replayed() << " lines\n";
    } else {
        std::cout << "journal disabled\n";
    }
    std::cout.flush();

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (g_signal == 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    std::cerr << "signal " << static_cast<int>(g_signal)
              << " received, shutting down\n";
    service.stop();
    return 0;
}

struct SimulateFlags {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<uint64_t> duration_ms;
    std::string sent_path = "sent.ndjson";
    std::string delivered_path = "delivered.ndjson";
    bool json = false;
};

int cmd_simulate(const SimulateFlags& flags) {
    sim::ScenarioConfig scenario = flags.config_path.empty()
                                       ? sim::default_scenario()
                                       : sim::load_scenario(flags.config_path);
    if (flags.seed) scenario.network.rng_seed = *flags.seed;
    if (flags.duration_ms) scenario.duration_ms = *flags.duration_ms;

    const auto run = sim::run_scenario(scenario);
    write_lines_file(flags.sent_path, sim::lines_of(run.sent));
    write_lines_file(flags.delivered_path, sim::lines_of(run.delivered));

    const auto totals = sim::injected_totals(run.sent);
    if (flags.json) {
        std::string out = "{\"delivered\":" + std::to_string(run.delivered.size());
        out += ",\"duration_ms\":" + std::to_string(scenario.duration_ms);
        out += ",\"materials\":{";
        bool first = true;
        for (const auto& [material, mass] : totals) {
            if (!first) out += ",";
            first = false;
            out += json_quote(material) + ":" + json_quote(mass.str());
        }
        out += "},\"seed\":" + std::to_string(scenario.network.rng_seed);
        out += ",\"sent\":" + std::to_string(run.sent.size());
        out += "}";
        std::cout << out << "\n";
    } else {
        std::cout << "scenario: " << scenario.duration_ms << " ms, seed "
                  << scenario.network.rng_seed << ", " << scenario.nodes.size()
                  << " nodes\n";
        std::cout << "sent " << run.sent.size() << " lines -> "
                  << flags.sent_path << "\n";
        std::cout << "delivered " << run.delivered.size() << " lines -> "
                  << flags.delivered_path << "\n";
        std::cout << "injected mass per material:\n";
        for (const auto& [material, mass] : totals) {
            std::cout << "  " << material << "  " << mass.str() << " kg\n";
        }
    }
    return 0;
}

struct GraspFlags {
    std::string voc_path;
    std::string bom_path;
    std::string svg_path;
    std::string plans_path;
    std::string events_path;
    std::string node_id = "vision";
    uint64_t seq_start = 1;
    uint64_t ts_ms = 0;
    std::string from_process = "use";
    std::string to_process = "disassembly";
    double min_confidence = 0.5;
    bool json = false;
};

std::string plans_to_json(const perception::VocAnnotation& annotation,
                          const std::vector<perception::ContactPlan>& plans) {
    std::string out = "[";
    for (size_t i = 0; i < plans.size(); ++i) {
        if (i > 0) out += ",";
        const auto& box = annotation.objects[i];
        const auto& plan = plans[i];
        out += "{\"label\":" + json_quote(perception::label_name(box.label));
        out += ",\"box\":[" + std::to_string(box.xmin) + "," +
               std::to_string(box.ymin) + "," + std::to_string(box.xmax) + "," +
               std::to_string(box.ymax) + "]";
        out += ",\"strategy\":" + json_quote(perception::strategy_name(plan.strategy));
        out += ",\"points\":[";
        for (size_t p = 0; p < plan.points.size(); ++p) {
            if (p > 0) out += ",";
            out += "[" + std::to_string(plan.points[p].first) + "," +
                   std::to_string(plan.points[p].second) + "]";
        }
        out += "]}";
    }
    out += "]";
    return out;
}

int cmd_grasp(const GraspFlags& flags) {
    const auto annotation = perception::parse_voc(read_text_file(flags.voc_path));
    std::vector<perception::ContactPlan> plans;
    plans.reserve(annotation.objects.size());
    for (const auto& box : annotation.objects) {
        plans.push_back(perception::derive_contacts(box));
    }

    if (!flags.svg_path.empty()) {
        write_text_file(flags.svg_path, perception::render_overlay(annotation, plans));
    }
    if (!flags.plans_path.empty()) {
        write_text_file(flags.plans_path, plans_to_json(annotation, plans) + "\n");
    }
    if (!flags.events_path.empty()) {
        if (flags.bom_path.empty()) {
            throw Error(Errc::bad_config, "--events requires --bom");
        }
        const auto bom = perception::BillOfMaterials::load(flags.bom_path);
        perception::DetectionEventOptions options;
        options.node_id = flags.node_id;
        options.seq_start = flags.seq_start;
        options.ts_ms = flags.ts_ms;
        options.from_process = flags.from_process;
        options.to_process = flags.to_process;
        options.min_confidence = flags.min_confidence;
        const auto events =
            perception::detections_to_events(annotation.objects, bom, options);
        std::vector<std::string> lines;
        lines.reserve(events.size());
        for (const auto& event : events) lines.push_back(events::encode_event(event));
        write_lines_file(flags.events_path, lines);
    }

    std::map<std::string, size_t> by_label;
    for (const auto& box : annotation.objects) {
        ++by_label[perception::label_name(box.label)];
    }
    if (flags.json) {
        std::string out = "{\"boxes\":" + std::to_string(annotation.objects.size());
        out += ",\"by_label\":{";
        bool first = true;
        for (const auto& [label, count] : by_label) {
            if (!first) out += ",";
            first = false;
            out += json_quote(label) + ":" + std::to_string(count);
        }
        out += "},\"filename\":" + json_quote(annotation.filename);
        out += ",\"plans\":" + plans_to_json(annotation, plans);
        out += "}";
        std::cout << out << "\n";
    } else {
        std::cout << annotation.filename << ": " << annotation.width << "x"
                  << annotation.height << ", " << annotation.objects.size()
                  << " objects\n";
        for (size_t i = 0; i < plans.size(); ++i) {
            const auto& box = annotation.objects[i];
            std::cout << "  " << perception::label_name(box.label) << " ["
                      << box.xmin << "," << box.ymin << "," << box.xmax << ","
                      << box.ymax << "] -> "
                      << perception::strategy_name(plans[i].strategy) << " at";
            for (const auto& [x, y] : plans[i].points) {
                std::cout << " (" << x << "," << y << ")";
            }
            std::cout << "\n";
        }
    }
    return 0;
}

struct ExportFlags {
    CommonFlags common;
    std::string journal_path;
    std::string kind = "sankey";
    std::optional<uint64_t> lo;
    std::optional<uint64_t> hi;
    std::string area;
    std::string material;
    std::string out_path;
};

int cmd_export(const ExportFlags& flags) {
    auto cfg = resolve_service_config(flags.common);
    agg::Aggregator aggregator(cfg.graph, cfg.window_ms, cfg.skew_allowance_ms);

    std::ifstream in(flags.journal_path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open journal " + flags.journal_path);
    const size_t applied = aggregator.replay_stream(in);
    const uint64_t corrupt = aggregator.metrics().corrupt_journal;
    if (corrupt > 0) {
        std::cerr << "warning: skipped " << corrupt << " corrupt journal line"
                  << (corrupt == 1 ? "" : "s") << "\n";
    }

    std::string document;
    if (flags.kind == "sankey") {
        document = aggregator.sankey_json(flags.lo, flags.hi);
    } else if (flags.kind == "bars") {
        if (flags.area.empty() || flags.material.empty()) {
            throw Error(Errc::bad_config, "--kind bars requires --area and --material");
        }
        std::set<std::string> area;
        size_t start = 0;
        while (start <= flags.area.size()) {
            size_t comma = flags.area.find(',', start);
            if (comma == std::string::npos) comma = flags.area.size();
            std::string id = flags.area.substr(start, comma - start);
            if (!id.empty()) area.insert(std::move(id));
            start = comma + 1;
        }
        document = aggregator.bars_json(area, flags.material, flags.hi);
    } else if (flags.kind == "balance") {
        document = aggregator.balance_json(flags.hi);
    } else if (flags.kind == "snapshot") {
        document = aggregator.snapshot_json();
    } else if (flags.kind == "metrics") {
        document = aggregator.metrics_json();
    } else {
        throw Error(Errc::bad_config, "unknown export kind \"" + flags.kind + "\"");
    }

    if (flags.out_path.empty()) {
        std::cout << document << "\n";
    } else {
        write_text_file(flags.out_path, document + "\n");
    }
    if (applied == 0 && corrupt > 0) return 1;  // journal held nothing usable
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synchroflow: synchronized material-flow telemetry for robotic cells"};
    app.require_subcommand(1);

    CommonFlags serve_flags;
    auto* serve = app.add_subcommand("serve", "Run the aggregator service");
    serve->add_option("--config", serve_flags.config_path, "Service config JSON");
    serve->add_option("--listen", serve_flags.listen, "Ingest address host:port");
    serve->add_option("--http", serve_flags.http, "Query address host:port");
    serve->add_option("--journal", serve_flags.journal, "Write-ahead journal path");
    serve->add_option("--window-ms", serve_flags.window_ms, "Window width in ms");
    serve->add_option("--skew-ms", serve_flags.skew_ms, "Skew allowance in ms");
    serve->add_option("--fsync", serve_flags.fsync, "Journal fsync: always|never");

    SimulateFlags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "Run a robotic-cell scenario");
    simulate->add_option("--config", sim_flags.config_path, "Scenario JSON");
    simulate->add_option("--seed", sim_flags.seed, "Network RNG seed override");
    simulate->add_option("--duration-ms", sim_flags.duration_ms, "Duration override");
    simulate->add_option("--sent", sim_flags.sent_path, "Sent-log output path");
    simulate->add_option("--delivered", sim_flags.delivered_path,
                         "Delivered-log output path");
    simulate->add_flag("--json", sim_flags.json, "Machine-readable stdout");

    GraspFlags grasp_flags;
    auto* grasp = app.add_subcommand(
        "grasp", "Derive contact plans (and optionally events) from a VOC file");
    grasp->add_option("--voc", grasp_flags.voc_path, "VOC annotation XML")->required();
    grasp->add_option("--bom", grasp_flags.bom_path, "Bill-of-materials JSON");
    grasp->add_option("--svg", grasp_flags.svg_path, "Overlay SVG output path");
    grasp->add_option("--plans", grasp_flags.plans_path, "Contact-plan JSON output");
    grasp->add_option("--events", grasp_flags.events_path, "Event NDJSON output");
    grasp->add_option("--node-id", grasp_flags.node_id, "node_id for events");
    grasp->add_option("--seq-start", grasp_flags.seq_start, "First seq for events");
    grasp->add_option("--ts-ms", grasp_flags.ts_ms, "Timestamp for events");
    grasp->add_option("--from", grasp_flags.from_process, "Source process");
    grasp->add_option("--to", grasp_flags.to_process, "Destination process");
    grasp->add_option("--min-confidence", grasp_flags.min_confidence,
                      "Skip detections below this confidence");
    grasp->add_flag("--json", grasp_flags.json, "Machine-readable stdout");

    ExportFlags export_flags;
    auto* exp = app.add_subcommand("export", "Replay a journal and export a document");
    exp->add_option("--journal", export_flags.journal_path, "Journal path")->required();
    exp->add_option("--kind", export_flags.kind,
                    "sankey|bars|balance|snapshot|metrics");
    exp->add_option("--lo", export_flags.lo, "Lowest window index");
    exp->add_option("--hi", export_flags.hi, "Highest window index");
    exp->add_option("--area", export_flags.area, "Comma-separated processes (bars)");
    exp->add_option("--material", export_flags.material, "Material id (bars)");
    exp->add_option("--config", export_flags.common.config_path, "Service config JSON");
    exp->add_option("--window-ms", export_flags.common.window_ms, "Window width in ms");
    exp->add_option("--skew-ms", export_flags.common.skew_ms, "Skew allowance in ms");
    exp->add_option("--out", export_flags.out_path, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (serve->parsed()) return cmd_serve(serve_flags);
        if (simulate->parsed()) return cmd_simulate(sim_flags);
        if (grasp->parsed()) return cmd_grasp(grasp_flags);
        if (exp->parsed()) return cmd_export(export_flags);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

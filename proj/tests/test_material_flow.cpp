#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "synchroflow/error.hpp"
#include "synchroflow/material_flow.hpp"

#include "oracles.hpp"

using namespace synchroflow;
using namespace synchroflow::mfa;

namespace {

ProcessGraph cell_graph() {
    ProcessGraph g;
    g.register_process({"mining", Stage::external, "boundary"});
    g.register_process({"manufacturing", Stage::manufacturing, ""});
    g.register_process({"use", Stage::use, ""});
    g.register_process({"disassembly", Stage::disassembly, ""});
    g.register_process({"incineration", Stage::incineration, ""});
    g.register_material({"copper", "Copper"});
    g.register_material({"steel", "Steel"});
    return g;
}

Decimal kg(const char* text) { return *Decimal::parse(text); }

}  // namespace

TEST_CASE("graph rejects duplicate and malformed registrations") {
    ProcessGraph g;
    g.register_process({"use", Stage::use, ""});
    CHECK_THROWS_WITH_AS(g.register_process({"use", Stage::use, ""}),
                         doctest::Contains("already registered"), Error);
    CHECK_THROWS_AS(g.register_process({"", Stage::use, ""}), Error);
    CHECK_THROWS_AS(g.register_process({"has space", Stage::use, ""}), Error);
    g.register_material({"copper", "Copper"});
    CHECK_THROWS_AS(g.register_material({"copper", "Copper again"}), Error);
    CHECK_THROWS_AS(g.register_material({"bad\tid", ""}), Error);
}

TEST_CASE("apply_flow validates its inputs") {
    FlowLedger ledger(cell_graph(), 60'000);
    const MaterialMass copper{"copper", kg("1.5")};
    CHECK_THROWS_AS(ledger.apply_flow("nowhere", "use", copper, 0), Error);
    CHECK_THROWS_AS(ledger.apply_flow("use", "nowhere", copper, 0), Error);
    CHECK_THROWS_AS(ledger.apply_flow("use", "use", copper, 0), Error);
    CHECK_THROWS_AS(ledger.apply_flow("use", "disassembly",
                                      MaterialMass{"unobtainium", kg("1")}, 0),
                    Error);
    CHECK_THROWS_AS(ledger.apply_flow("use", "disassembly",
                                      MaterialMass{"copper", kg("-0.1")}, 0),
                    Error);
    CHECK(ledger.entries().empty());  // failed applies leave no trace
}

TEST_CASE("stock accumulates inflow minus outflow through a window") {
    FlowLedger ledger(cell_graph(), 60'000);
    ledger.apply_flow("mining", "manufacturing", {"copper", kg("2")}, 0);
    ledger.apply_flow("manufacturing", "use", {"copper", kg("0.5")}, 1);
    ledger.apply_flow("manufacturing", "use", {"copper", kg("0.25")}, 2);

    CHECK(ledger.stock_at("manufacturing", "copper", 0) == kg("2"));
    CHECK(ledger.stock_at("manufacturing", "copper", 1) == kg("1.5"));
    CHECK(ledger.stock_at("manufacturing", "copper", 2) == kg("1.25"));
    CHECK(ledger.stock_at("use", "copper", 2) == kg("0.75"));
    // Window 5 has no flows; the cumulative stock persists.
    CHECK(ledger.stock_at("use", "copper", 5) == kg("0.75"));
    // The external source goes negative: it only ever loses mass.
    CHECK(ledger.stock_at("mining", "copper", 2) == kg("-2"));
    CHECK(ledger.stock_at("use", "steel", 2).is_zero());
}

TEST_CASE("sankey aggregates a window range and omits zero links") {
    FlowLedger ledger(cell_graph(), 60'000);
    ledger.apply_flow("mining", "manufacturing", {"copper", kg("1")}, 0);
    ledger.apply_flow("mining", "manufacturing", {"copper", kg("2")}, 1);
    ledger.apply_flow("mining", "manufacturing", {"copper", kg("4")}, 2);
    ledger.apply_flow("manufacturing", "use", {"steel", kg("0")}, 1);

    auto doc = ledger.sankey_between(1, 2);
    REQUIRE(doc.links.size() == 1);  // the zero steel link is omitted
    CHECK(doc.links[0].from == "mining");
    CHECK(doc.links[0].to == "manufacturing");
    CHECK(doc.links[0].material == "copper");
    CHECK(doc.links[0].mass_kg == kg("6"));
    CHECK(doc.nodes.size() == 5);

    CHECK_THROWS_AS(ledger.sankey_between(3, 2), Error);
}

TEST_CASE("sankey document serializes canonically") {
    FlowLedger ledger(cell_graph(), 60'000);
    ledger.apply_flow("mining", "manufacturing", {"copper", kg("1.5")}, 0);
    const std::string json = ledger.sankey_between(0, 0).to_json();
    CHECK(json ==
          "{\"nodes\":["
          "{\"id\":\"disassembly\",\"stage\":\"disassembly\"},"
          "{\"id\":\"incineration\",\"stage\":\"incineration\"},"
          "{\"id\":\"manufacturing\",\"stage\":\"manufacturing\"},"
          "{\"id\":\"mining\",\"stage\":\"external\"},"
          "{\"id\":\"use\",\"stage\":\"use\"}"
          "],\"links\":["
          "{\"from\":\"mining\",\"to\":\"manufacturing\",\"material\":\"copper\","
          "\"mass_kg\":\"1.500000\"}"
          "]}");
}

TEST_CASE("registration order never shows in serialized output") {
    std::vector<ProcessNode> nodes = {
        {"mining", Stage::external, "boundary"},
        {"manufacturing", Stage::manufacturing, ""},
        {"use", Stage::use, ""},
        {"disassembly", Stage::disassembly, ""},
        {"incineration", Stage::incineration, ""},
    };
    std::sort(nodes.begin(), nodes.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });

    std::string reference;
    do {
        ProcessGraph g;
        for (const auto& node : nodes) g.register_process(node);
        g.register_material({"steel", "Steel"});
        g.register_material({"copper", "Copper"});
        FlowLedger ledger(std::move(g), 60'000);
        ledger.apply_flow("mining", "manufacturing", {"copper", kg("1")}, 0);
        ledger.apply_flow("manufacturing", "use", {"steel", kg("2")}, 0);
        const std::string json = ledger.sankey_between(0, 0).to_json();
        if (reference.empty()) reference = json;
        CHECK(json == reference);
    } while (std::next_permutation(
        nodes.begin(), nodes.end(),
        [](const auto& a, const auto& b) { return a.id < b.id; }));
}

TEST_CASE("1000 random flows applied in two orders serialize identically") {
    std::mt19937_64 rng(1234);
    const std::vector<std::string> procs = {"mining", "manufacturing", "use",
                                            "disassembly", "incineration"};
    const std::vector<std::string> mats = {"copper", "steel"};

    struct Flow {
        std::string from, to, material;
        int64_t micro;
        uint64_t window;
    };
    std::vector<Flow> flows;
    for (int i = 0; i < 1'000; ++i) {
        size_t a = rng() % procs.size();
        size_t b = rng() % procs.size();
        if (a == b) b = (b + 1) % procs.size();
        flows.push_back(Flow{procs[a], procs[b], mats[rng() % mats.size()],
                             static_cast<int64_t>(rng() % 5'000'000),
                             rng() % 8});
    }

    auto run = [&](const std::vector<Flow>& ordered) {
        FlowLedger ledger(cell_graph(), 60'000);
        for (const auto& f : ordered) {
            ledger.apply_flow(f.from, f.to,
                              {f.material, Decimal::from_micro(f.micro)}, f.window);
        }
        return ledger;
    };

    auto shuffled = flows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto ledger_a = run(flows);
    const auto ledger_b = run(shuffled);

    CHECK(ledger_a.sankey_between(0, 7).to_json() ==
          ledger_b.sankey_between(0, 7).to_json());
    CHECK(ledger_a.mass_balance_report(7).to_json() ==
          ledger_b.mass_balance_report(7).to_json());

    // Brute-force totals per (from, to, material) computed independently.
    std::map<std::tuple<std::string, std::string, std::string>, int64_t> expected;
    for (const auto& f : flows) expected[{f.from, f.to, f.material}] += f.micro;
    const auto doc = ledger_a.sankey_between(0, 7);
    std::map<std::tuple<std::string, std::string, std::string>, int64_t> actual;
    for (const auto& link : doc.links) {
        actual[{link.from, link.to, link.material}] = link.mass_kg.micro();
    }
    for (const auto& [key, micro] : expected) {
        if (micro == 0) continue;  // zero links are omitted from the document
        CHECK(actual[key] == micro);
    }
}

TEST_CASE("bar series walks cumulative area stock per window") {
    FlowLedger ledger(cell_graph(), 60'000);
    ledger.apply_flow("mining", "manufacturing", {"copper", kg("3")}, 0);
    ledger.apply_flow("manufacturing", "use", {"copper", kg("1")}, 1);
    ledger.apply_flow("manufacturing", "use", {"copper", kg("1")}, 3);

    // Area covering manufacturing only: gains 3, then loses 1 twice.
    auto series = ledger.bar_series({"manufacturing"}, "copper", 4);
    REQUIRE(series.size() == 5);
    CHECK(series[0].total_kg == kg("3"));
    CHECK(series[1].total_kg == kg("2"));
    CHECK(series[2].total_kg == kg("2"));  // empty window carries forward
    CHECK(series[3].total_kg == kg("1"));
    CHECK(series[4].total_kg == kg("1"));

    // Area covering both ends of an edge ignores internal transfers.
    auto both = ledger.bar_series({"manufacturing", "use"}, "copper", 3);
    CHECK(both[1].total_kg == kg("3"));
    CHECK(both[3].total_kg == kg("3"));

    CHECK(bar_series_to_json(series) ==
          "[{\"window\":0,\"total_kg\":\"3.000000\"},"
          "{\"window\":1,\"total_kg\":\"2.000000\"},"
          "{\"window\":2,\"total_kg\":\"2.000000\"},"
          "{\"window\":3,\"total_kg\":\"1.000000\"},"
          "{\"window\":4,\"total_kg\":\"1.000000\"}]");

    CHECK_THROWS_AS(ledger.bar_series({}, "copper", 4), Error);
    CHECK_THROWS_AS(ledger.bar_series({"nowhere"}, "copper", 4), Error);
    CHECK_THROWS_AS(ledger.bar_series({"use"}, "unobtainium", 4), Error);
}

TEST_CASE("balance report covers every interior process and stays residual-free") {
    FlowLedger ledger(cell_graph(), 60'000);
    std::mt19937_64 rng(99);
    const std::vector<std::string> procs = {"mining", "manufacturing", "use",
                                            "disassembly", "incineration"};
    for (int i = 0; i < 300; ++i) {
        size_t a = rng() % procs.size();
        size_t b = rng() % procs.size();
        if (a == b) continue;
        ledger.apply_flow(procs[a], procs[b],
                          {rng() % 2 ? "copper" : "steel",
                           Decimal::from_micro(static_cast<int64_t>(rng() % 900'000))},
                          rng() % 6);
    }
    const auto report = ledger.mass_balance_report(5);
    // 4 interior processes (mining is external) x 2 materials.
    CHECK(report.rows.size() == 8);
    CHECK(report.violations == 0);
    for (const auto& row : report.rows) {
        CHECK(row.residual_kg.is_zero());
        CHECK(row.stock_kg == row.inflow_kg - row.outflow_kg);
    }
}

TEST_CASE("max_window tracks the highest populated window") {
    FlowLedger ledger(cell_graph(), 60'000);
    CHECK(ledger.max_window() == 0);
    ledger.apply_flow("mining", "manufacturing", {"copper", kg("1")}, 4);
    ledger.apply_flow("mining", "manufacturing", {"copper", kg("1")}, 2);
    CHECK(ledger.max_window() == 4);
}

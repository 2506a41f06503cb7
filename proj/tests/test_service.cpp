#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "synchroflow/error.hpp"
#include "synchroflow/scenario.hpp"
#include "synchroflow/service.hpp"

using namespace synchroflow;

namespace {

config::ServiceConfig ephemeral_config() {
    config::ServiceConfig cfg;
    cfg.listen = "127.0.0.1:0";
    cfg.http = "127.0.0.1:0";
    cfg.graph = sim::default_scenario().graph;
    cfg.window_ms = 60'000;
    cfg.skew_allowance_ms = 5'000;
    return cfg;
}

std::string wire_line(const std::string& node, uint64_t seq, uint64_t ts,
                      events::EventKind kind, const std::string& from,
                      const std::string& to, const std::string& material,
                      const std::string& mass) {
    events::SynchroEvent event;
    event.node_id = node;
    event.seq = seq;
    event.ts_ms = ts;
    event.kind = kind;
    event.from = from;
    event.to = to;
    event.material = material;
    event.mass_kg = *Decimal::parse(mass);
    return events::encode_event(event);
}

// Minimal blocking line client for the ingest protocol.
class LineClient {
public:
    explicit LineClient(uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd_ >= 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        REQUIRE(::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr) == 1);
        REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr),
                          sizeof(addr)) == 0);
    }
    ~LineClient() {
        if (fd_ >= 0) ::close(fd_);
    }

    std::string request(const std::string& line) {
        std::string out = line + "\n";
        size_t sent = 0;
        while (sent < out.size()) {
            const ssize_t n = ::send(fd_, out.data() + sent, out.size() - sent, 0);
            REQUIRE(n > 0);
            sent += static_cast<size_t>(n);
        }
        std::string ack;
        char ch = 0;
        while (true) {
            const ssize_t n = ::recv(fd_, &ch, 1, 0);
            REQUIRE(n == 1);
            if (ch == '\n') break;
            ack.push_back(ch);
        }
        return ack;
    }

private:
    int fd_ = -1;
};

class TempPath {
public:
    explicit TempPath(const std::string& stem)
        : path_(std::filesystem::temp_directory_path() /
                (stem + "." + std::to_string(::getpid()) + ".ndjson")) {
        std::filesystem::remove(path_);
    }
    ~TempPath() { std::filesystem::remove(path_); }
    const std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

}  // namespace

TEST_CASE("the TCP front end acknowledges every line with a JSON ack") {
    auto cfg = ephemeral_config();
    svc::AggregatorService service(cfg);
    service.start();

    {
        LineClient client(service.ingest_port());
        const auto line =
            wire_line("ro1", 1, 10'000, events::EventKind::use_transfer,
                      "manufacturing", "use", "copper", "0.5");
        CHECK(client.request(line) == "{\"seq\":1,\"status\":\"applied\"}");
        CHECK(client.request(line) == "{\"seq\":1,\"status\":\"duplicate\"}");
        CHECK(client.request("definitely not json") ==
              "{\"seq\":null,\"status\":\"invalid\",\"error\":\"malformed_json\"}");

        // Lines may also arrive with CRLF endings.
        LineClient crlf(service.ingest_port());
        std::string second =
            wire_line("ro1", 2, 11'000, events::EventKind::use_transfer,
                      "manufacturing", "use", "copper", "0.25");
        CHECK(crlf.request(second + "\r") ==
              "{\"seq\":2,\"status\":\"applied\"}");
    }

    {
        std::lock_guard lock(service.mutex());
        CHECK(service.aggregator().metrics().accepted == 2);
        CHECK(service.aggregator().metrics().duplicates == 1);
        CHECK(service.aggregator().metrics().invalid == 1);
    }
    service.stop();
}

TEST_CASE("HTTP endpoints serve canonical aggregator bytes") {
    auto cfg = ephemeral_config();
    svc::AggregatorService service(cfg);
    service.start();

    {
        LineClient client(service.ingest_port());
        client.request(wire_line("ro1", 1, 10'000,
                                 events::EventKind::use_transfer,
                                 "manufacturing", "use", "copper", "0.5"));
        client.request(wire_line("sorter", 1, 70'000,
                                 events::EventKind::sort_transfer,
                                 "disassembly", "manufacturing", "gold",
                                 "0.001"));
    }

    httplib::Client http("127.0.0.1", service.http_port());

    std::string expect_sankey, expect_snapshot, expect_metrics, expect_balance;
    std::string expect_bars;
    {
        std::lock_guard lock(service.mutex());
        expect_sankey = service.aggregator().sankey_json({}, {});
        expect_snapshot = service.aggregator().snapshot_json();
        expect_metrics = service.aggregator().metrics_json();
        expect_balance = service.aggregator().balance_json({});
        expect_bars = service.aggregator().bars_json({"use"}, "copper", {});
    }

    auto sankey = http.Get("/sankey");
    REQUIRE(sankey);
    CHECK(sankey->status == 200);
    CHECK(sankey->body == expect_sankey);
    CHECK(sankey->get_header_value("Content-Type") == "application/json");

    auto snapshot = http.Get("/snapshot");
    REQUIRE(snapshot);
    CHECK(snapshot->body == expect_snapshot);

    auto metrics = http.Get("/metrics");
    REQUIRE(metrics);
    CHECK(metrics->body == expect_metrics);
    CHECK(nlohmann::json::parse(metrics->body)["accepted"] == 2);

    auto balance = http.Get("/balance");
    REQUIRE(balance);
    CHECK(balance->body == expect_balance);

    auto bars = http.Get("/bars?area=use&material=copper");
    REQUIRE(bars);
    CHECK(bars->status == 200);
    CHECK(bars->body == expect_bars);

    auto windowed = http.Get("/sankey?lo=0&hi=1");
    REQUIRE(windowed);
    CHECK(windowed->status == 200);
    CHECK(windowed->body == expect_sankey);

    service.stop();
}

TEST_CASE("HTTP errors come back as a structured envelope") {
    auto cfg = ephemeral_config();
    svc::AggregatorService service(cfg);
    service.start();

    httplib::Client http("127.0.0.1", service.http_port());

    auto missing_params = http.Get("/bars");
    REQUIRE(missing_params);
    CHECK(missing_params->status == 400);
    auto body = nlohmann::json::parse(missing_params->body);
    CHECK(body["error"]["code"] == "bad_config");
    CHECK(body["error"].contains("message"));

    auto unknown_material = http.Get("/bars?area=use&material=unobtainium");
    REQUIRE(unknown_material);
    CHECK(unknown_material->status == 400);
    CHECK(nlohmann::json::parse(unknown_material->body)["error"]["code"] ==
          "unknown_material");

    auto bad_window = http.Get("/sankey?lo=abc");
    REQUIRE(bad_window);
    CHECK(bad_window->status == 400);
    CHECK(nlohmann::json::parse(bad_window->body)["error"]["code"] ==
          "bad_config");

    auto inverted = http.Get("/sankey?lo=5&hi=1");
    REQUIRE(inverted);
    CHECK(inverted->status == 400);

    service.stop();
}

TEST_CASE("a restart replays the journal into identical state") {
    TempPath journal("synchroflow_service_restart");
    std::string snapshot_before, sankey_before;

    {
        auto cfg = ephemeral_config();
        cfg.journal = journal.str();
        cfg.fsync = "never";
        svc::AggregatorService service(cfg);
        service.start();
        CHECK(service.replayed() == 0);

        LineClient client(service.ingest_port());
        client.request(wire_line("ro1", 1, 10'000,
                                 events::EventKind::use_transfer,
                                 "manufacturing", "use", "copper", "0.5"));
        client.request(wire_line("ro1", 2, 70'000,
                                 events::EventKind::use_transfer,
                                 "manufacturing", "use", "plastic", "0.25"));
        client.request(wire_line("ro1", 2, 70'000,
                                 events::EventKind::use_transfer,
                                 "manufacturing", "use", "plastic", "0.25"));

        {
            std::lock_guard lock(service.mutex());
            snapshot_before = service.aggregator().snapshot_json();
            sankey_before = service.aggregator().sankey_json({}, {});
        }
        service.stop();
    }

    {
        auto cfg = ephemeral_config();
        cfg.journal = journal.str();
        svc::AggregatorService service(cfg);
        service.start();
        CHECK(service.replayed() == 2);  // the duplicate was never journaled

        httplib::Client http("127.0.0.1", service.http_port());
        auto snapshot = http.Get("/snapshot");
        REQUIRE(snapshot);
        CHECK(snapshot->body == snapshot_before);
        auto sankey = http.Get("/sankey");
        REQUIRE(sankey);
        CHECK(sankey->body == sankey_before);

        // New lines keep flowing into the same journal after the replay.
        LineClient client(service.ingest_port());
        CHECK(client.request(wire_line("ro1", 3, 80'000,
                                       events::EventKind::use_transfer,
                                       "manufacturing", "use", "gold",
                                       "0.001")) ==
              "{\"seq\":3,\"status\":\"applied\"}");
        service.stop();
    }

    {
        auto cfg = ephemeral_config();
        cfg.journal = journal.str();
        svc::AggregatorService service(cfg);
        service.start();
        CHECK(service.replayed() == 3);
        service.stop();
    }
}

TEST_CASE("concurrent ingest from several connections stays consistent") {
    auto cfg = ephemeral_config();
    svc::AggregatorService service(cfg);
    service.start();

    constexpr int kClients = 4;
    constexpr int kPerClient = 50;
    std::vector<std::thread> threads;
    for (int c = 0; c < kClients; ++c) {
        threads.emplace_back([&, c] {
            LineClient client(service.ingest_port());
            for (int i = 1; i <= kPerClient; ++i) {
                const auto ack = client.request(wire_line(
                    "node-" + std::to_string(c), static_cast<uint64_t>(i),
                    10'000 + static_cast<uint64_t>(i), events::EventKind::use_transfer,
                    "manufacturing", "use", "copper", "0.001"));
                CHECK(ack.find("\"status\":\"applied\"") != std::string::npos);
            }
        });
    }
    for (auto& thread : threads) thread.join();

    {
        std::lock_guard lock(service.mutex());
        CHECK(service.aggregator().metrics().accepted == kClients * kPerClient);
        CHECK(service.aggregator().metrics().invalid == 0);
        // 4 clients x 50 lines x 0.001 kg: the ledger holds exactly 0.2 kg.
        Decimal total;
        for (const auto& [key, mass] : service.aggregator().ledger().entries()) {
            total = total + mass;
        }
        CHECK(total.str() == "0.200000");
    }
    service.stop();
}

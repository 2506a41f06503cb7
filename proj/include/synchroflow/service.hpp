#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "synchroflow/aggregator.hpp"
#include "synchroflow/config.hpp"

namespace synchroflow::svc {

// Line-oriented TCP ingest front end. Clients send one wire line per '\n';
// the server answers each with a one-line JSON ack:
//   {"seq":<n|null>,"status":"applied|duplicate|invalid"[,"error":"<code>"]}
// All aggregator access is serialized through the shared mutex.
class TcpIngestServer {
public:
    TcpIngestServer(agg::Aggregator& aggregator, std::mutex& mutex);
    ~TcpIngestServer();

    TcpIngestServer(const TcpIngestServer&) = delete;
    TcpIngestServer& operator=(const TcpIngestServer&) = delete;

    // Binds and starts accepting. Port 0 picks an ephemeral port; read the
    // actual one back with port(). Throws Error(io_error / bad_config).
    void start(const std::string& host, uint16_t port);
    void stop();

    uint16_t port() const { return port_; }

private:
    void accept_loop();
    void serve_connection(int fd);

    agg::Aggregator& aggregator_;
    std::mutex& mutex_;
    std::atomic<bool> stopping_{false};
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::thread accept_thread_;
    std::mutex connections_mutex_;
    std::vector<std::thread> connections_;
};

// {"error":{"code":"...","message":"..."}}
std::string error_envelope(const std::string& code, const std::string& message);

// The full aggregator node: journal replay on startup, TCP ingest, and the
// HTTP query endpoints /sankey, /bars, /balance, /metrics and /snapshot.
class AggregatorService {
public:
    explicit AggregatorService(config::ServiceConfig cfg);
    ~AggregatorService();

    AggregatorService(const AggregatorService&) = delete;
    AggregatorService& operator=(const AggregatorService&) = delete;

    void start();
    void stop();

    uint16_t ingest_port() const { return tcp_->port(); }
    uint16_t http_port() const { return http_port_; }
    size_t replayed() const { return replayed_; }

    agg::Aggregator& aggregator() { return aggregator_; }
    std::mutex& mutex() { return mutex_; }

private:
    struct HttpState;

    config::ServiceConfig cfg_;
    agg::Aggregator aggregator_;
    std::mutex mutex_;
    std::unique_ptr<TcpIngestServer> tcp_;
    std::unique_ptr<HttpState> http_;
    std::thread http_thread_;
    uint16_t http_port_ = 0;
    size_t replayed_ = 0;
    bool started_ = false;
};

}  // namespace synchroflow::svc

#include "synchroflow/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <functional>

#include <httplib.h>

#include "synchroflow/error.hpp"
#include "synchroflow/json_writer.hpp"

namespace synchroflow::svc {

namespace {

in_addr resolve_ipv4(const std::string& host) {
    const std::string name = host == "localhost" ? "127.0.0.1" : host;
    in_addr addr{};
    if (inet_pton(AF_INET, name.c_str(), &addr) != 1) {
        throw Error(Errc::bad_config, "cannot parse IPv4 address \"" + host + "\"");
    }
    return addr;
}

void send_all(int fd, std::string_view data) {
    size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return;  // peer went away; nothing useful to do
        }
        sent += static_cast<size_t>(n);
    }
}

std::optional<uint64_t> parse_u64(const std::string& text) {
    if (text.empty() || text.size() > 19) return std::nullopt;
    uint64_t n = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        n = n * 10 + static_cast<uint64_t>(c - '0');
    }
    return n;
}

}  // namespace

std::string error_envelope(const std::string& code, const std::string& message) {
    return "{\"error\":{\"code\":" + json_quote(code) +
           ",\"message\":" + json_quote(message) + "}}";
}

TcpIngestServer::TcpIngestServer(agg::Aggregator& aggregator, std::mutex& mutex)
    : aggregator_(aggregator), mutex_(mutex) {}

TcpIngestServer::~TcpIngestServer() { stop(); }

void TcpIngestServer::start(const std::string& host, uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error(Errc::io_error, "socket() failed");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr = resolve_ipv4(host);
    addr.sin_port = htons(port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        int saved = errno;
        ::close(fd);
        throw Error(Errc::io_error, "cannot bind " + host + ":" +
                                        std::to_string(port) + ": " +
                                        std::strerror(saved));
    }
    if (::listen(fd, 64) != 0) {
        int saved = errno;
        ::close(fd);
        throw Error(Errc::io_error,
                    "listen() failed: " + std::string(std::strerror(saved)));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    listen_fd_ = fd;
    stopping_ = false;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void TcpIngestServer::stop() {
    if (listen_fd_ < 0) return;
    stopping_ = true;
    if (accept_thread_.joinable()) accept_thread_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;
    std::vector<std::thread> leftover;
    {
        std::lock_guard<std::mutex> guard(connections_mutex_);
        leftover.swap(connections_);
    }
    for (auto& t : leftover) {
        if (t.joinable()) t.join();
    }
}

void TcpIngestServer::accept_loop() {
    while (!stopping_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        int ready = ::poll(&pfd, 1, 200);
        if (ready <= 0) continue;
        int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) continue;
        timeval timeout{0, 200'000};  // keep reads short so stop() is prompt
        ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &timeout, sizeof timeout);
        std::lock_guard<std::mutex> guard(connections_mutex_);
        connections_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void TcpIngestServer::serve_connection(int fd) {
    std::string buffer;
    char chunk[4096];
    while (!stopping_) {
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n == 0) break;  // peer closed
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
            break;
        }
        buffer.append(chunk, static_cast<size_t>(n));
        size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            agg::IngestResult result;
            {
                std::lock_guard<std::mutex> guard(mutex_);
                result = aggregator_.ingest_line(line);
            }
            send_all(fd, result.ack_json() + "\n");
        }
    }
    ::close(fd);
}

struct AggregatorService::HttpState {
    httplib::Server server;
};

AggregatorService::AggregatorService(config::ServiceConfig cfg)
    : cfg_(std::move(cfg)),
      aggregator_(cfg_.graph, cfg_.window_ms, cfg_.skew_allowance_ms),
      tcp_(std::make_unique<TcpIngestServer>(aggregator_, mutex_)),
      http_(std::make_unique<HttpState>()) {}

AggregatorService::~AggregatorService() { stop(); }

void AggregatorService::start() {
    if (started_) return;

    if (!cfg_.journal.empty()) {
        replayed_ = aggregator_.replay_file(cfg_.journal);
        aggregator_.open_journal(cfg_.journal, cfg_.fsync == "always");
    }

    auto ingest_at = config::parse_host_port(cfg_.listen);
    tcp_->start(ingest_at.host, ingest_at.port);

    auto& server = http_->server;
    auto respond = [this](httplib::Response& res,
                          const std::function<std::string()>& body) {
        try {
            std::lock_guard<std::mutex> guard(mutex_);
            res.set_content(body(), "application/json");
        } catch (const Error& e) {
            res.status = 400;
            res.set_content(error_envelope(errc_name(e.code()), e.what()),
                            "application/json");
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(error_envelope("internal", e.what()),
                            "application/json");
        }
    };
    auto window_param = [](const httplib::Request& req,
                           const char* name) -> std::optional<uint64_t> {
        if (!req.has_param(name)) return std::nullopt;
        auto parsed = parse_u64(req.get_param_value(name));
        if (!parsed) {
            throw Error(Errc::bad_config, std::string("query parameter \"") +
                                              name +
                                              "\" must be a non-negative integer");
        }
        return parsed;
    };

    server.Get("/sankey", [this, respond, window_param](const httplib::Request& req,
                                                        httplib::Response& res) {
        respond(res, [&] {
            return aggregator_.sankey_json(window_param(req, "lo"),
                                           window_param(req, "hi"));
        });
    });
    server.Get("/bars", [this, respond, window_param](const httplib::Request& req,
                                                      httplib::Response& res) {
        respond(res, [&] {
            if (!req.has_param("area") || !req.has_param("material")) {
                throw Error(Errc::bad_config,
                            "/bars requires \"area\" and \"material\"");
            }
            std::set<std::string> area;
            const std::string raw = req.get_param_value("area");
            size_t start = 0;
            while (start <= raw.size()) {
                size_t comma = raw.find(',', start);
                if (comma == std::string::npos) comma = raw.size();
                std::string id = raw.substr(start, comma - start);
                if (!id.empty()) area.insert(std::move(id));
                start = comma + 1;
            }
            return aggregator_.bars_json(area, req.get_param_value("material"),
                                         window_param(req, "hi"));
        });
    });
    server.Get("/balance", [this, respond, window_param](const httplib::Request& req,
                                                         httplib::Response& res) {
        respond(res, [&] { return aggregator_.balance_json(window_param(req, "hi")); });
    });
    server.Get("/metrics", [this, respond](const httplib::Request&,
                                           httplib::Response& res) {
        respond(res, [&] { return aggregator_.metrics_json(); });
    });
    server.Get("/snapshot", [this, respond](const httplib::Request&,
                                            httplib::Response& res) {
        respond(res, [&] { return aggregator_.snapshot_json(); });
    });

    auto http_at = config::parse_host_port(cfg_.http);
    int bound_port = http_at.port;
    if (http_at.port == 0) {
        bound_port = server.bind_to_any_port(http_at.host);
        if (bound_port < 0) {
            throw Error(Errc::io_error, "cannot bind HTTP " + cfg_.http);
        }
    } else if (!server.bind_to_port(http_at.host, http_at.port)) {
        throw Error(Errc::io_error, "cannot bind HTTP " + cfg_.http);
    }
    http_port_ = static_cast<uint16_t>(bound_port);
    http_thread_ = std::thread([this] { http_->server.listen_after_bind(); });
    for (int i = 0; i < 5'000 && !http_->server.is_running(); ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    started_ = true;
}

void AggregatorService::stop() {
    if (!started_) return;
    tcp_->stop();
    http_->server.stop();
    if (http_thread_.joinable()) http_thread_.join();
    {
        std::lock_guard<std::mutex> guard(mutex_);
        aggregator_.close_journal();
    }
    started_ = false;
}

}  // namespace synchroflow::svc

#pragma once

#include <memory>
#include <string>
#include <thread>

#include "citysim/api.hpp"

namespace httplib {
class Server;
}

namespace citysim {

/// Player endpoints over HTTP:
///   POST /join         -> joined | error
///   GET  /state        -> latest snapshot
///   GET  /live         -> newline-delimited stream of protocol messages (?session=ID)
///   POST /live         -> propose | vote | leave, answered with ballot | ack | error
///   GET  /log          -> command log, one message per line
///   GET  /metrics      -> metrics table
class HttpServer {
public:
    explicit HttpServer(Simulation& sim);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds "host:port" (port 0 picks one) and serves on a background thread. Returns
    /// the bound port. Throws ConfigError.
    int start(const std::string& address);
    void stop();

private:
    Simulation& sim_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

} // namespace citysim

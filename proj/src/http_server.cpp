#include "citysim/http_server.hpp"

#include <sstream>

#include <httplib.h>

#include "citysim/errors.hpp"
#include "citysim/serialize.hpp"

namespace citysim {

namespace {

constexpr const char* kJson = "application/json";

int status_for(const nlohmann::json& reply) {
    if (reply.value("type", std::string{}) != "error") return 200;
    const std::string code = reply.value("code", std::string{});
    if (code == "UnknownSession") return 404;
    if (code == "MalformedLegislation" || code == "MalformedMessage" || code == "UnknownMessage") return 400;
    return 409;
}

void reply_json(httplib::Response& res, const nlohmann::json& body) {
    res.status = status_for(body);
    res.set_content(body.dump(), kJson);
}

} // namespace

HttpServer::HttpServer(Simulation& sim) : sim_(sim), server_(std::make_unique<httplib::Server>()) {
    auto& s = *server_;
    s.Post("/join", [this](const httplib::Request&, httplib::Response& res) {
        reply_json(res, sim_.handle(nlohmann::json{{"type", "join"}}));
    });
    s.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(sim_.state().dump(), kJson);
    });
    s.Post("/live", [this](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json command;
        try {
            command = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
            nlohmann::json err = api_message("error", sim_.step());
            err["code"] = "MalformedMessage";
            err["message"] = e.what();
            reply_json(res, err);
            return;
        }
        reply_json(res, sim_.handle(command));
    });
    s.Get("/live", [this](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::uint64_t> session;
        if (req.has_param("session")) session = std::stoull(req.get_param_value("session"));
        auto sub = sim_.subscribe(session);
        sub->push(sim_.state().dump());
        res.set_chunked_content_provider("application/x-ndjson", [sub](std::size_t, httplib::DataSink& sink) {
            while (!sub->closed()) {
                if (auto line = sub->next(200)) {
                    *line += '\n';
                    return sink.write(line->data(), line->size());
                }
                if (!sink.is_writable()) return false;
            }
            sink.done();
            return true;
        });
    });
    s.Get("/log", [this](const httplib::Request&, httplib::Response& res) {
        std::ostringstream out;
        write_command_log(out, sim_.command_log());
        res.set_content(out.str(), "application/x-ndjson");
    });
    s.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
        std::ostringstream out;
        write_metrics_csv(out, sim_.metrics());
        res.set_content(out.str(), "text/csv");
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) throw ConfigError("address must be host:port, got '" + address + "'");
    std::string host = address.substr(0, colon);
    if (host.empty()) host = "0.0.0.0";
    const int port = std::stoi(address.substr(colon + 1));
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw ConfigError("cannot listen on '" + address + "'");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    return bound;
}

void HttpServer::stop() {
    if (server_ && server_->is_running()) server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace citysim

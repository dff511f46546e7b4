#include "citysim/distributed.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "citysim/errors.hpp"
#include "citysim/serialize.hpp"

namespace citysim {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint32_t kMaxFrame = 1U << 30;

// Raised inside a step when a worker is gone; the arbiter rolls the step back.
struct StepAborted {};

int remaining_ms(Clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return left < 0 ? 0 : static_cast<int>(left);
}

std::pair<std::string, std::string> split_address(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) throw ConfigError("address must be host:port, got '" + address + "'");
    std::string host = address.substr(0, colon);
    if (host.empty()) host = "0.0.0.0";
    return {host, address.substr(colon + 1)};
}

addrinfo* resolve(const std::string& address, bool passive) {
    const auto [host, port] = split_address(address);
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw ConfigError("cannot resolve '" + address + "': " + ::gai_strerror(rc));
    }
    return res;
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

} // namespace

// ---- channel --------------------------------------------------------------------------

FrameChannel::FrameChannel(FrameChannel&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

FrameChannel& FrameChannel::operator=(FrameChannel&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

FrameChannel::~FrameChannel() { close(); }

void FrameChannel::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

void FrameChannel::send(const nlohmann::json& message) {
    if (fd_ < 0) throw WorkerLost("channel closed");
    const std::vector<std::uint8_t> body = nlohmann::json::to_msgpack(message);
    const auto n = static_cast<std::uint32_t>(body.size());
    std::vector<std::uint8_t> frame(4 + body.size());
    frame[0] = static_cast<std::uint8_t>(n >> 24);
    frame[1] = static_cast<std::uint8_t>(n >> 16);
    frame[2] = static_cast<std::uint8_t>(n >> 8);
    frame[3] = static_cast<std::uint8_t>(n);
    std::memcpy(frame.data() + 4, body.data(), body.size());
    std::size_t sent = 0;
    while (sent < frame.size()) {
        const ssize_t k = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
        if (k < 0 && errno == EINTR) continue;
        if (k <= 0) throw WorkerLost(std::string("send failed: ") + std::strerror(errno));
        sent += static_cast<std::size_t>(k);
    }
}

void FrameChannel::read_exact(std::uint8_t* out, std::size_t n, int timeout_ms) {
    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms < 0 ? 0 : timeout_ms);
    std::size_t got = 0;
    while (got < n) {
        pollfd pfd{fd_, POLLIN, 0};
        const int wait = timeout_ms < 0 ? -1 : remaining_ms(deadline);
        const int ready = ::poll(&pfd, 1, wait);
        if (ready < 0 && errno == EINTR) continue;
        if (ready < 0) throw WorkerLost(std::string("poll failed: ") + std::strerror(errno));
        if (ready == 0) throw WorkerTimeout("no message within " + std::to_string(timeout_ms) + " ms");
        const ssize_t k = ::recv(fd_, out + got, n - got, 0);
        if (k < 0 && errno == EINTR) continue;
        if (k <= 0) throw WorkerLost("peer closed the connection");
        got += static_cast<std::size_t>(k);
    }
}

nlohmann::json FrameChannel::recv(int timeout_ms) {
    if (fd_ < 0) throw WorkerLost("channel closed");
    std::uint8_t header[4];
    read_exact(header, 4, timeout_ms);
    const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                            (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
    if (n > kMaxFrame) throw ProtocolError("frame of " + std::to_string(n) + " bytes exceeds the limit");
    std::vector<std::uint8_t> body(n);
    read_exact(body.data(), n, timeout_ms);
    try {
        return nlohmann::json::from_msgpack(body);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("undecodable frame: ") + e.what());
    }
}

std::pair<FrameChannel, FrameChannel> channel_pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
        throw WorkerLost(std::string("socketpair failed: ") + std::strerror(errno));
    }
    return {FrameChannel(fds[0]), FrameChannel(fds[1])};
}

int listen_tcp(const std::string& address) {
    addrinfo* res = resolve(address, true);
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        throw ConfigError(std::string("socket failed: ") + std::strerror(errno));
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    const bool ok = ::bind(fd, res->ai_addr, res->ai_addrlen) == 0 && ::listen(fd, 64) == 0;
    ::freeaddrinfo(res);
    if (!ok) {
        const std::string why = std::strerror(errno);
        ::close(fd);
        throw ConfigError("cannot listen on '" + address + "': " + why);
    }
    return fd;
}

std::uint16_t bound_port(int listen_fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

FrameChannel accept_channel(int listen_fd, int timeout_ms) {
    pollfd pfd{listen_fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready <= 0) throw WorkerTimeout("no worker connected within " + std::to_string(timeout_ms) + " ms");
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd < 0) throw WorkerLost(std::string("accept failed: ") + std::strerror(errno));
    set_nodelay(fd);
    return FrameChannel(fd);
}

FrameChannel connect_tcp(const std::string& address, int timeout_ms) {
    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        addrinfo* res = resolve(address, false);
        const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        const bool ok = fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0;
        ::freeaddrinfo(res);
        if (ok) {
            set_nodelay(fd);
            return FrameChannel(fd);
        }
        if (fd >= 0) ::close(fd);
        if (Clock::now() >= deadline) throw WorkerLost("cannot connect to '" + address + "'");
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

// ---- messages -------------------------------------------------------------------------

nlohmann::json make_message(std::string_view type, std::uint32_t step) {
    return nlohmann::json{{"v", kProtocolVersion}, {"type", type}, {"step", step}};
}

namespace {

std::string checked_type(const nlohmann::json& m, int version) {
    if (!m.is_object() || !m.contains("type") || !m["type"].is_string()) {
        throw ProtocolError("message without a type");
    }
    if (!m.contains("v") || !m["v"].is_number_integer() || m["v"].get<int>() != version) {
        throw ProtocolVersionMismatch("expected protocol " + std::to_string(version) + ", got " +
                                      (m.contains("v") ? m["v"].dump() : std::string("none")));
    }
    return m["type"].get<std::string>();
}

nlohmann::json versioned(std::string_view type, std::uint32_t step, int version) {
    nlohmann::json m = make_message(type, step);
    m["v"] = version;
    return m;
}

nlohmann::json error_message(std::string_view code, const std::string& what, std::uint32_t step) {
    nlohmann::json m = make_message("Error", step);
    m["code"] = code;
    m["message"] = what;
    return m;
}

} // namespace

std::string message_type(const nlohmann::json& message) { return checked_type(message, kProtocolVersion); }

// ---- worker ---------------------------------------------------------------------------

std::uint32_t run_worker(FrameChannel& channel, const WorkerOptions& options) {
    nlohmann::json hello = versioned("RegisterWorker", 0, options.version);
    hello["name"] = options.name;
    channel.send(hello);

    WorldState world;
    Partition part;
    bool assigned = false;
    bool fault_fired = false;
    std::uint64_t epoch = 0;
    std::uint32_t confirmed = 0;
    for (;;) {
        nlohmann::json m;
        try {
            m = channel.recv();
        } catch (const WorkerLost&) {
            return confirmed;
        }
        const std::string type = checked_type(m, options.version);
        const auto step = m.at("step").get<std::uint32_t>();
        if (type == "AssignPartition") {
            world = world_from_json(m.at("world"));
            part = Partition{m.at("index").get<std::uint32_t>(), m.at("count").get<std::uint32_t>()};
            epoch = m.at("epoch").get<std::uint64_t>();
            assigned = true;
        } else if (type == "PhaseBegin") {
            if (!assigned) throw ProtocolError("PhaseBegin before AssignPartition");
            const auto phase = static_cast<Phase>(m.at("phase").get<int>());
            const WorkerFault& f = options.fault;
            if (!fault_fired && f.mode != WorkerFault::Mode::None && f.step == step && f.phase == phase) {
                fault_fired = true;
                if (f.mode == WorkerFault::Mode::Crash) {
                    channel.close();
                    return confirmed;
                }
                // Hang: stay silent until the arbiter gives up on us.
                try {
                    for (;;) channel.recv();
                } catch (const Error&) {
                    return confirmed;
                }
            }
            nlohmann::json reply = versioned("IntentSet", step, options.version);
            reply["epoch"] = epoch;
            reply["phase"] = static_cast<int>(phase);
            reply["intents"] = compute_intents(world, phase, part);
            channel.send(reply);
        } else if (type == "PhaseCommit") {
            const auto phase = static_cast<Phase>(m.at("phase").get<int>());
            commit_phase(world, phase, m.at("intents").get<IntentSet>());
        } else if (type == "StepDone") {
            nlohmann::json reply = versioned("StepDone", step, options.version);
            reply["epoch"] = epoch;
            reply["digest"] = world_digest(world);
            channel.send(reply);
            ++confirmed;
        } else if (type == "Command") {
            if (m.value("name", std::string{}) == "shutdown") return confirmed;
        } else if (type == "Error") {
            const std::string code = m.value("code", std::string{});
            if (code == "ProtocolVersionMismatch") throw ProtocolVersionMismatch(m.value("message", code));
            // Other errors (a rejected stale reply, for instance) need no action.
        } else {
            throw ProtocolError("unexpected message '" + type + "'");
        }
    }
}

// ---- arbiter --------------------------------------------------------------------------

Arbiter::Arbiter(std::vector<FrameChannel> workers, ArbiterOptions options) : options_(options) {
    for (auto& ch : workers) slots_.push_back(Slot{std::move(ch), {}, true});
}

Arbiter::~Arbiter() = default;

std::size_t Arbiter::live_workers() const {
    std::size_t n = 0;
    for (const auto& s : slots_) n += s.alive ? 1 : 0;
    return n;
}

void Arbiter::lose(Slot& slot) {
    slot.alive = false;
    slot.channel.close();
    ++stats_.workers_lost;
    throw StepAborted{};
}

void Arbiter::start(const WorldState& w) {
    for (auto& slot : slots_) {
        try {
            const nlohmann::json hello = slot.channel.recv(options_.timeout_ms);
            const std::string type = message_type(hello);
            if (type != "RegisterWorker") throw ProtocolError("expected RegisterWorker, got " + type);
            slot.name = hello.value("name", std::string{});
        } catch (const ProtocolVersionMismatch& e) {
            ++stats_.version_rejected;
            try {
                slot.channel.send(error_message(e.code(), e.what(), 0));
            } catch (const Error&) {
            }
            slot.alive = false;
            slot.channel.close();
        } catch (const Error&) {
            slot.alive = false;
            slot.channel.close();
        }
    }
    for (;;) {
        if (live_workers() == 0) throw WorkerLost("no compatible worker registered");
        try {
            assign(w);
            return;
        } catch (const StepAborted&) {
        }
    }
}

void Arbiter::assign(const WorldState& w) {
    const nlohmann::json world = world_to_json(w, WorldJsonOptions{true, false});
    const auto count = static_cast<std::uint32_t>(live_workers());
    ++epoch_;
    std::uint32_t index = 0;
    for (auto& slot : slots_) {
        if (!slot.alive) continue;
        nlohmann::json m = make_message("AssignPartition", w.step);
        m["index"] = index++;
        m["count"] = count;
        m["epoch"] = epoch_;
        m["world"] = world;
        try {
            slot.channel.send(m);
        } catch (const Error&) {
            lose(slot);
        }
    }
}

void Arbiter::broadcast(const nlohmann::json& message) {
    for (auto& slot : slots_) {
        if (!slot.alive) continue;
        try {
            slot.channel.send(message);
        } catch (const Error&) {
            lose(slot);
        }
    }
}

nlohmann::json Arbiter::await(Slot& slot, std::string_view type, Phase phase) {
    const auto deadline = Clock::now() + std::chrono::milliseconds(options_.timeout_ms);
    for (;;) {
        nlohmann::json m;
        try {
            m = slot.channel.recv(remaining_ms(deadline));
        } catch (const WorkerLost&) {
            lose(slot);
        } catch (const WorkerTimeout&) {
            lose(slot);
        }
        const std::string t = message_type(m);
        if (t == "Error") {
            throw ProtocolError("worker '" + slot.name + "' reported " + m.value("code", std::string{}) + ": " +
                                m.value("message", std::string{}));
        }
        if (t != type) throw ProtocolError("expected " + std::string(type) + ", got " + t);
        // Replies from before a reassignment carry an older epoch.
        const bool current = m.at("epoch").get<std::uint64_t>() == epoch_ && m.at("step").get<std::uint32_t>() == step_ &&
                             (type != "IntentSet" || m.at("phase").get<int>() == static_cast<int>(phase));
        if (current) return m;
        ++stats_.stale_rejected;
        try {
            slot.channel.send(error_message("StaleMessage", "reply for another step or phase", step_));
        } catch (const Error&) {
            lose(slot);
        }
    }
}

IntentSet Arbiter::gather(const WorldState& /*w*/, Phase phase) {
    nlohmann::json begin = make_message("PhaseBegin", step_);
    begin["phase"] = static_cast<int>(phase);
    broadcast(begin);
    IntentSet merged;
    merged.phase = phase;
    for (auto& slot : slots_) {
        if (!slot.alive) continue;
        const nlohmann::json reply = await(slot, "IntentSet", phase);
        merged.merge(reply.at("intents").get<IntentSet>());
    }
    return merged;
}

void Arbiter::committed(const WorldState& /*w*/, Phase phase, const IntentSet& intents) {
    nlohmann::json m = make_message("PhaseCommit", step_);
    m["phase"] = static_cast<int>(phase);
    m["intents"] = intents;
    broadcast(m);
}

void Arbiter::step_done(const WorldState& w) {
    const std::uint64_t digest = options_.verify_digests ? world_digest(w) : 0;
    nlohmann::json m = make_message("StepDone", step_);
    m["digest"] = digest;
    broadcast(m);
    for (auto& slot : slots_) {
        if (!slot.alive) continue;
        const nlohmann::json reply = await(slot, "StepDone", Phase::Metrics);
        if (options_.verify_digests && reply.at("digest").get<std::uint64_t>() != digest) {
            throw ProtocolError("replica of worker '" + slot.name + "' diverged at step " + std::to_string(step_));
        }
    }
}

MetricsRow Arbiter::step(WorldState& w, const std::vector<Legislation>& legislation) {
    const WorldState checkpoint = w;
    bool reassign = false;
    for (int attempt = 0;; ++attempt) {
        try {
            if (reassign) assign(w);
            step_ = w.step;
            return citysim::step(w, *this, legislation);
        } catch (const StepAborted&) {
            w = checkpoint;
            reassign = true;
            if (live_workers() == 0) throw WorkerLost("every worker was lost during step " + std::to_string(w.step));
            if (attempt >= options_.max_retries) {
                throw WorkerLost("step " + std::to_string(w.step) + " failed after " + std::to_string(attempt + 1) +
                                 " attempts");
            }
            ++stats_.retries;
        }
    }
}

void Arbiter::shutdown() {
    nlohmann::json m = make_message("Command", step_);
    m["name"] = "shutdown";
    for (auto& slot : slots_) {
        if (!slot.alive) continue;
        try {
            slot.channel.send(m);
        } catch (const Error&) {
        }
        slot.channel.close();
        slot.alive = false;
    }
}

std::vector<FrameChannel> accept_workers(int listen_fd, std::size_t count, int timeout_ms) {
    std::vector<FrameChannel> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(accept_channel(listen_fd, timeout_ms));
    return out;
}

// ---- local cluster --------------------------------------------------------------------

LocalCluster::LocalCluster(const WorldState& w, const ClusterOptions& options) {
    std::vector<FrameChannel> ends;
    for (std::size_t i = 0; i < options.workers; ++i) {
        auto [mine, theirs] = channel_pair();
        ends.push_back(std::move(mine));
        WorkerOptions wo;
        wo.name = "local-" + std::to_string(i);
        wo.version = options.worker_version;
        for (const auto& [index, fault] : options.faults) {
            if (index == i) wo.fault = fault;
        }
        threads_.emplace_back([ch = std::move(theirs), wo]() mutable {
            try {
                run_worker(ch, wo);
            } catch (const std::exception&) {
                // The arbiter sees the dropped channel; nothing to report from here.
            }
        });
    }
    arbiter_ = std::make_unique<Arbiter>(std::move(ends), options.arbiter);
    try {
        arbiter_->start(w);
    } catch (...) {
        stop();
        throw;
    }
}

LocalCluster::~LocalCluster() { stop(); }

void LocalCluster::stop() {
    if (arbiter_) arbiter_->shutdown();
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
    threads_.clear();
}

std::vector<MetricsRow> run_distributed(WorldState& w, std::uint32_t steps, std::size_t workers,
                                        const StepObserver& observer) {
    ClusterOptions options;
    options.workers = workers;
    LocalCluster cluster(w, options);
    std::vector<MetricsRow> rows;
    rows.reserve(steps);
    for (std::uint32_t i = 0; i < steps; ++i) {
        rows.push_back(cluster.arbiter().step(w));
        if (observer && !observer(w, rows.back())) break;
    }
    cluster.stop();
    return rows;
}

} // namespace citysim

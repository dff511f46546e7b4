#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "citysim/engine.hpp"

namespace citysim {

inline constexpr int kProtocolVersion = 1;

/// A byte stream carrying framed messages: a 4-byte big-endian length followed by a
/// msgpack document. Owns its descriptor.
class FrameChannel {
public:
    FrameChannel() = default;
    explicit FrameChannel(int fd) : fd_(fd) {}
    FrameChannel(FrameChannel&& other) noexcept;
    FrameChannel& operator=(FrameChannel&& other) noexcept;
    FrameChannel(const FrameChannel&) = delete;
    FrameChannel& operator=(const FrameChannel&) = delete;
    ~FrameChannel();

    /// Throws WorkerLost when the peer is gone.
    void send(const nlohmann::json& message);
    /// Waits up to `timeout_ms` (negative: forever). Throws WorkerTimeout or WorkerLost.
    nlohmann::json recv(int timeout_ms = -1);

    void close();
    bool is_open() const { return fd_ >= 0; }

private:
    void read_exact(std::uint8_t* out, std::size_t n, int timeout_ms);

    int fd_ = -1;
};

/// Two connected in-process ends.
std::pair<FrameChannel, FrameChannel> channel_pair();

/// Listens on "host:port" (port 0 picks one). Returns the descriptor.
int listen_tcp(const std::string& address);
std::uint16_t bound_port(int listen_fd);
/// Throws WorkerTimeout.
FrameChannel accept_channel(int listen_fd, int timeout_ms);
/// Retries for up to `timeout_ms` while the listener is not up yet. Throws WorkerLost.
FrameChannel connect_tcp(const std::string& address, int timeout_ms = 5000);

/// Envelope with the protocol version, message type and step.
nlohmann::json make_message(std::string_view type, std::uint32_t step);
/// Type of a received message. Throws ProtocolVersionMismatch or ProtocolError.
std::string message_type(const nlohmann::json& message);

struct WorkerFault {
    enum class Mode : std::uint8_t { None, Crash, Hang };
    Mode mode = Mode::None;
    std::uint32_t step = 0;
    Phase phase = Phase::PersonIntents;
};

struct WorkerOptions {
    std::string name = "worker";
    int version = kProtocolVersion;
    WorkerFault fault;
};

/// Registers with the arbiter at the other end of `channel` and serves it until shutdown
/// or disconnect. Returns the number of steps it confirmed.
std::uint32_t run_worker(FrameChannel& channel, const WorkerOptions& options = {});

struct ArbiterOptions {
    int timeout_ms = 10000;
    int max_retries = 3;
    bool verify_digests = true;
};

struct ArbiterStats {
    std::uint64_t retries = 0;
    std::uint64_t workers_lost = 0;
    std::uint64_t stale_rejected = 0;
    std::uint64_t version_rejected = 0;
};

/// Drives steps over a set of workers. Workers hold replicas of the world and compute the
/// intents of their partition; the arbiter merges them, commits, and broadcasts each
/// commit so the replicas follow. A lost or silent worker aborts the step, which is rolled
/// back and retried over the survivors.
class Arbiter final : public PhaseExecutor {
public:
    Arbiter(std::vector<FrameChannel> workers, ArbiterOptions options = {});
    ~Arbiter() override;

    /// Completes registration and hands every worker a partition and a replica of `w`.
    /// Throws WorkerLost when no compatible worker registers.
    void start(const WorldState& w);
    MetricsRow step(WorldState& w, const std::vector<Legislation>& legislation = {});
    /// Tells the workers to exit.
    void shutdown();

    std::size_t live_workers() const;
    const ArbiterStats& stats() const { return stats_; }

    IntentSet gather(const WorldState& w, Phase phase) override;
    void committed(const WorldState& w, Phase phase, const IntentSet& intents) override;
    void step_done(const WorldState& w) override;

private:
    struct Slot {
        FrameChannel channel;
        std::string name;
        bool alive = true;
    };

    void assign(const WorldState& w);
    void broadcast(const nlohmann::json& message);
    nlohmann::json await(Slot& slot, std::string_view type, Phase phase);
    [[noreturn]] void lose(Slot& slot);

    std::vector<Slot> slots_;
    ArbiterOptions options_;
    ArbiterStats stats_;
    std::uint32_t step_ = 0;
    std::uint64_t epoch_ = 0;
};

/// Accepts `count` worker connections on a listener.
std::vector<FrameChannel> accept_workers(int listen_fd, std::size_t count, int timeout_ms);

struct ClusterOptions {
    std::size_t workers = 1;
    ArbiterOptions arbiter;
    /// Fault for the worker at the given index.
    std::vector<std::pair<std::size_t, WorkerFault>> faults;
    /// Protocol version announced by every worker.
    int worker_version = kProtocolVersion;
};

/// An arbiter with worker threads connected over in-process channels.
class LocalCluster {
public:
    LocalCluster(const WorldState& w, const ClusterOptions& options);
    ~LocalCluster();
    LocalCluster(const LocalCluster&) = delete;
    LocalCluster& operator=(const LocalCluster&) = delete;

    Arbiter& arbiter() { return *arbiter_; }
    /// Stops the workers and waits for them.
    void stop();

private:
    std::unique_ptr<Arbiter> arbiter_;
    std::vector<std::thread> threads_;
};

/// `steps` steps of `w` over `workers` local workers.
std::vector<MetricsRow> run_distributed(WorldState& w, std::uint32_t steps, std::size_t workers,
                                        const StepObserver& observer = {});

} // namespace citysim

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "citysim/engine.hpp"

namespace citysim {

inline constexpr int kApiVersion = 1;

enum class Choice : std::uint8_t { Yes, No };
enum class BallotStatus : std::uint8_t { Open, Passed, Failed };

std::string_view choice_name(Choice c);
/// Accepts "yes"/"no". Throws MalformedLegislation.
Choice parse_choice(std::string_view s);
std::string_view ballot_status_name(BallotStatus s);

struct PlayerSession {
    std::uint64_t id = 0;
    PersonId citizen = 0;
    bool connected = true;

    friend bool operator==(const PlayerSession&, const PlayerSession&) = default;
};

struct Ballot {
    std::uint64_t id = 0;
    std::uint64_t proposer = 0;  ///< session
    Legislation legislation;
    std::uint32_t proposed_step = 0;
    std::uint32_t deadline = 0;
    std::map<std::uint64_t, Choice> votes;  ///< by session
    BallotStatus status = BallotStatus::Open;

    std::size_t yes() const;
    std::size_t no() const;

    friend bool operator==(const Ballot&, const Ballot&) = default;
};

/// Passes iff yes votes outnumber no votes; abstentions do not count and a tie fails.
bool ballot_passes(const Ballot& b);

/// Sessions, proposal turns and ballots. Every decision is a function of the command
/// sequence, the world it is applied to and the seed, so a command log replays exactly.
///
/// Turns go round-robin over the connected sessions. Each round starts at a seeded-random
/// session; a holder who does not propose within voting_window steps loses the turn.
class GovernanceService {
public:
    explicit GovernanceService(std::uint64_t seed = 0) : seed_(seed) {}

    /// Assigns a uniformly drawn alive citizen no session holds. Throws NoCitizensAvailable.
    PlayerSession join(const WorldState& w);
    /// Opens a ballot closing at step + voting_window. Throws UnknownSession, NotYourTurn
    /// or MalformedLegislation.
    const Ballot& propose(const WorldState& w, std::uint64_t session, Legislation legislation);
    /// Throws UnknownSession, BallotClosed or AlreadyVoted.
    void vote(const WorldState& w, std::uint64_t session, std::uint64_t ballot, Choice choice);
    /// Throws UnknownSession.
    void leave(std::uint64_t session);

    /// Closes every open ballot whose deadline has been reached and returns the passed
    /// legislation in ballot order.
    std::vector<Legislation> tally(std::uint32_t step);
    /// Disconnects sessions whose citizen has died. Returns them.
    std::vector<PlayerSession> end_dead_sessions(const WorldState& w);
    /// Applies turn timeouts and starts a new round when the last one is used up.
    void sync_turn(const WorldState& w);

    std::optional<std::uint64_t> turn() const;
    const std::map<std::uint64_t, PlayerSession>& sessions() const { return sessions_; }
    const std::vector<Ballot>& ballots() const { return ballots_; }
    std::vector<Ballot> open_ballots() const;

private:
    PlayerSession& live_session(std::uint64_t id);
    void start_round(const WorldState& w);

    std::uint64_t seed_ = 0;
    std::uint64_t next_session_ = 1;
    std::uint64_t joins_ = 0;
    std::uint64_t rounds_ = 0;
    std::map<std::uint64_t, PlayerSession> sessions_;
    std::vector<Ballot> ballots_;
    std::vector<std::uint64_t> turn_order_;
    std::size_t turn_pos_ = 0;
    std::uint32_t turn_since_ = 0;
};

struct PersonView {
    PersonId id = 0;
    std::string status;  ///< unemployed, employed, owner; deceased once dead
    std::string race;
    bool sick = false;
    bool alive = true;
    friend bool operator==(const PersonView&, const PersonView&) = default;
};

struct BuildingSlice {
    FirmId firm = 0;
    Sector sector = Sector::Hospital;
    friend bool operator==(const BuildingSlice&, const BuildingSlice&) = default;
};

struct BuildingView {
    BuildingId id = 0;
    std::vector<BuildingSlice> slices;
    friend bool operator==(const BuildingView&, const BuildingView&) = default;
};

struct Snapshot {
    std::uint32_t step = 0;
    std::vector<PersonView> persons;
    std::vector<BuildingView> buildings;
    std::optional<MetricsRow> metrics;
    std::vector<Ballot> ballots;  ///< open ones
    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

std::string_view employment_status(const Person& p);
Snapshot make_snapshot(const WorldState& w, const GovernanceService& g);

void to_json(nlohmann::json& j, const Ballot& b);
void from_json(const nlohmann::json& j, Ballot& b);
void to_json(nlohmann::json& j, const Snapshot& s);
void from_json(const nlohmann::json& j, Snapshot& s);

/// `{v, type, step}` envelope of the player protocol.
nlohmann::json api_message(std::string_view type, std::uint32_t step);

/// A subscriber's queue of outgoing protocol lines.
class Subscription {
public:
    explicit Subscription(std::optional<std::uint64_t> session) : session_(session) {}

    /// Waits up to `timeout_ms` for a line. Returns nullopt on timeout or once closed and empty.
    std::optional<std::string> next(int timeout_ms);
    void push(std::string line);
    void close();
    bool closed() const;
    std::optional<std::uint64_t> session() const { return session_; }

private:
    std::optional<std::uint64_t> session_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::string> lines_;
    bool closed_ = false;
};

/// Advances a world by one step given the legislation to drain.
using Stepper = std::function<MetricsRow(WorldState&, const std::vector<Legislation>&)>;
Stepper local_stepper();

/// A running world with players. Player commands take effect between steps only: they
/// mutate governance state, and passed legislation reaches the engine at the next step.
/// Thread-safe.
class Simulation {
public:
    explicit Simulation(WorldState world, Stepper stepper = local_stepper());

    /// Handles one player message (join, propose, vote, leave) and returns the reply
    /// (joined, ballot, ack or error). The command is logged with its receipt step.
    nlohmann::json handle(const nlohmann::json& command);
    /// Tallies due ballots, runs one step, ends sessions of dead citizens and publishes
    /// the new snapshot.
    MetricsRow advance();

    nlohmann::json state() const;
    std::vector<nlohmann::json> command_log() const;
    std::vector<MetricsRow> metrics() const;
    std::uint32_t step() const;
    /// Runs `fn` on the world under the lock.
    void inspect(const std::function<void(const WorldState&, const GovernanceService&)>& fn) const;

    /// Lines addressed to `session` plus every broadcast.
    std::shared_ptr<Subscription> subscribe(std::optional<std::uint64_t> session = std::nullopt);
    /// Closes every subscription.
    void close();

private:
    void publish(const nlohmann::json& message);

    mutable std::mutex mu_;
    WorldState world_;
    GovernanceService governance_;
    Stepper stepper_;
    std::vector<nlohmann::json> log_;
    nlohmann::json latest_;
    std::vector<std::weak_ptr<Subscription>> subscribers_;
};

/// Replays a command log against a fresh world: before each step, applies the commands
/// received at that step, in log order.
std::vector<MetricsRow> replay(WorldState world, const std::vector<nlohmann::json>& log, std::uint32_t steps,
                               Stepper stepper = local_stepper());

/// One JSON document per line.
std::vector<nlohmann::json> read_command_log(std::istream& in);
void write_command_log(std::ostream& out, const std::vector<nlohmann::json>& log);

} // namespace citysim

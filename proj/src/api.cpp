#include "citysim/api.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>

#include "citysim/agents.hpp"
#include "citysim/errors.hpp"
#include "citysim/rng.hpp"
#include "citysim/serialize.hpp"

namespace citysim {

namespace {

constexpr std::uint16_t kTagJoin = 0;
constexpr std::uint16_t kTagRound = 1;

std::uint32_t voting_window(const WorldState& w) {
    return static_cast<std::uint32_t>(std::max<long long>(1, std::llround(w.params.voting_window)));
}

} // namespace

std::string_view choice_name(Choice c) { return c == Choice::Yes ? "yes" : "no"; }

Choice parse_choice(std::string_view s) {
    if (s == "yes") return Choice::Yes;
    if (s == "no") return Choice::No;
    throw MalformedLegislation("vote must be 'yes' or 'no', got '" + std::string(s) + "'");
}

std::string_view ballot_status_name(BallotStatus s) {
    switch (s) {
    case BallotStatus::Open: return "open";
    case BallotStatus::Passed: return "passed";
    case BallotStatus::Failed: return "failed";
    }
    return "open";
}

std::size_t Ballot::yes() const {
    return static_cast<std::size_t>(
        std::count_if(votes.begin(), votes.end(), [](const auto& kv) { return kv.second == Choice::Yes; }));
}

std::size_t Ballot::no() const { return votes.size() - yes(); }

bool ballot_passes(const Ballot& b) { return b.yes() > b.no(); }

// ---- governance -----------------------------------------------------------------------

PlayerSession& GovernanceService::live_session(std::uint64_t id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end() || !it->second.connected) {
        throw UnknownSession("no connected session " + std::to_string(id));
    }
    return it->second;
}

PlayerSession GovernanceService::join(const WorldState& w) {
    std::vector<bool> taken(w.persons.size(), false);
    for (const auto& [id, s] : sessions_) {
        if (s.connected && s.citizen < taken.size()) taken[s.citizen] = true;
    }
    std::vector<PersonId> free;
    for (const auto& p : w.persons) {
        if (p.alive && !taken[p.id]) free.push_back(p.id);
    }
    if (free.empty()) throw NoCitizensAvailable("every alive citizen already has a player");
    RandomStream rng(StreamAddress{seed_, w.step, 0, StreamKind::Governance, static_cast<std::uint32_t>(joins_), kTagJoin});
    ++joins_;
    PlayerSession s{next_session_++, free[rng.uniform_int(free.size())], true};
    sessions_[s.id] = s;
    sync_turn(w);
    return s;
}

void GovernanceService::start_round(const WorldState& w) {
    turn_order_.clear();
    turn_pos_ = 0;
    for (const auto& [id, s] : sessions_) {
        if (s.connected) turn_order_.push_back(id);
    }
    if (turn_order_.empty()) return;
    RandomStream rng(StreamAddress{seed_, w.step, 0, StreamKind::Governance, static_cast<std::uint32_t>(rounds_), kTagRound});
    ++rounds_;
    const auto first = static_cast<std::ptrdiff_t>(rng.uniform_int(turn_order_.size()));
    std::rotate(turn_order_.begin(), turn_order_.begin() + first, turn_order_.end());
    turn_since_ = w.step;
}

void GovernanceService::sync_turn(const WorldState& w) {
    const std::uint32_t window = voting_window(w);
    if (turn_pos_ < turn_order_.size() && w.step >= turn_since_ + window) {
        ++turn_pos_;
        turn_since_ = w.step;
    }
    while (turn_pos_ < turn_order_.size() && !sessions_.at(turn_order_[turn_pos_]).connected) ++turn_pos_;
    if (turn_pos_ >= turn_order_.size()) start_round(w);
}

std::optional<std::uint64_t> GovernanceService::turn() const {
    if (turn_pos_ >= turn_order_.size()) return std::nullopt;
    return turn_order_[turn_pos_];
}

const Ballot& GovernanceService::propose(const WorldState& w, std::uint64_t session, Legislation legislation) {
    const PlayerSession& s = live_session(session);
    sync_turn(w);
    if (turn() != session) throw NotYourTurn("session " + std::to_string(session) + " does not hold the turn");
    legislation.proposer = s.citizen;
    legislation.deadline = w.step + voting_window(w);
    validate_legislation(legislation, w.params);
    Ballot b;
    b.id = ballots_.size() + 1;
    b.proposer = session;
    b.legislation = legislation;
    b.proposed_step = w.step;
    b.deadline = legislation.deadline;
    ballots_.push_back(std::move(b));
    ++turn_pos_;
    turn_since_ = w.step;
    sync_turn(w);
    return ballots_.back();
}

void GovernanceService::vote(const WorldState& w, std::uint64_t session, std::uint64_t ballot, Choice choice) {
    live_session(session);
    if (ballot == 0 || ballot > ballots_.size()) throw BallotClosed("no ballot " + std::to_string(ballot));
    Ballot& b = ballots_[ballot - 1];
    if (b.status != BallotStatus::Open || w.step >= b.deadline) {
        throw BallotClosed("ballot " + std::to_string(ballot) + " closed at step " + std::to_string(b.deadline));
    }
    if (b.votes.contains(session)) throw AlreadyVoted("session " + std::to_string(session) + " already voted");
    b.votes[session] = choice;
}

void GovernanceService::leave(std::uint64_t session) { live_session(session).connected = false; }

std::vector<Legislation> GovernanceService::tally(std::uint32_t step) {
    std::vector<Legislation> passed;
    for (auto& b : ballots_) {
        if (b.status != BallotStatus::Open || step < b.deadline) continue;
        b.status = ballot_passes(b) ? BallotStatus::Passed : BallotStatus::Failed;
        if (b.status == BallotStatus::Passed) passed.push_back(b.legislation);
    }
    return passed;
}

std::vector<PlayerSession> GovernanceService::end_dead_sessions(const WorldState& w) {
    std::vector<PlayerSession> ended;
    for (auto& [id, s] : sessions_) {
        if (s.connected && (s.citizen >= w.persons.size() || !w.persons[s.citizen].alive)) {
            s.connected = false;
            ended.push_back(s);
        }
    }
    return ended;
}

std::vector<Ballot> GovernanceService::open_ballots() const {
    std::vector<Ballot> out;
    for (const auto& b : ballots_) {
        if (b.status == BallotStatus::Open) out.push_back(b);
    }
    return out;
}

// ---- snapshots ------------------------------------------------------------------------

std::string_view employment_status(const Person& p) {
    if (!p.alive) return "deceased";
    if (p.is_owner()) return "owner";
    if (p.is_employed()) return "employed";
    return "unemployed";
}

Snapshot make_snapshot(const WorldState& w, const GovernanceService& g) {
    Snapshot s;
    s.step = w.step;
    s.persons.reserve(w.persons.size());
    for (const auto& p : w.persons) {
        s.persons.push_back(PersonView{p.id, std::string(employment_status(p)), p.demographics.race, p.sick, p.alive});
    }
    const auto occ = building_occupancy(w);
    for (std::size_t b = 0; b < occ.size(); ++b) {
        BuildingView v{static_cast<BuildingId>(b), {}};
        for (FirmId f : occ[b]) v.slices.push_back(BuildingSlice{f, w.firms[f].sector});
        s.buildings.push_back(std::move(v));
    }
    if (!w.metrics.empty()) s.metrics = w.metrics.back();
    s.ballots = g.open_ballots();
    return s;
}

void to_json(nlohmann::json& j, const Ballot& b) {
    nlohmann::json votes = nlohmann::json::object();
    for (const auto& [session, c] : b.votes) votes[std::to_string(session)] = choice_name(c);
    j = nlohmann::json{{"id", b.id},
                       {"proposer", b.proposer},
                       {"legislation", b.legislation},
                       {"proposed_step", b.proposed_step},
                       {"deadline", b.deadline},
                       {"votes", votes},
                       {"yes", b.yes()},
                       {"no", b.no()},
                       {"status", ballot_status_name(b.status)}};
}

void from_json(const nlohmann::json& j, Ballot& b) {
    b.id = j.at("id");
    b.proposer = j.at("proposer");
    b.legislation = j.at("legislation").get<Legislation>();
    b.proposed_step = j.at("proposed_step");
    b.deadline = j.at("deadline");
    b.votes.clear();
    for (const auto& [session, c] : j.at("votes").items()) {
        b.votes[std::stoull(session)] = parse_choice(c.get<std::string>());
    }
    const std::string status = j.at("status");
    b.status = status == "passed" ? BallotStatus::Passed : status == "failed" ? BallotStatus::Failed : BallotStatus::Open;
}

void to_json(nlohmann::json& j, const Snapshot& s) {
    nlohmann::json persons = nlohmann::json::array();
    for (const auto& p : s.persons) {
        persons.push_back({{"id", p.id}, {"status", p.status}, {"race", p.race}, {"sick", p.sick}, {"alive", p.alive}});
    }
    nlohmann::json buildings = nlohmann::json::array();
    for (const auto& b : s.buildings) {
        nlohmann::json slices = nlohmann::json::array();
        for (const auto& sl : b.slices) slices.push_back({{"firm", sl.firm}, {"sector", sector_name(sl.sector)}});
        buildings.push_back({{"id", b.id}, {"slices", slices}});
    }
    j = api_message("snapshot", s.step);
    j["persons"] = persons;
    j["buildings"] = buildings;
    j["metrics"] = s.metrics ? nlohmann::json(*s.metrics) : nlohmann::json(nullptr);
    j["ballots"] = s.ballots;
}

void from_json(const nlohmann::json& j, Snapshot& s) {
    s = Snapshot{};
    s.step = j.at("step");
    for (const auto& p : j.at("persons")) {
        s.persons.push_back(PersonView{p.at("id"), p.at("status"), p.at("race"), p.at("sick"), p.at("alive")});
    }
    for (const auto& b : j.at("buildings")) {
        BuildingView v{b.at("id"), {}};
        for (const auto& sl : b.at("slices")) {
            v.slices.push_back(BuildingSlice{sl.at("firm"), parse_sector(sl.at("sector").get<std::string>())});
        }
        s.buildings.push_back(std::move(v));
    }
    if (!j.at("metrics").is_null()) s.metrics = j.at("metrics").get<MetricsRow>();
    s.ballots = j.at("ballots").get<std::vector<Ballot>>();
}

nlohmann::json api_message(std::string_view type, std::uint32_t step) {
    return nlohmann::json{{"v", kApiVersion}, {"type", type}, {"step", step}};
}

// ---- subscriptions --------------------------------------------------------------------

std::optional<std::string> Subscription::next(int timeout_ms) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), [&] { return closed_ || !lines_.empty(); });
    if (lines_.empty()) return std::nullopt;
    std::string line = std::move(lines_.front());
    lines_.pop_front();
    return line;
}

void Subscription::push(std::string line) {
    {
        std::lock_guard lock(mu_);
        if (closed_) return;
        lines_.push_back(std::move(line));
    }
    cv_.notify_all();
}

void Subscription::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool Subscription::closed() const {
    std::lock_guard lock(mu_);
    return closed_;
}

// ---- simulation -----------------------------------------------------------------------

Stepper local_stepper() {
    return [](WorldState& w, const std::vector<Legislation>& legislation) { return step(w, legislation); };
}

Simulation::Simulation(WorldState world, Stepper stepper)
    : world_(std::move(world)), governance_(world_.seed), stepper_(std::move(stepper)) {}

namespace {

nlohmann::json citizen_view(const WorldState& w, PersonId id) {
    const Person& p = w.persons[id];
    UtilityParams u;
    u.consumer_good_utility = w.params.consumer_good_utility;
    u.base_min_consumption = w.params.base_min_consumption;
    return nlohmann::json{{"id", p.id},
                          {"name", p.name},
                          {"status", employment_status(p)},
                          {"race", p.demographics.race},
                          {"cash", p.cash.units()},
                          {"wage", p.wage.units()},
                          {"health", p.health},
                          {"sick", p.sick},
                          {"alive", p.alive},
                          {"quality_of_life", p.alive ? quality_of_life(p, u) : 0.0}};
}

nlohmann::json error_reply(const std::string& code, const std::string& what, std::uint32_t step) {
    nlohmann::json m = api_message("error", step);
    m["code"] = code;
    m["message"] = what;
    return m;
}

} // namespace

nlohmann::json Simulation::handle(const nlohmann::json& command) {
    std::lock_guard lock(mu_);
    const std::uint32_t step = world_.step;
    nlohmann::json entry = command;
    if (!entry.is_object()) entry = nlohmann::json{{"type", nullptr}, {"raw", command}};
    entry["step"] = step;
    entry["v"] = kApiVersion;
    log_.push_back(entry);

    std::optional<nlohmann::json> broadcast;
    nlohmann::json reply;
    try {
        const std::string type = entry.at("type").is_string() ? entry["type"].get<std::string>() : std::string{};
        if (type == "join") {
            const PlayerSession s = governance_.join(world_);
            reply = api_message("joined", step);
            reply["session"] = s.id;
            reply["citizen"] = citizen_view(world_, s.citizen);
        } else if (type == "propose") {
            const Ballot& b = governance_.propose(world_, entry.at("session").get<std::uint64_t>(),
                                                  entry.at("legislation").get<Legislation>());
            reply = api_message("ballot", step);
            reply["ballot"] = b;
            broadcast = reply;
        } else if (type == "vote") {
            const auto ballot = entry.at("ballot").get<std::uint64_t>();
            const Choice c = parse_choice(entry.at("choice").get<std::string>());
            governance_.vote(world_, entry.at("session").get<std::uint64_t>(), ballot, c);
            reply = api_message("ack", step);
            reply["ballot"] = ballot;
            reply["choice"] = choice_name(c);
        } else if (type == "leave") {
            governance_.leave(entry.at("session").get<std::uint64_t>());
            reply = api_message("ack", step);
        } else {
            reply = error_reply("UnknownMessage", "unsupported message type '" + type + "'", step);
        }
    } catch (const Error& e) {
        reply = error_reply(e.code(), e.what(), step);
    } catch (const nlohmann::json::exception& e) {
        reply = error_reply("MalformedMessage", e.what(), step);
    }
    if (broadcast) publish(*broadcast);
    return reply;
}

MetricsRow Simulation::advance() {
    std::lock_guard lock(mu_);
    std::vector<std::uint64_t> was_open;
    for (const auto& b : governance_.ballots()) {
        if (b.status == BallotStatus::Open) was_open.push_back(b.id);
    }
    const std::vector<Legislation> passed = governance_.tally(world_.step);
    for (std::uint64_t id : was_open) {
        const Ballot& b = governance_.ballots()[id - 1];
        if (b.status == BallotStatus::Open) continue;
        nlohmann::json m = api_message("ballot", world_.step);
        m["ballot"] = b;
        publish(m);
    }
    const MetricsRow row = stepper_(world_, passed);
    for (const PlayerSession& s : governance_.end_dead_sessions(world_)) {
        nlohmann::json m = error_reply("CitizenDied", "citizen " + std::to_string(s.citizen) + " has died", world_.step);
        m["session"] = s.id;
        m["rejoin"] = true;
        publish(m);
    }
    governance_.sync_turn(world_);
    bool listeners = false;
    for (const auto& weak : subscribers_) listeners = listeners || !weak.expired();
    if (listeners) publish(make_snapshot(world_, governance_));
    return row;
}

void Simulation::publish(const nlohmann::json& message) {
    const std::string line = message.dump();
    const std::optional<std::uint64_t> to =
        message.contains("session") && message["type"] == "error" ? std::optional(message["session"].get<std::uint64_t>())
                                                                  : std::nullopt;
    std::erase_if(subscribers_, [](const std::weak_ptr<Subscription>& w) { return w.expired(); });
    for (const auto& weak : subscribers_) {
        auto sub = weak.lock();
        if (!sub) continue;
        if (to && sub->session() != to) continue;
        sub->push(line);
    }
}

nlohmann::json Simulation::state() const {
    std::lock_guard lock(mu_);
    return make_snapshot(world_, governance_);
}

std::vector<nlohmann::json> Simulation::command_log() const {
    std::lock_guard lock(mu_);
    return log_;
}

std::vector<MetricsRow> Simulation::metrics() const {
    std::lock_guard lock(mu_);
    return world_.metrics;
}

std::uint32_t Simulation::step() const {
    std::lock_guard lock(mu_);
    return world_.step;
}

void Simulation::inspect(const std::function<void(const WorldState&, const GovernanceService&)>& fn) const {
    std::lock_guard lock(mu_);
    fn(world_, governance_);
}

std::shared_ptr<Subscription> Simulation::subscribe(std::optional<std::uint64_t> session) {
    auto sub = std::make_shared<Subscription>(session);
    std::lock_guard lock(mu_);
    subscribers_.push_back(sub);
    return sub;
}

void Simulation::close() {
    std::lock_guard lock(mu_);
    for (const auto& weak : subscribers_) {
        if (auto sub = weak.lock()) sub->close();
    }
    subscribers_.clear();
}

std::vector<MetricsRow> replay(WorldState world, const std::vector<nlohmann::json>& log, std::uint32_t steps,
                               Stepper stepper) {
    Simulation sim(std::move(world), std::move(stepper));
    std::size_t next = 0;
    std::vector<MetricsRow> rows;
    for (std::uint32_t i = 0; i < steps; ++i) {
        const std::uint32_t now = sim.step();
        while (next < log.size() && log[next].at("step").get<std::uint32_t>() <= now) {
            if (log[next]["step"].get<std::uint32_t>() < now) {
                throw ConfigError("command log is out of order at entry " + std::to_string(next));
            }
            sim.handle(log[next++]);
        }
        rows.push_back(sim.advance());
    }
    return rows;
}

std::vector<nlohmann::json> read_command_log(std::istream& in) {
    std::vector<nlohmann::json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad command log line " + std::to_string(out.size() + 1) + ": " + e.what());
        }
    }
    return out;
}

void write_command_log(std::ostream& out, const std::vector<nlohmann::json>& log) {
    for (const auto& m : log) out << m.dump() << '\n';
}

} // namespace citysim

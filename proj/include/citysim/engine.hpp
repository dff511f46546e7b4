#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citysim/agents.hpp"
#include "citysim/firms.hpp"
#include "citysim/government.hpp"
#include "citysim/popgen.hpp"
#include "citysim/socialgraph.hpp"
#include "citysim/world.hpp"

namespace citysim {

/// The canonical step pipeline. Values are wire-stable.
enum class Phase : std::uint8_t {
    Legislation = 1,
    PersonIntents = 2,
    FirmPlanning = 3,
    Labor = 4,
    Materials = 5,
    Equipment = 6,
    Production = 7,
    Pricing = 8,
    ConsumerGoods = 9,
    Contagion = 10,
    Healthcare = 11,
    Health = 12,
    Government = 13,
    Metrics = 14,
};

inline constexpr std::array<Phase, 14> kPhases = {
    Phase::Legislation, Phase::PersonIntents, Phase::FirmPlanning, Phase::Labor,     Phase::Materials,
    Phase::Equipment,   Phase::Production,    Phase::Pricing,      Phase::ConsumerGoods, Phase::Contagion,
    Phase::Healthcare,  Phase::Health,        Phase::Government,   Phase::Metrics,
};

std::string_view phase_name(Phase p);
/// Phases whose intents are computed per entity (and so may be spread over workers).
bool is_parallel(Phase p);

struct PersonIntent {
    PersonId person = 0;
    std::optional<FoundingChoice> found;
    bool seek_job = false;
    friend bool operator==(const PersonIntent&, const PersonIntent&) = default;
};

struct FirmPlanIntent {
    FirmId firm = 0;
    Plan plan;
    std::vector<PersonId> fired;  ///< overpaid and downsized, ascending
    friend bool operator==(const FirmPlanIntent&, const FirmPlanIntent&) = default;
};

struct ProductionIntent {
    FirmId firm = 0;
    ProductionResult result;
    friend bool operator==(const ProductionIntent&, const ProductionIntent&) = default;
};

struct PriceIntent {
    FirmId firm = 0;
    Money price;
    friend bool operator==(const PriceIntent&, const PriceIntent&) = default;
};

struct HealthIntent {
    PersonId person = 0;
    double food_stock = 0.0;
    double health = 0.0;
    bool alive = true;
    friend bool operator==(const HealthIntent&, const HealthIntent&) = default;
};

/// Everything one phase needs to commit. Only the vector belonging to the phase is used.
struct IntentSet {
    Phase phase = Phase::Legislation;
    std::vector<Legislation> legislation;
    std::vector<PersonIntent> persons;
    std::vector<FirmPlanIntent> plans;
    std::vector<ProductionIntent> production;
    std::vector<PriceIntent> prices;
    std::vector<PersonId> infections;
    std::vector<PersonId> patients;
    std::vector<HealthIntent> health;

    /// Appends another partition's intents.
    void merge(IntentSet&& other);
    /// Sorts every vector by entity id (legislation keeps its order).
    void canonicalize();

    friend bool operator==(const IntentSet&, const IntentSet&) = default;
};

/// Slice `index` of `count`: an entity belongs to the slice its salted id hash selects.
struct Partition {
    std::uint32_t index = 0;
    std::uint32_t count = 1;

    bool owns_person(PersonId id) const;
    bool owns_firm(FirmId id) const;
};

/// Computes the intents of the entities in `part` for a parallel phase against the world
/// as it stands. Pure: reads only `w` and counter-addressed random streams.
IntentSet compute_intents(const WorldState& w, Phase phase, const Partition& part);

/// Applies a phase: the merged intents of a parallel phase, or the serial work (markets,
/// settlement, metrics) of the others. Deterministic in (w, intents).
void commit_phase(WorldState& w, Phase phase, const IntentSet& intents);

/// How a step obtains intents; the local executor computes them in-process, the arbiter
/// gathers them from workers.
class PhaseExecutor {
public:
    virtual ~PhaseExecutor() = default;
    virtual IntentSet gather(const WorldState& w, Phase phase) = 0;
    virtual void committed(const WorldState& /*w*/, Phase /*phase*/, const IntentSet& /*intents*/) {}
    virtual void step_done(const WorldState& /*w*/) {}
};

class LocalExecutor final : public PhaseExecutor {
public:
    IntentSet gather(const WorldState& w, Phase phase) override;
};

struct StepOptions {
    bool check_invariants = true;
};

/// Runs the fourteen phases; `legislation` is applied in phase 1. Appends one MetricsRow
/// and advances the step counter. Returns the new row.
MetricsRow step(WorldState& w, PhaseExecutor& exec, const std::vector<Legislation>& legislation = {},
                const StepOptions& options = {});
MetricsRow step(WorldState& w, const std::vector<Legislation>& legislation = {});

/// Inputs for synthesizing a world.
struct WorldInputs {
    BayesNet net;
    NameTables names;
    FriendshipCoefficients coefficients;
    GraphBuildOptions graph;
};

/// The six-node demographic net, name tables and coefficients bundled with the library.
WorldInputs default_inputs();

/// Builds the initial city: population, friendship graph, buildings, starting firms
/// (each owned by a distinct random person, or the government when none is left) with
/// their starting staff, and the government.
WorldState init_world(const ScenarioConfig& sc, const WorldInputs& inputs, std::size_t population,
                      std::uint64_t seed);
WorldState init_world(const ScenarioConfig& sc, std::size_t population, std::uint64_t seed);

/// Called after every step with the new row; returning false stops the run.
using StepObserver = std::function<bool(const WorldState&, const MetricsRow&)>;

/// Steps `steps` times with the local executor.
std::vector<MetricsRow> run(WorldState& w, std::uint32_t steps, const StepObserver& observer = {});

/// Deterministic 64-bit digest of the replicated state (excludes the metrics history).
std::uint64_t world_digest(const WorldState& w);

} // namespace citysim

#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "citysim/entities.hpp"
#include "citysim/firms.hpp"
#include "citysim/params.hpp"
#include "citysim/socialgraph.hpp"

namespace citysim {

/// Reference prices and wages from the end of the previous step.
struct MarketStats {
    Money mean_wage;
    std::array<Money, 4> mean_price{};     ///< by sector index
    std::array<double, 4> mean_profit{};   ///< by sector index, currency units

    friend bool operator==(const MarketStats&, const MarketStats&) = default;
};

struct MetricsRow {
    std::uint32_t step = 0;
    double mean_qol = 0.0;
    std::uint64_t bankruptcies = 0;  ///< cumulative
    double mean_material_price = 0.0;
    double mean_wage = 0.0;
    double consumer_profit = 0.0;
    double mean_consumer_price = 0.0;
    std::uint64_t population = 0;
    std::uint64_t sick = 0;
    double unemployment = 0.0;

    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader =
    "step,mean_qol,bankruptcies,mean_material_price,mean_wage,consumer_profit,mean_consumer_price,population,sick,"
    "unemployment";

/// One CSV line (no newline) with fixed six-decimal formatting.
std::string metrics_csv_line(const MetricsRow& r);
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

/// Per-step working data produced by one phase and consumed by a later one. Indexed by
/// firm id where per-firm. Reset at the start of every step.
struct StepScratch {
    std::vector<Plan> plans;
    std::vector<PersonId> job_seekers;  ///< ascending
    std::vector<std::int64_t> sold;
    std::vector<Money> consumed_cost;
    std::uint64_t bankruptcies = 0;  ///< this step

    friend bool operator==(const StepScratch&, const StepScratch&) = default;
};

struct WorldState {
    std::uint64_t seed = 0;
    std::uint32_t step = 0;  ///< completed steps
    std::string scenario;
    Params params;  ///< effective parameters
    std::vector<Person> persons;      ///< index == id
    std::vector<Firm> firms;          ///< index == id; bankrupt firms stay as tombstones
    std::vector<Building> buildings;  ///< index == id
    Government government;
    SocialGraph graph;
    MarketStats stats;
    std::uint64_t bankruptcies = 0;
    Money money_supply;  ///< total cash fixed at construction
    StepScratch scratch;
    std::vector<MetricsRow> metrics;

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// Σ cash over persons, firms (including bankrupt ones) and the government.
Money total_cash(const WorldState& w);

/// Firms occupying a slot of each building, in firm-id order.
std::vector<std::vector<FirmId>> building_occupancy(const WorldState& w);

/// Structural invariants plus closed-economy conservation. Throws InvariantViolation.
void check_invariants(const WorldState& w);

double mean_quality_of_life(const WorldState& w);
double unemployment_rate(const WorldState& w);
MetricsRow compute_metrics(const WorldState& w);

} // namespace citysim

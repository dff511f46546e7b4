#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "citysim/entities.hpp"
#include "citysim/rng.hpp"

namespace citysim {

/// Piecewise-linear utility of health through sorted anchors; constant beyond the ends.
class HealthUtility {
public:
    /// Default anchors {(-1,-10), (0,0), (1,10)}.
    HealthUtility();
    /// Anchors must be sorted by health with nondecreasing utility (ConfigError otherwise).
    explicit HealthUtility(std::vector<std::pair<double, double>> anchors);

    double operator()(double health) const;
    const std::vector<std::pair<double, double>>& anchors() const { return anchors_; }

private:
    std::vector<std::pair<double, double>> anchors_;
};

struct UtilityParams {
    double consumer_good_utility = 10.0;
    double base_min_consumption = 1.0;
    HealthUtility health_utility;
};

/// food_stock · consumer_good_utility + health_utility(health). Throws DeadPerson.
double quality_of_life(const Person& p, const UtilityParams& u);

/// Largest e >= 0 with consumer_good_utility/(1+e) >= price; 0 when none qualifies.
std::int64_t excess_food_units(double consumer_good_utility, double price);

/// ceil(max(0, base_min_consumption + e* - food_stock)) at the given unit price.
std::int64_t desired_food(const Person& p, Money price, const UtilityParams& u);

/// min(desired, floor(cash / price)).
std::int64_t purchase_budget(const Person& p, std::int64_t desired, Money price);

struct VacantBuilding {
    BuildingId id = 0;
    Money rent;
};

/// What a person sees when deciding whether to found a firm.
struct FoundingView {
    std::vector<VacantBuilding> vacancies;  ///< buildings with at least one free slot
    std::array<double, 4> sector_mean_profit{};  ///< by sector index, currency units
    Money min_business_capital;
    Money starting_wage;
    double profit_floor = 1.0;
};

struct FoundingChoice {
    Sector sector = Sector::ConsumerGood;
    BuildingId building = 0;
    friend bool operator==(const FoundingChoice&, const FoundingChoice&) = default;
};

/// Cheapest affordable vacancy (ties to lowest id) with rent <= cash - min_business_capital.
std::optional<VacantBuilding> affordable_vacancy(const Person& p, const FoundingView& view);

/// A sector (and the building to found it in) when the person owns no business, an
/// affordable vacancy exists and cash covers the capital plus one step of starting wage.
/// Sector drawn with probability proportional to max(mean profit, floor).
std::optional<FoundingChoice> should_start_business(const Person& p, const FoundingView& view, RandomStream& rng);

struct JobSeekingParams {
    double base_min_consumption = 1.0;
    double wage_under_market_multiplier = 0.8;
};

/// Owners never seek; otherwise true when the wage cannot buy minimum food at the mean
/// price or falls below mean_wage·multiplier.
bool needs_job(const Person& p, Money mean_wage, Money mean_food_price, const JobSeekingParams& params);

struct HealthParams {
    double base_min_consumption = 1.0;
    double hunger_penalty = 0.1;
    double sickness_severity = 0.1;
};

/// Applies hunger and sickness damage; health below zero kills.
Person end_of_step_health(Person p, double consumed, const HealthParams& params);

} // namespace citysim

#include "citysim/agents.hpp"

#include <algorithm>
#include <cmath>

#include "citysim/errors.hpp"

namespace citysim {

HealthUtility::HealthUtility() : anchors_{{-1.0, -10.0}, {0.0, 0.0}, {1.0, 10.0}} {}

HealthUtility::HealthUtility(std::vector<std::pair<double, double>> anchors) : anchors_(std::move(anchors)) {
    if (anchors_.empty()) throw ConfigError("health utility needs at least one anchor");
    for (std::size_t i = 1; i < anchors_.size(); ++i) {
        if (!(anchors_[i].first > anchors_[i - 1].first)) throw ConfigError("health utility anchors must be sorted");
        if (anchors_[i].second < anchors_[i - 1].second) throw ConfigError("health utility must be monotone");
    }
}

double HealthUtility::operator()(double health) const {
    if (health <= anchors_.front().first) return anchors_.front().second;
    if (health >= anchors_.back().first) return anchors_.back().second;
    auto hi = std::upper_bound(anchors_.begin(), anchors_.end(), health,
                               [](double h, const auto& a) { return h < a.first; });
    auto lo = hi - 1;
    const double t = (health - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double quality_of_life(const Person& p, const UtilityParams& u) {
    if (!p.alive) throw DeadPerson("person " + std::to_string(p.id) + " is dead");
    return p.food_stock * u.consumer_good_utility + u.health_utility(p.health);
}

std::int64_t excess_food_units(double consumer_good_utility, double price) {
    if (!(price > 0.0)) return 0;
    // Marginal utility is decreasing in e, so scan until it drops below price.
    std::int64_t best = 0;
    for (std::int64_t e = 0; e < 100000; ++e) {
        if (consumer_good_utility / static_cast<double>(1 + e) >= price) {
            best = e;
        } else {
            break;
        }
    }
    return best;
}

std::int64_t desired_food(const Person& p, Money price, const UtilityParams& u) {
    const double e = static_cast<double>(excess_food_units(u.consumer_good_utility, price.units()));
    const double gap = u.base_min_consumption + e - p.food_stock;
    if (gap <= 0.0) return 0;
    return static_cast<std::int64_t>(std::ceil(gap - 1e-9));
}

std::int64_t purchase_budget(const Person& p, std::int64_t desired, Money price) {
    return std::min(desired, affordable_units(p.cash, price));
}

std::optional<VacantBuilding> affordable_vacancy(const Person& p, const FoundingView& view) {
    std::optional<VacantBuilding> best;
    const Money spare = p.cash - view.min_business_capital;
    for (const auto& v : view.vacancies) {
        if (v.rent > spare) continue;
        if (!best || v.rent < best->rent || (v.rent == best->rent && v.id < best->id)) best = v;
    }
    return best;
}

std::optional<FoundingChoice> should_start_business(const Person& p, const FoundingView& view, RandomStream& rng) {
    if (!p.alive || p.is_owner()) return std::nullopt;
    if (p.cash < view.min_business_capital + view.starting_wage) return std::nullopt;
    const auto building = affordable_vacancy(p, view);
    if (!building) return std::nullopt;

    std::array<double, 4> weights{};
    for (std::size_t s = 0; s < weights.size(); ++s) {
        weights[s] = std::max(view.sector_mean_profit[s], view.profit_floor);
    }
    std::size_t pick = rng.weighted_index(weights);
    if (pick >= weights.size()) pick = static_cast<std::size_t>(rng.uniform_int(weights.size()));
    return FoundingChoice{kSectors[pick], building->id};
}

bool needs_job(const Person& p, Money mean_wage, Money mean_food_price, const JobSeekingParams& params) {
    if (p.is_owner()) return false;
    const double food_cost = mean_food_price.units() * params.base_min_consumption;
    if (p.wage.units() < food_cost) return true;
    return p.wage.units() < mean_wage.units() * params.wage_under_market_multiplier;
}

Person end_of_step_health(Person p, double consumed, const HealthParams& params) {
    if (!p.alive) return p;
    if (params.base_min_consumption > 0.0 && consumed < params.base_min_consumption) {
        p.health -= params.hunger_penalty * (1.0 - consumed / params.base_min_consumption);
    }
    if (p.sick) p.health -= params.sickness_severity;
    if (p.health < 0.0) p.alive = false;
    return p;
}

} // namespace citysim

#include "citysim/world.hpp"

#include <algorithm>
#include <cstdio>

#include "citysim/agents.hpp"
#include "citysim/errors.hpp"

namespace citysim {

std::string metrics_csv_line(const MetricsRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%u,%.6f,%llu,%.6f,%.6f,%.6f,%.6f,%llu,%llu,%.6f", r.step, r.mean_qol,
                  static_cast<unsigned long long>(r.bankruptcies), r.mean_material_price, r.mean_wage,
                  r.consumer_profit, r.mean_consumer_price, static_cast<unsigned long long>(r.population),
                  static_cast<unsigned long long>(r.sick), r.unemployment);
    return buf;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) out << metrics_csv_line(r) << '\n';
}

Money total_cash(const WorldState& w) {
    Money total = w.government.cash;
    for (const auto& p : w.persons) total += p.cash;
    for (const auto& f : w.firms) total += f.cash;
    return total;
}

std::vector<std::vector<FirmId>> building_occupancy(const WorldState& w) {
    std::vector<std::vector<FirmId>> occ(w.buildings.size());
    for (const auto& f : w.firms) {
        if (!f.bankrupt && f.building < occ.size()) occ[f.building].push_back(f.id);
    }
    return occ;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw InvariantViolation(what); }

} // namespace

void check_invariants(const WorldState& w) {
    for (std::size_t i = 0; i < w.persons.size(); ++i) {
        const Person& p = w.persons[i];
        if (p.id != i) fail("person id mismatch at index " + std::to_string(i));
        if (p.food_stock < 0.0) fail("negative food stock for person " + std::to_string(i));
        if (p.employer) {
            if (*p.employer >= w.firms.size()) fail("person " + std::to_string(i) + " employed by unknown firm");
            const Firm& f = w.firms[*p.employer];
            const bool listed = std::any_of(f.employees.begin(), f.employees.end(),
                                            [&](const Employee& e) { return e.person == p.id; });
            if (!listed) fail("person " + std::to_string(i) + " missing from roster of firm " + std::to_string(f.id));
            if (!p.alive) fail("dead person " + std::to_string(i) + " still employed");
            if (p.is_owner()) fail("owner " + std::to_string(i) + " also employed");
        }
        if (p.owned_business) {
            if (*p.owned_business >= w.firms.size()) fail("person owns unknown firm");
            const Firm& f = w.firms[*p.owned_business];
            if (f.owner != p.id || f.bankrupt) fail("ownership mismatch for person " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < w.firms.size(); ++i) {
        const Firm& f = w.firms[i];
        if (f.id != i) fail("firm id mismatch at index " + std::to_string(i));
        if (f.supply < 0 || f.materials < 0 || f.equipment < 0) fail("negative inventory at firm " + std::to_string(i));
        if (f.building >= w.buildings.size()) fail("firm " + std::to_string(i) + " in unknown building");
        if (f.bankrupt && !f.employees.empty()) fail("bankrupt firm " + std::to_string(i) + " has employees");
        for (std::size_t k = 0; k < f.employees.size(); ++k) {
            const Employee& e = f.employees[k];
            if (k > 0 && f.employees[k - 1].person >= e.person) fail("unsorted roster at firm " + std::to_string(i));
            if (e.person >= w.persons.size() || w.persons[e.person].employer != f.id) {
                fail("roster of firm " + std::to_string(i) + " lists a non-employee");
            }
            if (e.wage < Money{}) fail("negative wage at firm " + std::to_string(i));
        }
        if (f.government_owned() != w.government.owned_firms.contains(f.id) && !f.bankrupt) {
            fail("government ownership set out of sync for firm " + std::to_string(i));
        }
    }
    const auto occ = building_occupancy(w);
    for (std::size_t b = 0; b < occ.size(); ++b) {
        if (static_cast<int>(occ[b].size()) > w.buildings[b].slots) fail("building " + std::to_string(b) + " over capacity");
    }
    if (total_cash(w) != w.money_supply) {
        fail("money supply changed: " + total_cash(w).str() + " != " + w.money_supply.str());
    }
}

namespace {

UtilityParams utility_params(const Params& p) {
    UtilityParams u;
    u.consumer_good_utility = p.consumer_good_utility;
    u.base_min_consumption = p.base_min_consumption;
    return u;
}

} // namespace

double mean_quality_of_life(const WorldState& w) {
    const UtilityParams u = utility_params(w.params);
    double total = 0.0;
    std::size_t alive = 0;
    for (const auto& p : w.persons) {
        if (!p.alive) continue;
        total += quality_of_life(p, u);
        ++alive;
    }
    return alive == 0 ? 0.0 : total / static_cast<double>(alive);
}

double unemployment_rate(const WorldState& w) {
    std::size_t alive = 0;
    std::size_t unemployed = 0;
    for (const auto& p : w.persons) {
        if (!p.alive) continue;
        ++alive;
        if (!p.is_owner() && !p.is_employed()) ++unemployed;
    }
    return alive == 0 ? 0.0 : static_cast<double>(unemployed) / static_cast<double>(alive);
}

MetricsRow compute_metrics(const WorldState& w) {
    MetricsRow r;
    r.step = w.step;
    r.mean_qol = mean_quality_of_life(w);
    r.bankruptcies = w.bankruptcies;
    r.mean_material_price = w.stats.mean_price[index_of(Sector::RawMaterial)].units();
    r.mean_wage = w.stats.mean_wage.units();
    r.consumer_profit = w.stats.mean_profit[index_of(Sector::ConsumerGood)];
    r.mean_consumer_price = w.stats.mean_price[index_of(Sector::ConsumerGood)].units();
    for (const auto& p : w.persons) {
        if (!p.alive) continue;
        ++r.population;
        if (p.sick) ++r.sick;
    }
    r.unemployment = unemployment_rate(w);
    return r;
}

} // namespace citysim

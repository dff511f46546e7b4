#include "citysim/firms.hpp"

#include <algorithm>
#include <cmath>

#include "citysim/errors.hpp"

namespace citysim {

namespace {

// Guards floor() against quotients like 9.999999999 that are mathematically integral.
constexpr double kFloorSlack = 1e-9;

std::int64_t floor_units(double x) { return static_cast<std::int64_t>(std::floor(x + kFloorSlack)); }
std::int64_t ceil_units(double x) { return static_cast<std::int64_t>(std::ceil(x - kFloorSlack)); }

} // namespace

std::string_view sector_name(Sector s) {
    switch (s) {
    case Sector::Hospital: return "hospital";
    case Sector::CapitalEquipment: return "capital_equipment";
    case Sector::ConsumerGood: return "consumer_good";
    case Sector::RawMaterial: return "raw_material";
    }
    return "unknown";
}

Sector parse_sector(std::string_view name) {
    for (Sector s : kSectors) {
        if (sector_name(s) == name) return s;
    }
    throw UnknownSector("unknown sector: " + std::string(name));
}

Money Firm::wage_bill() const {
    Money total;
    for (const auto& e : employees) total += e.wage;
    return total;
}

double labor_power(std::int64_t workers, std::int64_t equipment, const ProductionParams& pp) {
    const std::int64_t operated = std::min(equipment, workers);
    return static_cast<double>(workers) * pp.labor_per_worker + static_cast<double>(operated) * pp.labor_per_equipment;
}

std::int64_t production_capacity(const Firm& f, const ProductionParams& pp) {
    if (f.sector == Sector::Hospital) throw NotAProducer("hospitals produce treatment slots, not goods");
    const double by_labor = labor_power(f.workers(), f.equipment, pp) / pp.labor_cost_per_good;
    if (f.sector == Sector::RawMaterial) return floor_units(by_labor);
    const double by_materials = static_cast<double>(f.materials) / pp.material_cost_per_good;
    return floor_units(std::min(by_labor, by_materials));
}

std::int64_t hospital_capacity(const Firm& f, const ProductionParams& pp) {
    return floor_units(static_cast<double>(f.workers()) * pp.patients_per_worker);
}

WorkforceMix optimal_mix(double labor_needed, std::int64_t owned_equipment, Money wage, Money equipment_step_cost,
                         const ProductionParams& pp) {
    WorkforceMix best{0, 0, Money{}};
    if (labor_needed <= 0.0) return best;
    const std::int64_t max_workers = ceil_units(labor_needed / pp.labor_per_worker);
    bool found = false;
    for (std::int64_t w = 0; w <= max_workers; ++w) {
        const double gap = labor_needed - static_cast<double>(w) * pp.labor_per_worker;
        std::int64_t e = 0;
        if (gap > kFloorSlack) {
            if (pp.labor_per_equipment <= 0.0) continue;
            e = ceil_units(gap / pp.labor_per_equipment);
        }
        if (e > w) continue;
        const Money cost = wage * w + equipment_step_cost * std::max<std::int64_t>(0, e - owned_equipment);
        if (!found || cost < best.cost) {
            best = {w, e, cost};
            found = true;
        }
    }
    return best;
}

StateKey firm_state(const Firm& f, const SignalBins& bins) {
    return discretize_signals(static_cast<double>(f.last_sold), static_cast<double>(f.supply),
                              (f.last_profit - f.prev_profit).units(), bins);
}

Plan plan_step(const Firm& f, const PlanContext& ctx, RandomStream& rng) {
    Plan plan;
    plan.state = firm_state(f, ctx.bins);
    plan.action = select_action(f.q, plan.state, rng);
    const auto [margin_move, supply_move] = decode_joint_action(plan.action);
    plan.profit_margin = std::max(-1.0, apply_lever(f.profit_margin, margin_move, ctx.profit_increment));
    plan.supply_target = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(apply_lever(static_cast<double>(f.supply_target), supply_move,
                                                 static_cast<double>(ctx.supply_increment))));
    plan.wage_offer = max(ctx.starting_wage, ctx.mean_wage.scaled(1.0 + ctx.wage_increment));

    const ProductionParams& pp = ctx.production;
    if (f.sector == Sector::Hospital) {
        plan.workers_needed =
            pp.patients_per_worker > 0 ? ceil_units(static_cast<double>(plan.supply_target) / pp.patients_per_worker) : 0;
        plan.desired_labor = static_cast<double>(plan.workers_needed) * pp.labor_per_worker;
        return plan;
    }

    plan.desired_labor = static_cast<double>(plan.supply_target) * pp.labor_cost_per_good;
    const Money equipment_step_cost =
        ctx.equipment_price.scaled(1.0 / std::max(1.0, ctx.equipment_amortization_steps));
    const WorkforceMix mix = optimal_mix(plan.desired_labor, f.equipment, plan.wage_offer, equipment_step_cost, pp);
    plan.workers_needed = mix.workers;
    plan.equipment_to_buy = std::max<std::int64_t>(0, mix.equipment - f.equipment);
    if (f.uses_materials()) {
        const std::int64_t needed = ceil_units(static_cast<double>(plan.supply_target) * pp.material_cost_per_good);
        plan.materials_to_buy = std::max<std::int64_t>(0, needed - f.materials);
    }
    return plan;
}

std::vector<PersonId> fire_overpaid(Firm& f, Money mean_wage, double extravagant_wage_range) {
    std::vector<PersonId> fired;
    if (mean_wage <= Money{}) return fired;
    const double cap = mean_wage.units() * extravagant_wage_range;
    std::erase_if(f.employees, [&](const Employee& e) {
        if (e.wage.units() > cap) {
            fired.push_back(e.person);
            return true;
        }
        return false;
    });
    return fired;
}

std::vector<PersonId> downsize(Firm& f, std::int64_t n, RandomStream& rng, std::span<const double> weights) {
    std::vector<PersonId> fired;
    n = std::clamp<std::int64_t>(n, 0, f.workers());
    std::vector<double> w(f.employees.size(), 1.0);
    if (!weights.empty()) std::copy_n(weights.begin(), std::min(weights.size(), w.size()), w.begin());
    std::vector<bool> chosen(f.employees.size(), false);
    for (std::int64_t k = 0; k < n; ++k) {
        std::size_t pick = rng.weighted_index(w);
        if (pick >= w.size()) {
            // Remaining weights are all zero: fall back to the lowest unchosen index.
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        chosen[pick] = true;
        w[pick] = 0.0;
        fired.push_back(f.employees[pick].person);
    }
    std::size_t i = 0;
    std::erase_if(f.employees, [&](const Employee&) { return chosen[i++]; });
    std::sort(fired.begin(), fired.end());
    return fired;
}

Money set_price(std::int64_t produced, Money step_costs, double profit_margin, Money min_price) {
    const double unit_cost = step_costs.units() / static_cast<double>(std::max<std::int64_t>(produced, 1));
    return max(min_price, Money::from_units(unit_cost * (1.0 + profit_margin)));
}

ProductionResult production_for(const Firm& f, const ProductionParams& pp) {
    if (f.bankrupt) return {};
    if (f.sector == Sector::Hospital) return {hospital_capacity(f, pp), 0};
    const std::int64_t output = std::min(production_capacity(f, pp), std::max<std::int64_t>(f.supply_target, 0));
    std::int64_t used = 0;
    if (f.uses_materials()) used = std::min(f.materials, ceil_units(static_cast<double>(output) * pp.material_cost_per_good));
    return {output, used};
}

Money apply_production(Firm& f, const ProductionResult& r) {
    Money consumed_cost;
    if (r.materials_used > 0 && f.materials > 0) {
        consumed_cost = f.materials == r.materials_used
                            ? f.materials_basis
                            : Money::from_cents(f.materials_basis.cents() * r.materials_used / f.materials);
        f.materials -= r.materials_used;
        f.materials_basis -= consumed_cost;
    }
    if (f.sector == Sector::Hospital) {
        f.supply = r.output;  // treatment slots do not carry over
    } else {
        f.supply += r.output;
    }
    f.last_produced = r.output;
    return consumed_cost;
}

Firm produce(Firm f, const ProductionParams& pp) {
    apply_production(f, production_for(f, pp));
    return f;
}

void employ(Firm& f, Person& p, Money wage) {
    auto it = std::lower_bound(f.employees.begin(), f.employees.end(), p.id,
                               [](const Employee& e, PersonId id) { return e.person < id; });
    if (it != f.employees.end() && it->person == p.id) {
        it->wage = wage;
    } else {
        f.employees.insert(it, Employee{p.id, wage});
    }
    p.employer = f.id;
    p.wage = wage;
}

bool remove_from_roster(Firm& f, PersonId id) {
    auto it = std::lower_bound(f.employees.begin(), f.employees.end(), id,
                               [](const Employee& e, PersonId pid) { return e.person < pid; });
    if (it == f.employees.end() || it->person != id) return false;
    f.employees.erase(it);
    return true;
}

void release(Firm& f, Person& p) {
    remove_from_roster(f, p.id);
    if (p.employer == f.id) {
        p.employer.reset();
        p.wage = Money{};
    }
}

void pay_obligations(Firm& f, Money rent, Money& landlord, std::span<Person> persons) {
    for (const auto& e : f.employees) {
        Person& p = persons[e.person];
        transfer(f.cash, p.cash, e.wage);
        p.step_income += e.wage;
        f.books.wages += e.wage;
    }
    transfer(f.cash, landlord, rent);
    f.books.rent += rent;
}

void cover_deficit(Firm& f, Money& sovereign) {
    if (f.government_owned() && f.cash < Money{}) {
        const Money gap = -f.cash;
        transfer(sovereign, f.cash, gap);
        f.books.bailout += gap;
    }
}

SettlementOutcome update_solvency(Firm& f, std::span<Person> persons, int grace) {
    SettlementOutcome out;
    if (f.bankrupt) return out;
    if (f.cash < Money{} && !f.government_owned()) {
        ++f.negative_cash_steps;
    } else {
        f.negative_cash_steps = 0;
    }
    if (f.negative_cash_steps < grace) return out;

    out.went_bankrupt = true;
    for (const auto& e : f.employees) {
        Person& p = persons[e.person];
        out.released.push_back(p.id);
        if (p.employer == f.id) {
            p.employer.reset();
            p.wage = Money{};
        }
    }
    f.employees.clear();
    f.supply = 0;
    f.supply_target = 0;
    if (f.owner && *f.owner < persons.size() && persons[*f.owner].owned_business == f.id) {
        persons[*f.owner].owned_business.reset();
    }
    f.bankrupt = true;
    return out;
}

SettlementOutcome settle_and_maybe_bankrupt(Firm& f, Money rent, Money& landlord, std::span<Person> persons, int grace,
                                            Money& sovereign) {
    if (f.bankrupt) return {};
    pay_obligations(f, rent, landlord, persons);
    cover_deficit(f, sovereign);
    return update_solvency(f, persons, grace);
}

} // namespace citysim

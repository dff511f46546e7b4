#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "citysim/entities.hpp"
#include "citysim/learning.hpp"
#include "citysim/rng.hpp"

namespace citysim {

struct ProductionParams {
    double labor_cost_per_good = 10.0;
    double material_cost_per_good = 1.0;
    double labor_per_worker = 20.0;
    double labor_per_equipment = 10.0;
    double patients_per_worker = 10.0;
};

/// workers·labor_per_worker + min(equipment, workers)·labor_per_equipment.
double labor_power(std::int64_t workers, std::int64_t equipment, const ProductionParams& pp);

/// Goods producible this step; hospitals throw NotAProducer.
std::int64_t production_capacity(const Firm& f, const ProductionParams& pp);

/// Treatment slots of a hospital: workers·patients_per_worker.
std::int64_t hospital_capacity(const Firm& f, const ProductionParams& pp);

struct WorkforceMix {
    std::int64_t workers = 0;
    std::int64_t equipment = 0;  ///< units operated, at most `workers`
    Money cost;                  ///< wages plus amortized cost of equipment to buy
    friend bool operator==(const WorkforceMix&, const WorkforceMix&) = default;
};

/// Cheapest (workers, equipment) meeting `labor_needed`: for each worker count the
/// smallest equipment top-up is used; equipment already owned is free; ties go to fewer
/// workers. Worker-only mixes always exist because labor_per_worker > 0.
WorkforceMix optimal_mix(double labor_needed, std::int64_t owned_equipment, Money wage,
                         Money equipment_step_cost, const ProductionParams& pp);

struct PlanContext {
    Money mean_wage;
    Money starting_wage;
    double wage_increment = 0.05;
    Money equipment_price;  ///< mean capital-equipment price
    double equipment_amortization_steps = 24;
    double profit_increment = 0.05;
    std::int64_t supply_increment = 5;
    SignalBins bins;
    ProductionParams production;
};

struct Plan {
    StateKey state{};
    ActionId action = kHoldAction;
    std::int64_t supply_target = 0;
    double profit_margin = 0.0;
    double desired_labor = 0.0;
    std::int64_t workers_needed = 0;
    std::int64_t equipment_to_buy = 0;
    std::int64_t materials_to_buy = 0;
    Money wage_offer;

    friend bool operator==(const Plan&, const Plan&) = default;
};

/// Signals the firm observes at the start of a step.
StateKey firm_state(const Firm& f, const SignalBins& bins);

/// Chooses a Q action from (last sold, leftover supply, profit change), moves the margin
/// and supply target, and sizes labor, equipment and materials for the new target.
Plan plan_step(const Firm& f, const PlanContext& ctx, RandomStream& rng);

/// Releases employees paid above mean_wage·range and returns their ids (ascending).
std::vector<PersonId> fire_overpaid(Firm& f, Money mean_wage, double extravagant_wage_range);

/// Releases n employees drawn without replacement, weighted by `weights` (aligned with
/// f.employees; empty means uniform). Returns ids ascending.
std::vector<PersonId> downsize(Firm& f, std::int64_t n, RandomStream& rng, std::span<const double> weights = {});

/// (step_costs / max(produced, 1))·(1 + margin), floored at min_price.
Money set_price(std::int64_t produced, Money step_costs, double profit_margin, Money min_price);

struct ProductionResult {
    std::int64_t output = 0;
    std::int64_t materials_used = 0;
    friend bool operator==(const ProductionResult&, const ProductionResult&) = default;
};

/// Output of this step: min(capacity, supply_target); hospitals report their slots.
ProductionResult production_for(const Firm& f, const ProductionParams& pp);

/// Applies a production result to inventories and the materials cost basis; returns the
/// cost of the materials consumed.
Money apply_production(Firm& f, const ProductionResult& r);

/// produce = production_for + apply_production.
Firm produce(Firm f, const ProductionParams& pp);

/// Adds an employee (keeps the roster sorted) and sets the person's employer and wage.
void employ(Firm& f, Person& p, Money wage);
/// Removes a person from the roster and clears their employment; no-op if absent.
void release(Firm& f, Person& p);
/// Removes an id from the roster only.
bool remove_from_roster(Firm& f, PersonId id);

struct SettlementOutcome {
    bool went_bankrupt = false;
    std::vector<PersonId> released;
};

/// Pays wages to employees and rent to the landlord. A government-owned firm left with
/// negative cash is topped up from `sovereign`; a private firm with negative cash for
/// `grace` consecutive settlements goes bankrupt: employees released, supply discarded,
/// the owner's business cleared. `persons` is indexed by person id.
SettlementOutcome settle_and_maybe_bankrupt(Firm& f, Money rent, Money& landlord, std::span<Person> persons,
                                            int grace, Money& sovereign);

/// Wages to every employee and rent to the landlord, recorded in the firm's books.
void pay_obligations(Firm& f, Money rent, Money& landlord, std::span<Person> persons);

/// Tops up a government-owned firm with negative cash from the sovereign balance.
void cover_deficit(Firm& f, Money& sovereign);

/// Bankruptcy bookkeeping after cash has settled; see settle_and_maybe_bankrupt.
SettlementOutcome update_solvency(Firm& f, std::span<Person> persons, int grace);

} // namespace citysim

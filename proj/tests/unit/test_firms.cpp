#include <doctest.h>

#include "../oracles.hpp"
#include "citysim/errors.hpp"
#include "citysim/firms.hpp"

using namespace citysim;

namespace {

Firm firm(Sector s, std::int64_t workers, std::int64_t equipment = 0, std::int64_t materials = 0) {
    Firm f;
    f.id = 7;
    f.sector = s;
    f.equipment = equipment;
    f.materials = materials;
    for (std::int64_t i = 0; i < workers; ++i) {
        f.employees.push_back({static_cast<PersonId>(i), Money::from_units(10)});
    }
    return f;
}

std::vector<Person> people(std::size_t n) {
    std::vector<Person> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i].id = static_cast<PersonId>(i);
    return out;
}

void check_against_grid(double needed, std::int64_t owned, double wage, double equipment, const ProductionParams& pp) {
    const auto ours = optimal_mix(needed, owned, Money::from_units(wage), Money::from_units(equipment), pp);
    const auto grid = oracle::grid_mix(needed, owned, wage, equipment, pp.labor_per_worker, pp.labor_per_equipment);
    CHECK(ours.workers == grid.workers);
    CHECK(ours.cost.units() == doctest::Approx(grid.cost));
    CHECK(labor_power(ours.workers, ours.equipment, pp) >= needed - 1e-9);
}

} // namespace

TEST_CASE("labor power worked example") {
    ProductionParams pp;
    pp.labor_per_worker = 20;
    pp.labor_per_equipment = 10;
    CHECK(labor_power(5, 0, pp) == 100.0);
    CHECK(labor_power(4, 4, pp) == 120.0);
    pp.labor_per_equipment = 50;
    CHECK(labor_power(2, 2, pp) == 140.0);
    pp.labor_per_equipment = 10;
    for (std::int64_t e = 3; e < 10; ++e) CHECK(labor_power(3, e, pp) == labor_power(3, 3, pp));
}

TEST_CASE("production capacity") {
    ProductionParams pp;
    pp.labor_cost_per_good = 10;
    CHECK(production_capacity(firm(Sector::RawMaterial, 5), pp) == 10);
    CHECK(production_capacity(firm(Sector::ConsumerGood, 50, 0, 5), pp) == 5);
    CHECK(production_capacity(firm(Sector::RawMaterial, 0), pp) == 0);
    CHECK_THROWS_AS(production_capacity(firm(Sector::Hospital, 3), pp), NotAProducer);
    CHECK(hospital_capacity(firm(Sector::Hospital, 3), pp) == 30);

    std::int64_t last = 0;
    for (std::int64_t w = 0; w < 20; ++w) {
        const auto c = production_capacity(firm(Sector::RawMaterial, w, 4), pp);
        CHECK(c >= last);
        last = c;
    }
}

TEST_CASE("workforce mix against the grid oracle") {
    const ProductionParams pp;
    const auto cheap_labor = optimal_mix(100, 0, Money::from_units(10), Money::from_units(100), pp);
    CHECK(cheap_labor.workers == 5);
    CHECK(cheap_labor.equipment == 0);

    const auto automated = optimal_mix(120, 0, Money::from_units(500), Money{}, pp);
    CHECK(automated.workers == 4);
    CHECK(automated.equipment == 4);
    CHECK(automated.cost < optimal_mix(120, 0, Money::from_units(500), Money::from_units(1e6), pp).cost);

    for (double needed : {0.0, 15.0, 100.0, 120.0, 175.0, 333.0}) {
        for (std::int64_t owned : {0, 2, 10}) {
            for (double wage : {5.0, 40.0, 300.0}) {
                for (double equipment : {0.0, 10.0, 90.0}) check_against_grid(needed, owned, wage, equipment, pp);
            }
        }
    }
    ProductionParams no_tech = pp;
    no_tech.labor_per_equipment = 0;
    check_against_grid(100, 5, 50, 0, no_tech);
}

TEST_CASE("plan is a fixed point under the hold action") {
    Firm f = firm(Sector::RawMaterial, 5);
    LearningParams lp;
    lp.epsilon = 0.0;
    f.q = joint_action_table(lp, 1.0);
    f.supply_target = 10;
    f.profit_margin = 0.2;
    PlanContext ctx;
    ctx.mean_wage = Money::from_units(10);
    ctx.starting_wage = Money::from_units(10);
    ctx.equipment_price = Money::from_units(2400);
    RandomStream rng = RandomStream::seeded(1);
    const Plan plan = plan_step(f, ctx, rng);
    CHECK(plan.action == kHoldAction);
    CHECK(plan.supply_target == 10);
    CHECK(plan.profit_margin == 0.2);
    CHECK(plan.desired_labor == 100.0);
    CHECK(plan.workers_needed == 5);
    CHECK(plan.wage_offer == Money::from_units(10.5));
}

TEST_CASE("plan sizes materials") {
    Firm f = firm(Sector::ConsumerGood, 0, 0, 3);
    LearningParams lp;
    lp.epsilon = 0.0;
    f.q = joint_action_table(lp, 1.0);
    f.supply_target = 10;
    PlanContext ctx;
    RandomStream rng = RandomStream::seeded(1);
    CHECK(plan_step(f, ctx, rng).materials_to_buy == 7);
}

TEST_CASE("firing") {
    Firm f = firm(Sector::RawMaterial, 3);
    CHECK(fire_overpaid(f, Money::from_units(10), 2.0).empty());
    f.employees[1].wage = Money::from_units(21);
    CHECK(fire_overpaid(f, Money::from_units(10), 2.0) == std::vector<PersonId>{1});
    CHECK(f.workers() == 2);
    Firm empty = firm(Sector::RawMaterial, 0);
    CHECK(fire_overpaid(empty, Money::from_units(10), 2.0).empty());

    RandomStream rng = RandomStream::seeded(2);
    Firm all = firm(Sector::RawMaterial, 4);
    CHECK(downsize(all, 4, rng).size() == 4);
    CHECK(all.employees.empty());
    Firm none = firm(Sector::RawMaterial, 4);
    CHECK(downsize(none, 0, rng).empty());
    CHECK(none.workers() == 4);

    std::array<int, 3> hits{};
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        Firm g = firm(Sector::RawMaterial, 3);
        RandomStream r = RandomStream::seeded(3, static_cast<std::uint32_t>(t));
        ++hits[downsize(g, 1, r)[0]];
    }
    for (int h : hits) CHECK(std::abs(static_cast<double>(h) / trials - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("pricing") {
    CHECK(set_price(10, Money::from_units(100), 0.2, Money::from_cents(1)) == Money::from_units(12));
    CHECK(set_price(0, Money::from_units(7), 0.0, Money::from_cents(1)) == Money::from_units(7));
    CHECK(set_price(4, Money::from_units(10), 0.0, Money::from_cents(1)) == Money::from_units(2.5));
    CHECK(set_price(4, Money{}, 0.5, Money::from_cents(5)) == Money::from_cents(5));
}

TEST_CASE("production") {
    ProductionParams pp;
    Firm a = firm(Sector::RawMaterial, 6);
    a.supply_target = 10;
    CHECK(produce(a, pp).supply == 10);
    Firm b = firm(Sector::RawMaterial, 5);
    b.supply_target = 10;
    b.equipment = 0;
    pp.labor_cost_per_good = 20;
    CHECK(produce(b, pp).supply == 5);

    pp = ProductionParams{};
    Firm c = firm(Sector::ConsumerGood, 10, 0, 10);
    c.supply_target = 10;
    c.materials_basis = Money::from_units(30);
    const Firm done = produce(c, pp);
    CHECK(done.supply == 10);
    CHECK(done.materials == 0);
    CHECK(done.materials_basis == Money{});
    CHECK(done.last_produced == 10);

    Firm d = firm(Sector::ConsumerGood, 10, 0, 10);
    d.supply_target = 4;
    d.materials_basis = Money::from_units(30);
    const Money consumed = apply_production(d, production_for(d, pp));
    CHECK(consumed == Money::from_units(12));
    CHECK(d.materials_basis + consumed == Money::from_units(30));
}

TEST_CASE("settlement and bankruptcy") {
    auto persons = people(3);
    Money landlord, sovereign = Money::from_units(1000);

    Firm solvent = firm(Sector::RawMaterial, 2);
    solvent.cash = Money::from_units(100);
    CHECK_FALSE(settle_and_maybe_bankrupt(solvent, Money::from_units(5), landlord, persons, 2, sovereign).went_bankrupt);
    CHECK(solvent.cash == Money::from_units(75));
    CHECK(persons[0].cash == Money::from_units(10));
    CHECK(landlord == Money::from_units(5));

    Firm broke = firm(Sector::RawMaterial, 0);
    broke.owner = 2;
    persons[2].owned_business = broke.id;
    broke.cash = Money::from_units(-1);
    broke.supply = 9;
    CHECK_FALSE(settle_and_maybe_bankrupt(broke, Money{}, landlord, persons, 2, sovereign).went_bankrupt);
    const auto out = settle_and_maybe_bankrupt(broke, Money{}, landlord, persons, 2, sovereign);
    CHECK(out.went_bankrupt);
    CHECK(broke.bankrupt);
    CHECK(broke.supply == 0);
    CHECK_FALSE(persons[2].owned_business);

    Firm state = firm(Sector::RawMaterial, 1);
    state.owner.reset();
    state.cash = Money::from_units(3);
    const Money before = state.cash + sovereign + landlord + persons[0].cash;
    for (int i = 0; i < 5; ++i) {
        CHECK_FALSE(settle_and_maybe_bankrupt(state, Money::from_units(4), landlord, persons, 2, sovereign).went_bankrupt);
        CHECK(state.cash == Money{});
    }
    CHECK(state.cash + sovereign + landlord + persons[0].cash == before);
    CHECK(state.books.bailout == Money::from_units(11 + 14 * 4));
}

TEST_CASE("employ and release keep the roster sorted") {
    auto persons = people(5);
    Firm f = firm(Sector::RawMaterial, 0);
    employ(f, persons[3], Money::from_units(9));
    employ(f, persons[1], Money::from_units(8));
    CHECK(f.employees[0].person == 1);
    CHECK(persons[3].employer == f.id);
    CHECK(persons[3].wage == Money::from_units(9));
    release(f, persons[3]);
    CHECK(f.workers() == 1);
    CHECK_FALSE(persons[3].employer);
    CHECK(persons[3].wage == Money{});
}

#include <doctest.h>

#include "citysim/agents.hpp"
#include "citysim/errors.hpp"

using namespace citysim;

namespace {

Person person(double cash, double food = 0.0, double health = 1.0) {
    Person p;
    p.cash = Money::from_units(cash);
    p.food_stock = food;
    p.health = health;
    return p;
}

// Brute-force count of excess units whose marginal utility still meets the price.
std::int64_t brute_excess(double utility, double price) {
    std::int64_t best = 0;
    for (std::int64_t e = 0; e <= 1000; ++e) {
        if (utility / (1.0 + e) >= price) best = e;
    }
    return best;
}

} // namespace

TEST_CASE("quality of life") {
    UtilityParams linear;
    linear.consumer_good_utility = 1.0;
    linear.health_utility = HealthUtility({{-1.0, -1.0}, {1.0, 1.0}});
    CHECK(quality_of_life(person(0, 0, 0), linear) == 0.0);
    CHECK(quality_of_life(person(0, 2, 0.5), linear) == doctest::Approx(2.5));

    const UtilityParams fixture;
    CHECK(fixture.health_utility(0.5) == doctest::Approx(5.0));
    CHECK(fixture.health_utility(-0.25) == doctest::Approx(-2.5));
    CHECK(fixture.health_utility(3.0) == doctest::Approx(10.0));
    CHECK(quality_of_life(person(0, 2, 0.5), fixture) == doctest::Approx(2 * 10.0 + 5.0));

    Person dead = person(0);
    dead.alive = false;
    CHECK_THROWS_AS(quality_of_life(dead, fixture), DeadPerson);
    CHECK_THROWS_AS(HealthUtility({{1.0, 0.0}, {0.0, 1.0}}), ConfigError);
}

TEST_CASE("quality of life is monotone") {
    const UtilityParams u;
    double last = -1e9;
    for (double h = -1.5; h <= 1.5; h += 0.1) {
        const double q = quality_of_life(person(0, 1, h), u);
        CHECK(q >= last);
        last = q;
    }
    CHECK(quality_of_life(person(0, 3), u) > quality_of_life(person(0, 2), u));
}

TEST_CASE("desired food") {
    UtilityParams u;
    u.consumer_good_utility = 10.0;
    u.base_min_consumption = 1.0;
    CHECK(excess_food_units(10.0, 2.0) == brute_excess(10.0, 2.0));
    CHECK(brute_excess(10.0, 2.0) == 4);
    CHECK(desired_food(person(100, 0), Money::from_units(2), u) == 5);
    CHECK(desired_food(person(100, 1), Money::from_units(11), u) == 0);
    CHECK(desired_food(person(100, 100), Money::from_units(0.5), u) == 0);
    for (double price : {0.3, 0.7, 1.0, 2.5, 3.3, 9.99, 10.0, 10.01}) {
        CHECK(excess_food_units(10.0, price) == brute_excess(10.0, price));
    }
}

TEST_CASE("purchase budget") {
    CHECK(purchase_budget(person(0), 5, Money::from_units(2)) == 0);
    CHECK(purchase_budget(person(7), 5, Money::from_units(2)) == 3);
    CHECK(purchase_budget(person(100), 2, Money::from_units(1)) == 2);
}

TEST_CASE("business founding") {
    FoundingView view;
    view.vacancies = {{3, Money::from_units(50)}, {1, Money::from_units(20)}, {2, Money::from_units(20)}};
    view.min_business_capital = Money::from_units(100);
    view.starting_wage = Money::from_units(10);
    view.sector_mean_profit = {30, 10, 0, 0};
    view.profit_floor = 0.0;

    RandomStream rng = RandomStream::seeded(1);
    Person owner = person(1000);
    owner.owned_business = 4;
    CHECK_FALSE(should_start_business(owner, view, rng));
    CHECK_FALSE(should_start_business(person(105), view, rng));

    FoundingView pricey = view;
    for (auto& v : pricey.vacancies) v.rent = Money::from_units(5000);
    CHECK_FALSE(should_start_business(person(1000), pricey, rng));

    const auto b = affordable_vacancy(person(1000), view);
    REQUIRE(b);
    CHECK(b->id == 1);

    int hospital = 0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        RandomStream r = RandomStream::seeded(2, static_cast<std::uint32_t>(i));
        const auto c = should_start_business(person(1000), view, r);
        REQUIRE(c);
        CHECK(c->building == 1);
        CHECK((c->sector == Sector::Hospital || c->sector == Sector::CapitalEquipment));
        if (c->sector == Sector::Hospital) ++hospital;
    }
    CHECK(static_cast<double>(hospital) / trials == doctest::Approx(30.0 / 40.0).epsilon(0.02));
}

TEST_CASE("job seeking") {
    const JobSeekingParams params;
    Person owner = person(0);
    owner.owned_business = 1;
    CHECK_FALSE(needs_job(owner, Money::from_units(50), Money::from_units(2), params));
    CHECK(needs_job(person(0), Money::from_units(50), Money::from_units(2), params));
    Person worker = person(0);
    worker.employer = 2;
    worker.wage = Money::from_units(50);
    CHECK_FALSE(needs_job(worker, Money::from_units(50), Money::from_units(2), params));
    worker.wage = Money::from_units(39);
    CHECK(needs_job(worker, Money::from_units(50), Money::from_units(2), params));
}

TEST_CASE("end of step health") {
    const HealthParams hp;
    const Person fed = end_of_step_health(person(0, 0, 0.8), hp.base_min_consumption, hp);
    CHECK(fed.health == 0.8);
    CHECK(end_of_step_health(person(0, 0, 0.8), 0.5, hp).health == doctest::Approx(0.75));

    // First k with k·penalty > 1, in exact integer tenths.
    int expected = 1;
    while (expected * 1 <= 10) ++expected;
    Person p = person(0);
    int k = 0;
    while (p.alive) {
        p = end_of_step_health(p, 0.0, hp);
        ++k;
    }
    CHECK(k == expected);

    Person sick = person(0, 0, 0.05);
    sick.sick = true;
    const Person after = end_of_step_health(sick, 1.0, hp);
    CHECK(after.health == doctest::Approx(-0.05));
    CHECK_FALSE(after.alive);
}

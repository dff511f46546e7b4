#include <doctest.h>

#include "citysim/errors.hpp"
#include "citysim/government.hpp"

using namespace citysim;

namespace {

std::vector<Person> people(std::size_t n, double cash = 100.0) {
    std::vector<Person> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].id = static_cast<PersonId>(i);
        out[i].cash = Money::from_units(cash);
    }
    return out;
}

Firm firm(FirmId id, Sector s, std::optional<PersonId> owner, double cash) {
    Firm f;
    f.id = id;
    f.sector = s;
    f.owner = owner;
    f.cash = Money::from_units(cash);
    return f;
}

Money total(const Government& g, const std::vector<Person>& ps, const std::vector<Firm>& fs) {
    Money t = g.cash;
    for (const auto& p : ps) t += p.cash;
    for (const auto& f : fs) t += f.cash;
    return t;
}

Legislation law(LegislationKind k, double delta, std::optional<Sector> s = std::nullopt) {
    Legislation l;
    l.kind = k;
    l.delta = delta;
    l.sector = s;
    return l;
}

} // namespace

TEST_CASE("taxes") {
    Government g;
    auto ps = people(2);
    ps[0].step_income = Money::from_units(100);
    std::vector<Firm> fs = {firm(0, Sector::RawMaterial, 1, 500), firm(1, Sector::RawMaterial, 1, 500)};
    fs[0].books.revenue = Money::from_units(200);
    fs[0].books.wages = Money::from_units(100);
    fs[1].books.wages = Money::from_units(50);
    const Money before = total(g, ps, fs);

    g.tax_rate = 0.0;
    CHECK(collect_taxes(g, ps, fs) == Money{});
    CHECK(g.cash == Money{});

    g.tax_rate = 0.1;
    CHECK(collect_taxes(g, ps, fs) == Money::from_units(20));
    CHECK(ps[0].cash == Money::from_units(90));
    CHECK(fs[0].cash == Money::from_units(490));
    CHECK(fs[1].cash == Money::from_units(500));
    CHECK(total(g, ps, fs) == before);
}

TEST_CASE("welfare") {
    Government g;
    auto ps = people(4);
    ps[3].step_income = Money::from_units(50);
    g.welfare_threshold = Money::from_units(10);
    CHECK(distribute_welfare(g, ps) == 0);

    g.welfare_payment = Money::from_units(5);
    g.welfare_threshold = Money{};
    CHECK(distribute_welfare(g, ps) == 0);

    g.welfare_threshold = Money::from_units(10);
    const Money before = total(g, ps, {});
    CHECK(distribute_welfare(g, ps) == 3);
    CHECK(g.cash == Money::from_units(-15));
    for (int i = 0; i < 3; ++i) CHECK(ps[i].cash == Money::from_units(105));
    CHECK(ps[3].cash == Money::from_units(100));
    CHECK(total(g, ps, {}) == before);
}

TEST_CASE("subsidies") {
    Government g;
    std::vector<Firm> fs = {firm(0, Sector::ConsumerGood, 0, 0), firm(1, Sector::ConsumerGood, 1, 0),
                            firm(2, Sector::ConsumerGood, 2, 0), firm(3, Sector::Hospital, 3, 0)};
    g.subsidies[index_of(Sector::ConsumerGood)] = Money::from_units(10);
    CHECK(pay_subsidies(g, fs) == Money::from_units(30));
    CHECK(g.cash == Money::from_units(-30));
    CHECK(fs[3].cash == Money{});
}

TEST_CASE("legislation validation") {
    const Params p;
    CHECK_NOTHROW(validate_legislation(law(LegislationKind::SetTaxRate, p.tax_rate_increment), p));
    CHECK_NOTHROW(validate_legislation(law(LegislationKind::SetTaxRate, -3 * p.tax_rate_increment), p));
    CHECK_THROWS_AS(validate_legislation(law(LegislationKind::SetTaxRate, p.tax_rate_increment * 0.5), p),
                    MalformedLegislation);
    CHECK_THROWS_AS(validate_legislation(law(LegislationKind::SetTaxRate, 0.0), p), MalformedLegislation);
    CHECK_THROWS_AS(validate_legislation(law(LegislationKind::Nationalize, 0.0), p), MalformedLegislation);
    CHECK_NOTHROW(validate_legislation(law(LegislationKind::Nationalize, 0.0, Sector::Hospital), p));
    CHECK_THROWS_AS(parse_legislation_kind("Annex"), MalformedLegislation);
    for (auto k : {LegislationKind::Nationalize, LegislationKind::Privatize, LegislationKind::SetWelfarePayment,
                   LegislationKind::SetWelfareThreshold, LegislationKind::SetTaxRate, LegislationKind::SetSubsidy}) {
        CHECK(parse_legislation_kind(legislation_kind_name(k)) == k);
    }
}

TEST_CASE("legislation effects") {
    const Params p;
    Government g;
    auto ps = people(3);
    std::vector<Firm> fs;
    apply_legislation(g, ps, fs, law(LegislationKind::SetTaxRate, p.tax_rate_increment), p);
    apply_legislation(g, ps, fs, law(LegislationKind::SetTaxRate, p.tax_rate_increment), p);
    CHECK(g.tax_rate == doctest::Approx(2 * p.tax_rate_increment));
    apply_legislation(g, ps, fs, law(LegislationKind::SetTaxRate, -10 * p.tax_rate_increment), p);
    CHECK(g.tax_rate == 0.0);
    apply_legislation(g, ps, fs, law(LegislationKind::SetSubsidy, 10, Sector::RawMaterial), p);
    CHECK(g.subsidies[index_of(Sector::RawMaterial)] == Money::from_units(10));
    CHECK_THROWS_AS(apply_legislation(g, ps, fs, law(LegislationKind::Privatize, 0), p), UnknownSector);
}

TEST_CASE("nationalize then privatize") {
    Params p;
    p.nationalize_compensation = 0.5;
    Government g;
    auto ps = people(4, 10);
    ps[2].cash = Money::from_units(500);
    ps[3].cash = Money::from_units(500);
    std::vector<Firm> fs = {firm(0, Sector::RawMaterial, 0, 100), firm(1, Sector::RawMaterial, 1, 40),
                            firm(2, Sector::Hospital, 2, 10)};
    ps[0].owned_business = 0;
    ps[1].owned_business = 1;
    ps[2].owned_business = 2;
    const Money before = total(g, ps, fs);

    apply_legislation(g, ps, fs, law(LegislationKind::Nationalize, 0, Sector::RawMaterial), p);
    CHECK(fs[0].government_owned());
    CHECK(fs[1].government_owned());
    CHECK_FALSE(fs[2].government_owned());
    CHECK(g.owned_firms == std::set<FirmId>{0, 1});
    CHECK(ps[0].cash == Money::from_units(60));
    CHECK(ps[1].cash == Money::from_units(30));
    CHECK_FALSE(ps[0].owned_business);
    CHECK(total(g, ps, fs) == before);

    apply_legislation(g, ps, fs, law(LegislationKind::Privatize, 0, Sector::RawMaterial), p);
    CHECK_FALSE(fs[0].government_owned());
    CHECK(fs[0].owner == PersonId{3});
    CHECK(fs[1].owner == PersonId{0});
    CHECK(ps[3].owned_business == FirmId{0});
    CHECK(g.owned_firms.empty());
    CHECK(total(g, ps, fs) == before);
}

TEST_CASE("policy step") {
    PolicyLimits limits;
    LearningParams lp;
    lp.epsilon = 0.0;

    Government hold;
    hold.q = joint_action_table(lp, 1.0);
    hold.tax_rate = 0.2;
    hold.welfare_payment = Money::from_units(20);
    RandomStream rng = RandomStream::seeded(1);
    govern_step(hold, 3.0, {}, limits, rng);
    CHECK(hold.tax_rate == 0.2);
    CHECK(hold.welfare_payment == Money::from_units(20));

    Government floor;
    floor.q = QTable(9, lp);
    floor.q.set(government_state({}), 0, 1.0);
    govern_step(floor, 0.0, {}, limits, rng);
    CHECK(floor.tax_rate == 0.0);
    CHECK(floor.welfare_payment == Money{});

    Government a, b;
    a.q = b.q = joint_action_table(LearningParams{}, 0.01);
    RandomStream ra = RandomStream::seeded(9), rb = RandomStream::seeded(9);
    for (int i = 0; i < 50; ++i) {
        govern_step(a, i * 0.5, {0.1, 0.1, 100}, limits, ra);
        govern_step(b, i * 0.5, {0.1, 0.1, 100}, limits, rb);
        CHECK(a.tax_rate >= 0.0);
        CHECK(a.tax_rate <= limits.max_tax_rate);
        CHECK(a.welfare_payment >= Money{});
        CHECK(a.welfare_payment <= limits.max_welfare_payment);
    }
    CHECK(a == b);
}

TEST_CASE("policy learns that welfare raises quality of life") {
    PolicyLimits limits;
    limits.max_welfare_payment = Money::from_units(1e9);
    LearningParams lp;
    lp.epsilon = 0.3;
    int converged = 0;
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        Government g;
        g.q = joint_action_table(lp, 0.0);
        RandomStream rng = RandomStream::seeded(seed);
        for (int i = 0; i < 3000; ++i) govern_step(g, g.welfare_payment.units(), {}, limits, rng);
        // True expected reward per joint action is the welfare move times the increment.
        const StateKey s = government_state({});
        std::size_t best = 0;
        for (ActionId a = 1; a < 9; ++a) {
            if (g.q.value(s, a) > g.q.value(s, static_cast<ActionId>(best))) best = a;
        }
        if (decode_joint_action(static_cast<ActionId>(best)).second == Lever::Increase) ++converged;
    }
    CHECK(converged >= 19);
}

#include "citysim/engine.hpp"

#include <algorithm>
#include <cmath>

#include "citysim/epidemics.hpp"
#include "citysim/errors.hpp"
#include "citysim/markets.hpp"

namespace citysim {

namespace {

constexpr std::uint64_t kPersonSalt = 0x50455253ULL << 32;
constexpr std::uint64_t kFirmSalt = 0x4649524DULL << 32;

// Tags of the initialization streams (step 0, phase 0).
constexpr std::uint16_t kTagBuildings = 7;
constexpr std::uint16_t kTagFounders = 8;

// Tags within phases.
constexpr std::uint16_t kTagHospitalChoice = 3;

StreamAddress address(const WorldState& w, Phase phase, StreamKind kind, std::uint32_t entity = 0,
                      std::uint16_t tag = 0) {
    return StreamAddress{w.seed, w.step, static_cast<std::uint8_t>(phase), kind, entity, tag};
}

ProductionParams production_params(const Params& p) {
    return {p.labor_cost_per_good, p.material_cost_per_good, p.labor_per_worker, p.labor_per_equipment,
            p.patients_per_worker};
}

UtilityParams utility_params(const Params& p) {
    UtilityParams u;
    u.consumer_good_utility = p.consumer_good_utility;
    u.base_min_consumption = p.base_min_consumption;
    return u;
}

ContagionParams contagion_params(const Params& p) {
    ContagionParams cp;
    cp.patient_zero_prob = p.patient_zero_prob;
    cp.contact_rate = p.contact_rate;
    cp.transmission_rate = p.transmission_rate;
    cp.recovery_prob = p.recovery_prob;
    cp.sickness_severity = p.sickness_severity;
    cp.recovery_gain = p.recovery_gain;
    cp.price_to_utils = p.price_to_utils;
    return cp;
}

PlanContext plan_context(const WorldState& w) {
    const Params& p = w.params;
    PlanContext ctx;
    ctx.mean_wage = w.stats.mean_wage;
    ctx.starting_wage = p.money(&Params::starting_wage);
    ctx.wage_increment = p.wage_increment;
    ctx.equipment_price = w.stats.mean_price[index_of(Sector::CapitalEquipment)];
    ctx.equipment_amortization_steps = p.equipment_amortization_steps;
    ctx.profit_increment = p.profit_increment;
    ctx.supply_increment = static_cast<std::int64_t>(std::llround(p.supply_increment));
    ctx.bins = p.firm_bins();
    ctx.production = production_params(p);
    return ctx;
}

Money initial_price(const Params& p, Sector s) {
    switch (s) {
    case Sector::Hospital: return p.money(&Params::price_hospital);
    case Sector::CapitalEquipment: return p.money(&Params::price_capital_equipment);
    case Sector::ConsumerGood: return p.money(&Params::price_consumer_good);
    case Sector::RawMaterial: return p.money(&Params::price_raw_material);
    }
    return Money{};
}

Money building_rent(const WorldState& w, const Firm& f) { return w.buildings[f.building].rent; }

std::vector<int> free_slots(const WorldState& w) {
    std::vector<int> free(w.buildings.size());
    for (std::size_t b = 0; b < w.buildings.size(); ++b) free[b] = w.buildings[b].slots;
    for (const auto& f : w.firms) {
        if (!f.bankrupt) --free[f.building];
    }
    return free;
}

Firm& open_firm(WorldState& w, Sector sector, BuildingId building, std::optional<PersonId> owner) {
    const Params& p = w.params;
    Firm f;
    f.id = static_cast<FirmId>(w.firms.size());
    f.sector = sector;
    f.owner = owner;
    f.building = building;
    f.q = joint_action_table(p.learning(), p.q_hold_prior);
    const Money reference = w.stats.mean_price[index_of(sector)];
    f.price = reference > Money{} ? reference : initial_price(p, sector);
    f.profit_margin = p.initial_profit_margin;
    f.supply_target = static_cast<std::int64_t>(std::llround(p.initial_supply));
    if (!owner) w.government.owned_firms.insert(f.id);
    w.firms.push_back(std::move(f));
    w.scratch.plans.emplace_back();
    w.scratch.sold.push_back(0);
    w.scratch.consumed_cost.emplace_back();
    return w.firms.back();
}

void quit_job(WorldState& w, Person& p) {
    if (p.employer) release(w.firms[*p.employer], p);
}

std::vector<Offer> offers_for(const WorldState& w, Sector sector) {
    std::vector<Offer> offers;
    for (const auto& f : w.firms) {
        if (f.bankrupt || f.sector != sector || f.supply <= 0 || f.price <= Money{}) continue;
        offers.push_back(Offer{f.id, f.price, f.supply});
    }
    return offers;
}

Money mean_offer_price(const std::vector<Offer>& offers) {
    if (offers.empty()) return Money{};
    std::int64_t cents = 0;
    for (const auto& o : offers) cents += o.price.cents();
    return Money::from_cents(cents / static_cast<std::int64_t>(offers.size()));
}

void settle_sale(WorldState& w, Firm& seller, Money& buyer_cash, const Transaction& tx) {
    transfer(buyer_cash, seller.cash, tx.total());
    seller.supply -= tx.units;
    seller.books.revenue += tx.total();
    w.scratch.sold[seller.id] += tx.units;
}

// ---- phase commits ------------------------------------------------------------------

void commit_legislation(WorldState& w, const IntentSet& in) {
    for (auto& p : w.persons) p.step_income = Money{};
    for (auto& f : w.firms) f.books = FirmBooks{};
    StepScratch& s = w.scratch;
    s.plans.assign(w.firms.size(), Plan{});
    s.sold.assign(w.firms.size(), 0);
    s.consumed_cost.assign(w.firms.size(), Money{});
    s.job_seekers.clear();
    s.bankruptcies = 0;
    for (const auto& l : in.legislation) apply_legislation(w.government, w.persons, w.firms, l, w.params);
}

void commit_person_intents(WorldState& w, const IntentSet& in) {
    std::vector<int> free = free_slots(w);
    const Money capital = w.params.money(&Params::min_business_capital);
    for (const auto& intent : in.persons) {
        Person& p = w.persons[intent.person];
        if (!p.alive) continue;
        if (intent.found) {
            const BuildingId b = intent.found->building;
            const Money rent = w.buildings[b].rent;
            if (!p.is_owner() && free[b] > 0 && p.cash >= capital + rent) {
                --free[b];
                quit_job(w, p);
                Firm& f = open_firm(w, intent.found->sector, b, p.id);
                transfer(p.cash, f.cash, capital);
                p.owned_business = f.id;
                continue;
            }
        }
        if (intent.seek_job) w.scratch.job_seekers.push_back(p.id);
    }
}

void commit_firm_planning(WorldState& w, const IntentSet& in) {
    for (const auto& intent : in.plans) {
        Firm& f = w.firms[intent.firm];
        if (f.bankrupt) continue;
        f.last_state = intent.plan.state;
        f.last_action = intent.plan.action;
        f.profit_margin = intent.plan.profit_margin;
        f.supply_target = intent.plan.supply_target;
        w.scratch.plans[f.id] = intent.plan;
        for (PersonId id : intent.fired) release(f, w.persons[id]);
    }
}

void commit_labor(WorldState& w) {
    const Params& p = w.params;
    const Money reservation =
        w.stats.mean_price[index_of(Sector::ConsumerGood)].scaled(p.base_min_consumption);
    std::vector<bool> seeking(w.persons.size(), false);
    for (PersonId id : w.scratch.job_seekers) seeking[id] = true;

    std::vector<Applicant> applicants;
    for (const auto& person : w.persons) {
        if (!person.alive || person.is_owner()) continue;
        if (person.is_employed() && !seeking[person.id]) continue;
        Money floor = reservation;
        if (person.is_employed()) floor = max(floor, person.wage + Money::from_cents(1));
        applicants.push_back(Applicant{person.id, floor, person.employer});
    }

    std::vector<JobOpening> openings;
    for (const auto& f : w.firms) {
        if (f.bankrupt) continue;
        const Plan& plan = w.scratch.plans[f.id];
        const std::int64_t gap = plan.workers_needed - f.workers();
        if (gap <= 0) continue;
        JobOpening o{f.id, gap, plan.wage_offer, {}};
        o.employees.reserve(f.employees.size());
        for (const auto& e : f.employees) o.employees.push_back(e.person);
        openings.push_back(std::move(o));
    }
    if (applicants.empty() || openings.empty()) return;

    const auto hires = clear_labor_market(applicants, openings, w.graph, p.referral_multiplier,
                                          address(w, Phase::Labor, StreamKind::Market));
    for (const auto& h : hires) {
        Person& person = w.persons[h.person];
        quit_job(w, person);
        employ(w.firms[h.firm], person, h.wage);
    }
}

void commit_firm_market(WorldState& w, Phase phase, Sector seller_sector, std::initializer_list<Sector> buyer_sectors) {
    std::vector<Demand> demands;
    for (const auto& f : w.firms) {
        if (f.bankrupt) continue;
        if (std::find(buyer_sectors.begin(), buyer_sectors.end(), f.sector) == buyer_sectors.end()) continue;
        const Plan& plan = w.scratch.plans[f.id];
        const std::int64_t units = phase == Phase::Materials ? plan.materials_to_buy : plan.equipment_to_buy;
        if (units <= 0 || f.cash <= Money{}) continue;
        demands.push_back(Demand{f.id, units, f.cash});
    }
    std::vector<Offer> offers = offers_for(w, seller_sector);
    if (demands.empty() || offers.empty()) return;

    const auto result = clear_goods_market(demands, offers, address(w, phase, StreamKind::Market));
    for (const auto& tx : result.transactions) {
        Firm& buyer = w.firms[tx.buyer];
        settle_sale(w, w.firms[tx.seller], buyer.cash, tx);
        if (phase == Phase::Materials) {
            buyer.materials += tx.units;
            buyer.materials_basis += tx.total();
            buyer.books.materials += tx.total();
        } else {
            buyer.equipment += tx.units;
            buyer.books.equipment += tx.total();
        }
    }
}

void commit_production(WorldState& w, const IntentSet& in) {
    for (const auto& intent : in.production) {
        Firm& f = w.firms[intent.firm];
        if (f.bankrupt) continue;
        w.scratch.consumed_cost[f.id] = apply_production(f, intent.result);
    }
}

void commit_pricing(WorldState& w, const IntentSet& in) {
    for (const auto& intent : in.prices) {
        Firm& f = w.firms[intent.firm];
        if (!f.bankrupt) f.price = intent.price;
    }
}

void commit_consumer_goods(WorldState& w) {
    std::vector<Offer> offers = offers_for(w, Sector::ConsumerGood);
    if (offers.empty()) return;
    const Money reference = mean_offer_price(offers);
    const UtilityParams u = utility_params(w.params);
    std::vector<Demand> demands;
    for (const auto& p : w.persons) {
        if (!p.alive || p.cash <= Money{}) continue;
        const std::int64_t desired = desired_food(p, reference, u);
        if (desired > 0) demands.push_back(Demand{p.id, desired, p.cash});
    }
    const auto result = clear_goods_market(demands, offers, address(w, Phase::ConsumerGoods, StreamKind::Market));
    for (const auto& tx : result.transactions) {
        Person& buyer = w.persons[tx.buyer];
        settle_sale(w, w.firms[tx.seller], buyer.cash, tx);
        buyer.food_stock += static_cast<double>(tx.units);
    }
}

void commit_contagion(WorldState& w, const IntentSet& in) {
    for (PersonId id : in.infections) {
        if (w.persons[id].alive) w.persons[id].sick = true;
    }
}

void commit_healthcare(WorldState& w, const IntentSet& in) {
    std::vector<Offer> offers = offers_for(w, Sector::Hospital);
    if (offers.empty() || in.patients.empty()) return;
    std::vector<std::vector<PersonId>> lists(offers.size());
    for (PersonId id : in.patients) {
        const Person& p = w.persons[id];
        if (!p.alive || !p.sick) continue;
        RandomStream rng(address(w, Phase::Healthcare, StreamKind::Person, id, kTagHospitalChoice));
        std::size_t i;
        try {
            i = pick_offer(offers, rng, p.cash);
        } catch (const MarketEmpty&) {
            continue;
        }
        --offers[i].available;
        lists[i].push_back(id);
    }
    const ContagionParams cp = contagion_params(w.params);
    const StreamAddress base = address(w, Phase::Healthcare, StreamKind::Person);
    for (std::size_t i = 0; i < offers.size(); ++i) {
        if (lists[i].empty()) continue;
        Firm& hospital = w.firms[offers[i].seller];
        const auto outcomes = treat(hospital, lists[i], w.persons, cp, base);
        for (const auto& o : outcomes) {
            if (o.treated) ++w.scratch.sold[hospital.id];
        }
    }
}

void commit_health(WorldState& w, const IntentSet& in) {
    for (const auto& intent : in.health) {
        Person& p = w.persons[intent.person];
        if (!p.alive) continue;
        p.food_stock = intent.food_stock;
        p.health = intent.health;
        if (!intent.alive) {
            p.alive = false;
            quit_job(w, p);
        }
    }
}

Money net_profit(const Firm& f) { return f.books.operating_profit() - f.books.taxes + f.books.subsidies; }

void update_stats(WorldState& w) {
    MarketStats& s = w.stats;
    std::int64_t wage_cents = 0;
    std::int64_t workers = 0;
    std::array<std::int64_t, 4> price_cents{};
    std::array<double, 4> profit{};
    std::array<std::int64_t, 4> count{};
    for (const auto& f : w.firms) {
        if (f.bankrupt) continue;
        const std::size_t k = index_of(f.sector);
        price_cents[k] += f.price.cents();
        profit[k] += f.last_profit.units();
        ++count[k];
        for (const auto& e : f.employees) {
            wage_cents += e.wage.cents();
            ++workers;
        }
    }
    if (workers > 0) s.mean_wage = Money::from_cents(wage_cents / workers);
    for (std::size_t k = 0; k < 4; ++k) {
        if (count[k] == 0) {
            s.mean_profit[k] = 0.0;
            continue;
        }
        s.mean_price[k] = Money::from_cents(price_cents[k] / count[k]);
        s.mean_profit[k] = profit[k] / static_cast<double>(count[k]);
    }
}

void commit_government(WorldState& w) {
    const Params& p = w.params;
    Government& g = w.government;

    for (auto& f : w.firms) {
        if (!f.bankrupt) pay_obligations(f, building_rent(w, f), g.cash, w.persons);
    }
    collect_taxes(g, w.persons, w.firms);
    distribute_welfare(g, w.persons);
    pay_subsidies(g, w.firms);

    for (auto& f : w.firms) {
        if (f.bankrupt) continue;
        const Money net = net_profit(f);
        if (net <= Money{}) continue;
        const Money dividend = min(net.scaled(p.owner_dividend_share), max(Money{}, f.cash));
        if (dividend <= Money{}) continue;
        if (f.government_owned()) {
            transfer(f.cash, g.cash, dividend);
        } else if (w.persons[*f.owner].alive) {
            transfer(f.cash, w.persons[*f.owner].cash, dividend);
        } else {
            continue;
        }
        f.books.dividends += dividend;
    }

    const int grace = static_cast<int>(std::llround(p.bankruptcy_grace));
    const SignalBins bins = p.firm_bins();
    for (auto& f : w.firms) {
        if (f.bankrupt) continue;
        cover_deficit(f, g.cash);
        if (update_solvency(f, w.persons, grace).went_bankrupt) {
            ++w.bankruptcies;
            ++w.scratch.bankruptcies;
            continue;
        }
        const Money net = net_profit(f);
        f.prev_profit = f.last_profit;
        f.last_profit = net;
        f.last_sold = w.scratch.sold[f.id];
        if (f.last_action) {
            update(f.q, f.last_state, *f.last_action, net.units() / p.firm_reward_scale, firm_state(f, bins));
        }
        f.q.decay_epsilon();
    }

    const double mean_qol = mean_quality_of_life(w);
    GovernmentSignals signals{mean_qol - g.last_mean_qol, unemployment_rate(w), g.cash.units()};
    RandomStream rng(address(w, Phase::Government, StreamKind::Government));
    govern_step(g, mean_qol, signals, policy_limits(p), rng);

    for (auto& f : w.firms) {
        if (f.sector == Sector::Hospital) f.supply = 0;
    }
    update_stats(w);
}

void commit_metrics(WorldState& w) {
    ++w.step;
    w.metrics.push_back(compute_metrics(w));
}

// ---- intents ------------------------------------------------------------------------

void person_intents(const WorldState& w, const Partition& part, IntentSet& out) {
    const Params& p = w.params;
    FoundingView view;
    const std::vector<int> free = free_slots(w);
    for (std::size_t b = 0; b < w.buildings.size(); ++b) {
        if (free[b] > 0) view.vacancies.push_back(VacantBuilding{w.buildings[b].id, w.buildings[b].rent});
    }
    view.sector_mean_profit = w.stats.mean_profit;
    view.min_business_capital = p.money(&Params::min_business_capital);
    view.starting_wage = p.money(&Params::starting_wage);
    view.profit_floor = p.founding_profit_floor;
    const JobSeekingParams jsp{p.base_min_consumption, p.wage_under_market_multiplier};
    const Money food_price = w.stats.mean_price[index_of(Sector::ConsumerGood)];

    for (const auto& person : w.persons) {
        if (!person.alive || !part.owns_person(person.id)) continue;
        RandomStream rng(address(w, Phase::PersonIntents, StreamKind::Person, person.id));
        PersonIntent intent{person.id, should_start_business(person, view, rng), false};
        if (!intent.found) intent.seek_job = needs_job(person, w.stats.mean_wage, food_price, jsp);
        if (intent.found || intent.seek_job) out.persons.push_back(std::move(intent));
    }
}

void firm_plan_intents(const WorldState& w, const Partition& part, IntentSet& out) {
    const PlanContext ctx = plan_context(w);
    for (const auto& f : w.firms) {
        if (f.bankrupt || !part.owns_firm(f.id)) continue;
        RandomStream rng(address(w, Phase::FirmPlanning, StreamKind::Firm, f.id));
        FirmPlanIntent intent{f.id, plan_step(f, ctx, rng), {}};
        Firm trial = f;
        intent.fired = fire_overpaid(trial, w.stats.mean_wage, w.params.extravagant_wage_range);
        const std::int64_t excess = trial.workers() - intent.plan.workers_needed;
        if (excess > 0) {
            const auto cut = downsize(trial, excess, rng);
            intent.fired.insert(intent.fired.end(), cut.begin(), cut.end());
        }
        std::sort(intent.fired.begin(), intent.fired.end());
        out.plans.push_back(std::move(intent));
    }
}

void production_intents(const WorldState& w, const Partition& part, IntentSet& out) {
    const ProductionParams pp = production_params(w.params);
    for (const auto& f : w.firms) {
        if (f.bankrupt || !part.owns_firm(f.id)) continue;
        out.production.push_back(ProductionIntent{f.id, production_for(f, pp)});
    }
}

void pricing_intents(const WorldState& w, const Partition& part, IntentSet& out) {
    const Money min_price = w.params.money(&Params::min_price);
    for (const auto& f : w.firms) {
        if (f.bankrupt || !part.owns_firm(f.id) || f.last_produced <= 0) continue;
        const Money costs = f.wage_bill() + w.scratch.consumed_cost[f.id] + building_rent(w, f);
        out.prices.push_back(PriceIntent{f.id, set_price(f.last_produced, costs, f.profit_margin, min_price)});
    }
}

void contagion_intents(const WorldState& w, const Partition& part, IntentSet& out) {
    const ContagionParams cp = contagion_params(w.params);
    const StreamAddress base = address(w, Phase::Contagion, StreamKind::Person);
    for (const auto& p : w.persons) {
        if (!p.alive || p.sick || !part.owns_person(p.id)) continue;
        if (seeded_infection(p, cp, base) || caught_from_neighbors(p, w.persons, w.graph, cp, base)) {
            out.infections.push_back(p.id);
        }
    }
}

void healthcare_intents(const WorldState& w, const Partition& part, IntentSet& out) {
    const Money reference = mean_offer_price(offers_for(w, Sector::Hospital));
    if (reference <= Money{}) return;
    const ContagionParams cp = contagion_params(w.params);
    const HealthUtility hu;
    for (const auto& p : w.persons) {
        if (!p.alive || !p.sick || !part.owns_person(p.id)) continue;
        if (wants_treatment(p, reference, cp, hu)) out.patients.push_back(p.id);
    }
}

void health_intents(const WorldState& w, const Partition& part, IntentSet& out) {
    const Params& prm = w.params;
    const HealthParams hp{prm.base_min_consumption, prm.hunger_penalty, prm.sickness_severity};
    for (const auto& p : w.persons) {
        if (!p.alive || !part.owns_person(p.id)) continue;
        const double consumed = std::min(p.food_stock, prm.base_min_consumption);
        Person after = p;
        after.food_stock = std::max(0.0, p.food_stock - consumed);
        after = end_of_step_health(std::move(after), consumed, hp);
        out.health.push_back(HealthIntent{p.id, after.food_stock, after.health, after.alive});
    }
}

template <class T, class Key>
void sort_by(std::vector<T>& v, Key key) {
    std::stable_sort(v.begin(), v.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
}

} // namespace

std::string_view phase_name(Phase p) {
    switch (p) {
    case Phase::Legislation: return "legislation";
    case Phase::PersonIntents: return "person_intents";
    case Phase::FirmPlanning: return "firm_planning";
    case Phase::Labor: return "labor";
    case Phase::Materials: return "materials";
    case Phase::Equipment: return "equipment";
    case Phase::Production: return "production";
    case Phase::Pricing: return "pricing";
    case Phase::ConsumerGoods: return "consumer_goods";
    case Phase::Contagion: return "contagion";
    case Phase::Healthcare: return "healthcare";
    case Phase::Health: return "health";
    case Phase::Government: return "government";
    case Phase::Metrics: return "metrics";
    }
    return "unknown";
}

bool is_parallel(Phase p) {
    switch (p) {
    case Phase::PersonIntents:
    case Phase::FirmPlanning:
    case Phase::Production:
    case Phase::Pricing:
    case Phase::Contagion:
    case Phase::Healthcare:
    case Phase::Health: return true;
    default: return false;
    }
}

void IntentSet::merge(IntentSet&& o) {
    auto append = [](auto& dst, auto& src) {
        dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
    };
    append(legislation, o.legislation);
    append(persons, o.persons);
    append(plans, o.plans);
    append(production, o.production);
    append(prices, o.prices);
    append(infections, o.infections);
    append(patients, o.patients);
    append(health, o.health);
}

void IntentSet::canonicalize() {
    sort_by(persons, [](const PersonIntent& i) { return i.person; });
    sort_by(plans, [](const FirmPlanIntent& i) { return i.firm; });
    sort_by(production, [](const ProductionIntent& i) { return i.firm; });
    sort_by(prices, [](const PriceIntent& i) { return i.firm; });
    std::sort(infections.begin(), infections.end());
    std::sort(patients.begin(), patients.end());
    sort_by(health, [](const HealthIntent& i) { return i.person; });
}

bool Partition::owns_person(PersonId id) const { return count <= 1 || mix64(kPersonSalt ^ id) % count == index; }
bool Partition::owns_firm(FirmId id) const { return count <= 1 || mix64(kFirmSalt ^ id) % count == index; }

IntentSet compute_intents(const WorldState& w, Phase phase, const Partition& part) {
    IntentSet out;
    out.phase = phase;
    switch (phase) {
    case Phase::PersonIntents: person_intents(w, part, out); break;
    case Phase::FirmPlanning: firm_plan_intents(w, part, out); break;
    case Phase::Production: production_intents(w, part, out); break;
    case Phase::Pricing: pricing_intents(w, part, out); break;
    case Phase::Contagion: contagion_intents(w, part, out); break;
    case Phase::Healthcare: healthcare_intents(w, part, out); break;
    case Phase::Health: health_intents(w, part, out); break;
    default: break;
    }
    return out;
}

void commit_phase(WorldState& w, Phase phase, const IntentSet& in) {
    switch (phase) {
    case Phase::Legislation: commit_legislation(w, in); break;
    case Phase::PersonIntents: commit_person_intents(w, in); break;
    case Phase::FirmPlanning: commit_firm_planning(w, in); break;
    case Phase::Labor: commit_labor(w); break;
    case Phase::Materials:
        commit_firm_market(w, phase, Sector::RawMaterial, {Sector::ConsumerGood, Sector::CapitalEquipment});
        break;
    case Phase::Equipment:
        commit_firm_market(w, phase, Sector::CapitalEquipment, {Sector::RawMaterial, Sector::ConsumerGood});
        break;
    case Phase::Production: commit_production(w, in); break;
    case Phase::Pricing: commit_pricing(w, in); break;
    case Phase::ConsumerGoods: commit_consumer_goods(w); break;
    case Phase::Contagion: commit_contagion(w, in); break;
    case Phase::Healthcare: commit_healthcare(w, in); break;
    case Phase::Health: commit_health(w, in); break;
    case Phase::Government: commit_government(w); break;
    case Phase::Metrics: commit_metrics(w); break;
    }
}

IntentSet LocalExecutor::gather(const WorldState& w, Phase phase) { return compute_intents(w, phase, Partition{}); }

MetricsRow step(WorldState& w, PhaseExecutor& exec, const std::vector<Legislation>& legislation,
                const StepOptions& options) {
    for (Phase phase : kPhases) {
        IntentSet in;
        if (is_parallel(phase)) {
            in = exec.gather(w, phase);
            in.canonicalize();
        } else if (phase == Phase::Legislation) {
            in.legislation = legislation;
        }
        in.phase = phase;
        commit_phase(w, phase, in);
        exec.committed(w, phase, in);
    }
    if (options.check_invariants) check_invariants(w);
    exec.step_done(w);
    return w.metrics.back();
}

MetricsRow step(WorldState& w, const std::vector<Legislation>& legislation) {
    LocalExecutor exec;
    return step(w, exec, legislation);
}

WorldState init_world(const ScenarioConfig& sc, const WorldInputs& inputs, std::size_t population,
                      std::uint64_t seed) {
    WorldState w;
    w.seed = seed;
    w.scenario = sc.name;
    w.params = sc.effective_params();
    validate(w.params);
    const Params& p = w.params;

    w.persons = generate_population(inputs.net, inputs.names, population, seed);
    w.graph = build_graph(w.persons, inputs.coefficients, seed, inputs.graph);

    const auto n_buildings = static_cast<std::size_t>(std::llround(p.n_buildings));
    RandomStream rent_rng(StreamAddress{seed, 0, 0, StreamKind::Market, 0, kTagBuildings});
    for (std::size_t b = 0; b < n_buildings; ++b) {
        const double factor = 1.0 + p.rent_spread * (2.0 * rent_rng.uniform() - 1.0);
        w.buildings.push_back(Building{static_cast<BuildingId>(b), static_cast<int>(std::llround(p.firms_per_building)),
                                       Money::from_units(p.rent * factor)});
    }

    Government& g = w.government;
    g.cash = p.money(&Params::government_initial_cash);
    g.tax_rate = p.tax_rate;
    g.welfare_payment = p.money(&Params::welfare);
    g.welfare_threshold = p.money(&Params::starting_welfare_req);
    g.q = joint_action_table(p.learning(), p.q_hold_prior);
    w.stats.mean_wage = p.money(&Params::starting_wage);
    for (Sector s : kSectors) w.stats.mean_price[index_of(s)] = initial_price(p, s);

    // Genesis firms, spread over buildings round-robin.
    RandomStream rng(StreamAddress{seed, 0, 0, StreamKind::Government, 0, kTagFounders});
    auto draw_unemployed = [&]() -> std::optional<PersonId> {
        std::vector<PersonId> pool;
        for (const auto& person : w.persons) {
            if (person.alive && !person.is_owner() && !person.is_employed()) pool.push_back(person.id);
        }
        if (pool.empty()) return std::nullopt;
        return pool[rng.uniform_int(pool.size())];
    };
    std::vector<int> free(w.buildings.size());
    for (std::size_t b = 0; b < w.buildings.size(); ++b) free[b] = w.buildings[b].slots;
    const ProductionParams pp = production_params(p);
    const auto per_sector = static_cast<std::size_t>(std::llround(p.initial_firms_per_sector));
    const auto staff = static_cast<std::size_t>(std::llround(p.initial_staff));
    const auto supply = static_cast<std::int64_t>(std::llround(p.initial_supply));
    std::size_t cursor = 0;
    for (Sector s : kSectors) {
        for (std::size_t k = 0; k < per_sector; ++k) {
            std::optional<BuildingId> building;
            for (std::size_t tries = 0; tries < free.size(); ++tries, ++cursor) {
                const std::size_t b = cursor % free.size();
                if (free[b] > 0) {
                    building = static_cast<BuildingId>(b);
                    ++cursor;
                    break;
                }
            }
            if (!building) break;
            --free[*building];
            const auto owner = draw_unemployed();
            Firm& f = open_firm(w, s, *building, owner);
            if (owner) w.persons[*owner].owned_business = f.id;
            f.cash = p.money(&Params::min_business_capital) * static_cast<std::int64_t>(std::llround(p.initial_cash_multiple));
            if (s == Sector::Hospital) {
                f.supply_target = static_cast<std::int64_t>(std::llround(static_cast<double>(staff) * pp.patients_per_worker));
            } else {
                f.supply = supply;
                f.supply_target = supply;
            }
            if (f.uses_materials()) {
                f.materials = static_cast<std::int64_t>(std::ceil(static_cast<double>(supply) * pp.material_cost_per_good));
                f.materials_basis = initial_price(p, Sector::RawMaterial) * f.materials;
            }
            for (std::size_t i = 0; i < staff; ++i) {
                const auto hire = draw_unemployed();
                if (!hire) break;
                employ(f, w.persons[*hire], p.money(&Params::starting_wage));
            }
        }
    }

    g.last_mean_qol = mean_quality_of_life(w);
    w.money_supply = total_cash(w);
    w.scratch.plans.assign(w.firms.size(), Plan{});
    w.scratch.sold.assign(w.firms.size(), 0);
    w.scratch.consumed_cost.assign(w.firms.size(), Money{});
    check_invariants(w);
    return w;
}

WorldState init_world(const ScenarioConfig& sc, std::size_t population, std::uint64_t seed) {
    return init_world(sc, default_inputs(), population, seed);
}

std::vector<MetricsRow> run(WorldState& w, std::uint32_t steps, const StepObserver& observer) {
    LocalExecutor exec;
    std::vector<MetricsRow> rows;
    rows.reserve(steps);
    for (std::uint32_t i = 0; i < steps; ++i) {
        rows.push_back(step(w, exec));
        if (observer && !observer(w, rows.back())) break;
    }
    return rows;
}

} // namespace citysim

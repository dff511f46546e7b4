#include "citysim/serialize.hpp"

#include "citysim/errors.hpp"

namespace citysim {

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> optional_from(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

Json state_json(const StateKey& s) { return Json::array({s[0], s[1], s[2]}); }
StateKey state_from(const Json& j) { return {j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()}; }

Json plan_json(const Plan& p) {
    return Json{{"state", state_json(p.state)},       {"action", p.action},
                {"supply_target", p.supply_target},   {"profit_margin", p.profit_margin},
                {"desired_labor", p.desired_labor},   {"workers_needed", p.workers_needed},
                {"equipment_to_buy", p.equipment_to_buy}, {"materials_to_buy", p.materials_to_buy},
                {"wage_offer", p.wage_offer}};
}

Plan plan_from(const Json& j) {
    Plan p;
    p.state = state_from(j.at("state"));
    p.action = j.at("action").get<ActionId>();
    p.supply_target = j.at("supply_target").get<std::int64_t>();
    p.profit_margin = j.at("profit_margin").get<double>();
    p.desired_labor = j.at("desired_labor").get<double>();
    p.workers_needed = j.at("workers_needed").get<std::int64_t>();
    p.equipment_to_buy = j.at("equipment_to_buy").get<std::int64_t>();
    p.materials_to_buy = j.at("materials_to_buy").get<std::int64_t>();
    p.wage_offer = j.at("wage_offer").get<Money>();
    return p;
}

Json books_json(const FirmBooks& b) {
    return Json::array({b.revenue, b.wages, b.materials, b.equipment, b.rent, b.taxes, b.subsidies, b.dividends,
                        b.bailout});
}

FirmBooks books_from(const Json& j) {
    FirmBooks b;
    Money* fields[] = {&b.revenue, &b.wages, &b.materials, &b.equipment, &b.rent,
                       &b.taxes,   &b.subsidies, &b.dividends, &b.bailout};
    for (std::size_t i = 0; i < std::size(fields); ++i) *fields[i] = j.at(i).get<Money>();
    return b;
}

Json demographics_json(const Demographics& d) {
    return Json::array({d.race, d.sex, d.age, d.education, d.neighborhood, d.income, d.age_rank, d.education_rank,
                        d.income_rank});
}

Demographics demographics_from(const Json& j) {
    Demographics d;
    d.race = j.at(0);
    d.sex = j.at(1);
    d.age = j.at(2);
    d.education = j.at(3);
    d.neighborhood = j.at(4);
    d.income = j.at(5);
    d.age_rank = j.at(6);
    d.education_rank = j.at(7);
    d.income_rank = j.at(8);
    return d;
}

Json scratch_json(const StepScratch& s) {
    Json plans = Json::array();
    for (const auto& p : s.plans) plans.push_back(plan_json(p));
    return Json{{"plans", plans},
                {"job_seekers", s.job_seekers},
                {"sold", s.sold},
                {"consumed_cost", s.consumed_cost},
                {"bankruptcies", s.bankruptcies}};
}

StepScratch scratch_from(const Json& j) {
    StepScratch s;
    for (const auto& p : j.at("plans")) s.plans.push_back(plan_from(p));
    s.job_seekers = j.at("job_seekers").get<std::vector<PersonId>>();
    s.sold = j.at("sold").get<std::vector<std::int64_t>>();
    s.consumed_cost = j.at("consumed_cost").get<std::vector<Money>>();
    s.bankruptcies = j.at("bankruptcies").get<std::uint64_t>();
    return s;
}

} // namespace

void to_json(Json& j, const Money& m) { j = m.cents(); }
void from_json(const Json& j, Money& m) { m = Money::from_cents(j.get<std::int64_t>()); }

void to_json(Json& j, const Person& p) {
    j = Json{{"id", p.id},
             {"demographics", demographics_json(p.demographics)},
             {"name", p.name},
             {"cash", p.cash},
             {"wage", p.wage},
             {"employer", optional_json(p.employer)},
             {"owned_business", optional_json(p.owned_business)},
             {"food_stock", p.food_stock},
             {"health", p.health},
             {"sick", p.sick},
             {"frugality", p.frugality},
             {"alive", p.alive},
             {"step_income", p.step_income}};
}

void from_json(const Json& j, Person& p) {
    p.id = j.at("id");
    p.demographics = demographics_from(j.at("demographics"));
    p.name = j.at("name");
    p.cash = j.at("cash").get<Money>();
    p.wage = j.at("wage").get<Money>();
    p.employer = optional_from<FirmId>(j.at("employer"));
    p.owned_business = optional_from<FirmId>(j.at("owned_business"));
    p.food_stock = j.at("food_stock");
    p.health = j.at("health");
    p.sick = j.at("sick");
    p.frugality = j.at("frugality");
    p.alive = j.at("alive");
    p.step_income = j.at("step_income").get<Money>();
}

void to_json(Json& j, const QTable& q) {
    Json rows = Json::array();
    for (const auto& [s, values] : q.rows()) rows.push_back(Json::array({state_json(s), values}));
    const auto& lp = q.params();
    j = Json{{"actions", q.action_count()},
             {"params", Json::array({lp.alpha, lp.gamma, lp.epsilon, lp.epsilon_decay, lp.epsilon_floor})},
             {"epsilon", q.epsilon()},
             {"rows", rows}};
}

void from_json(const Json& j, QTable& q) {
    const auto& lp = j.at("params");
    LearningParams params{lp.at(0), lp.at(1), lp.at(2), lp.at(3), lp.at(4)};
    q = QTable(j.at("actions").get<std::size_t>(), params);
    q.set_epsilon(j.at("epsilon"));
    for (const auto& row : j.at("rows")) {
        const StateKey s = state_from(row.at(0));
        const auto values = row.at(1).get<std::vector<double>>();
        for (std::size_t a = 0; a < values.size(); ++a) q.set(s, static_cast<ActionId>(a), values[a]);
    }
}

void to_json(Json& j, const Firm& f) {
    Json staff = Json::array();
    for (const auto& e : f.employees) staff.push_back(Json::array({e.person, e.wage}));
    j = Json{{"id", f.id},
             {"sector", sector_name(f.sector)},
             {"owner", optional_json(f.owner)},
             {"building", f.building},
             {"cash", f.cash},
             {"supply", f.supply},
             {"materials", f.materials},
             {"equipment", f.equipment},
             {"employees", staff},
             {"price", f.price},
             {"profit_margin", f.profit_margin},
             {"supply_target", f.supply_target},
             {"q", f.q},
             {"last_sold", f.last_sold},
             {"last_produced", f.last_produced},
             {"last_profit", f.last_profit},
             {"prev_profit", f.prev_profit},
             {"last_state", state_json(f.last_state)},
             {"last_action", optional_json(f.last_action)},
             {"negative_cash_steps", f.negative_cash_steps},
             {"bankrupt", f.bankrupt},
             {"materials_basis", f.materials_basis},
             {"books", books_json(f.books)}};
}

void from_json(const Json& j, Firm& f) {
    f.id = j.at("id");
    f.sector = parse_sector(j.at("sector").get<std::string>());
    f.owner = optional_from<PersonId>(j.at("owner"));
    f.building = j.at("building");
    f.cash = j.at("cash").get<Money>();
    f.supply = j.at("supply");
    f.materials = j.at("materials");
    f.equipment = j.at("equipment");
    f.employees.clear();
    for (const auto& e : j.at("employees")) f.employees.push_back(Employee{e.at(0), e.at(1).get<Money>()});
    f.price = j.at("price").get<Money>();
    f.profit_margin = j.at("profit_margin");
    f.supply_target = j.at("supply_target");
    f.q = j.at("q").get<QTable>();
    f.last_sold = j.at("last_sold");
    f.last_produced = j.at("last_produced");
    f.last_profit = j.at("last_profit").get<Money>();
    f.prev_profit = j.at("prev_profit").get<Money>();
    f.last_state = state_from(j.at("last_state"));
    f.last_action = optional_from<ActionId>(j.at("last_action"));
    f.negative_cash_steps = j.at("negative_cash_steps");
    f.bankrupt = j.at("bankrupt");
    f.materials_basis = j.at("materials_basis").get<Money>();
    f.books = books_from(j.at("books"));
}

void to_json(Json& j, const Government& g) {
    j = Json{{"cash", g.cash},
             {"tax_rate", g.tax_rate},
             {"welfare_payment", g.welfare_payment},
             {"welfare_threshold", g.welfare_threshold},
             {"subsidies", g.subsidies},
             {"owned_firms", g.owned_firms},
             {"q", g.q},
             {"last_mean_qol", g.last_mean_qol},
             {"last_state", state_json(g.last_state)},
             {"last_action", optional_json(g.last_action)}};
}

void from_json(const Json& j, Government& g) {
    g.cash = j.at("cash").get<Money>();
    g.tax_rate = j.at("tax_rate");
    g.welfare_payment = j.at("welfare_payment").get<Money>();
    g.welfare_threshold = j.at("welfare_threshold").get<Money>();
    g.subsidies = j.at("subsidies").get<std::array<Money, 4>>();
    g.owned_firms = j.at("owned_firms").get<std::set<FirmId>>();
    g.q = j.at("q").get<QTable>();
    g.last_mean_qol = j.at("last_mean_qol");
    g.last_state = state_from(j.at("last_state"));
    g.last_action = optional_from<ActionId>(j.at("last_action"));
}

void to_json(Json& j, const Legislation& l) {
    j = Json{{"kind", legislation_kind_name(l.kind)},
             {"sector", l.sector ? Json(sector_name(*l.sector)) : Json(nullptr)},
             {"delta", l.delta},
             {"proposer", l.proposer},
             {"deadline", l.deadline}};
}

void from_json(const Json& j, Legislation& l) {
    try {
        l.kind = parse_legislation_kind(j.at("kind").get<std::string>());
        const auto sector = j.value("sector", Json(nullptr));
        l.sector = sector.is_null() ? std::nullopt : std::optional<Sector>(parse_sector(sector.get<std::string>()));
        l.delta = j.value("delta", 0.0);
        l.proposer = j.value("proposer", PersonId{0});
        l.deadline = j.value("deadline", std::uint32_t{0});
    } catch (const UnknownSector& e) {
        throw MalformedLegislation(e.what());
    } catch (const Json::exception& e) {
        throw MalformedLegislation(e.what());
    }
}

void to_json(Json& j, const MetricsRow& r) {
    j = Json{{"step", r.step},
             {"mean_qol", r.mean_qol},
             {"bankruptcies", r.bankruptcies},
             {"mean_material_price", r.mean_material_price},
             {"mean_wage", r.mean_wage},
             {"consumer_profit", r.consumer_profit},
             {"mean_consumer_price", r.mean_consumer_price},
             {"population", r.population},
             {"sick", r.sick},
             {"unemployment", r.unemployment}};
}

void from_json(const Json& j, MetricsRow& r) {
    r.step = j.at("step");
    r.mean_qol = j.at("mean_qol");
    r.bankruptcies = j.at("bankruptcies");
    r.mean_material_price = j.at("mean_material_price");
    r.mean_wage = j.at("mean_wage");
    r.consumer_profit = j.at("consumer_profit");
    r.mean_consumer_price = j.at("mean_consumer_price");
    r.population = j.at("population");
    r.sick = j.at("sick");
    r.unemployment = j.at("unemployment");
}

void to_json(Json& j, const IntentSet& s) {
    Json persons = Json::array();
    for (const auto& i : s.persons) {
        persons.push_back(Json::array({i.person, i.seek_job,
                                       i.found ? Json::array({index_of(i.found->sector), i.found->building})
                                               : Json(nullptr)}));
    }
    Json plans = Json::array();
    for (const auto& i : s.plans) plans.push_back(Json::array({i.firm, plan_json(i.plan), i.fired}));
    Json production = Json::array();
    for (const auto& i : s.production) {
        production.push_back(Json::array({i.firm, i.result.output, i.result.materials_used}));
    }
    Json prices = Json::array();
    for (const auto& i : s.prices) prices.push_back(Json::array({i.firm, i.price}));
    Json health = Json::array();
    for (const auto& i : s.health) health.push_back(Json::array({i.person, i.food_stock, i.health, i.alive}));
    j = Json{{"phase", static_cast<int>(s.phase)},
             {"legislation", s.legislation},
             {"persons", persons},
             {"plans", plans},
             {"production", production},
             {"prices", prices},
             {"infections", s.infections},
             {"patients", s.patients},
             {"health", health}};
}

void from_json(const Json& j, IntentSet& s) {
    s = IntentSet{};
    s.phase = static_cast<Phase>(j.at("phase").get<int>());
    s.legislation = j.at("legislation").get<std::vector<Legislation>>();
    for (const auto& i : j.at("persons")) {
        PersonIntent p{i.at(0), std::nullopt, i.at(1)};
        if (!i.at(2).is_null()) p.found = FoundingChoice{kSectors.at(i.at(2).at(0).get<std::size_t>()), i.at(2).at(1)};
        s.persons.push_back(std::move(p));
    }
    for (const auto& i : j.at("plans")) {
        s.plans.push_back(FirmPlanIntent{i.at(0), plan_from(i.at(1)), i.at(2).get<std::vector<PersonId>>()});
    }
    for (const auto& i : j.at("production")) {
        s.production.push_back(ProductionIntent{i.at(0), ProductionResult{i.at(1), i.at(2)}});
    }
    for (const auto& i : j.at("prices")) s.prices.push_back(PriceIntent{i.at(0), i.at(1).get<Money>()});
    s.infections = j.at("infections").get<std::vector<PersonId>>();
    s.patients = j.at("patients").get<std::vector<PersonId>>();
    for (const auto& i : j.at("health")) s.health.push_back(HealthIntent{i.at(0), i.at(1), i.at(2), i.at(3)});
}

void to_json(Json& j, const Params& p) {
    j = Json::object();
    for (const auto& f : param_fields()) j[std::string(f.name)] = p.*(f.field);
}

void from_json(const Json& j, Params& p) {
    p = Params{};
    for (const auto& [key, value] : j.items()) set_param(p, key, value.get<double>());
}

Json world_to_json(const WorldState& w, const WorldJsonOptions& options) {
    Json buildings = Json::array();
    for (const auto& b : w.buildings) buildings.push_back(Json::array({b.id, b.slots, b.rent}));
    const auto& s = w.stats;
    Json j{{"seed", w.seed},
           {"step", w.step},
           {"scenario", w.scenario},
           {"params", w.params},
           {"persons", w.persons},
           {"firms", w.firms},
           {"buildings", buildings},
           {"government", w.government},
           {"stats", Json{{"mean_wage", s.mean_wage}, {"mean_price", s.mean_price}, {"mean_profit", s.mean_profit}}},
           {"bankruptcies", w.bankruptcies},
           {"money_supply", w.money_supply},
           {"scratch", scratch_json(w.scratch)}};
    if (options.graph) {
        Json edges = Json::array();
        for (const auto& [a, b] : w.graph.edges()) edges.push_back(Json::array({a, b}));
        j["graph"] = Json{{"n", w.graph.size()}, {"edges", edges}};
    }
    if (options.metrics) j["metrics"] = w.metrics;
    return j;
}

WorldState world_from_json(const Json& j) {
    WorldState w;
    w.seed = j.at("seed");
    w.step = j.at("step");
    w.scenario = j.at("scenario");
    w.params = j.at("params").get<Params>();
    w.persons = j.at("persons").get<std::vector<Person>>();
    w.firms = j.at("firms").get<std::vector<Firm>>();
    for (const auto& b : j.at("buildings")) w.buildings.push_back(Building{b.at(0), b.at(1), b.at(2).get<Money>()});
    w.government = j.at("government").get<Government>();
    const auto& s = j.at("stats");
    w.stats.mean_wage = s.at("mean_wage").get<Money>();
    w.stats.mean_price = s.at("mean_price").get<std::array<Money, 4>>();
    w.stats.mean_profit = s.at("mean_profit").get<std::array<double, 4>>();
    w.bankruptcies = j.at("bankruptcies");
    w.money_supply = j.at("money_supply").get<Money>();
    w.scratch = scratch_from(j.at("scratch"));
    if (j.contains("graph")) {
        std::vector<std::pair<PersonId, PersonId>> edges;
        for (const auto& e : j["graph"].at("edges")) edges.emplace_back(e.at(0), e.at(1));
        w.graph = SocialGraph::from_edges(j["graph"].at("n").get<std::size_t>(), edges);
    }
    if (j.contains("metrics")) w.metrics = j["metrics"].get<std::vector<MetricsRow>>();
    return w;
}

std::vector<std::uint8_t> encode_world(const WorldState& w) { return Json::to_msgpack(world_to_json(w)); }

WorldState decode_world(std::span<const std::uint8_t> bytes) {
    return world_from_json(Json::from_msgpack(bytes.begin(), bytes.end()));
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t world_digest(const WorldState& w) {
    return fnv1a64(Json::to_msgpack(world_to_json(w, WorldJsonOptions{false, false})));
}

} // namespace citysim

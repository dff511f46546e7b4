#include "citysim/params.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "citysim/errors.hpp"

namespace citysim {

namespace {

#define F(name, named) ParamField{#name, &Params::name, named}

constexpr std::array kFields = {
    F(consumer_good_utility, true),
    F(n_buildings, true),
    F(labor_cost_per_good, true),
    F(base_min_consumption, true),
    F(labor_per_equipment, true),
    F(labor_per_worker, true),
    F(transmission_rate, true),
    F(wage_under_market_multiplier, true),
    F(residence_size_limit, true),
    F(tax_rate_increment, true),
    F(profit_increment, true),
    F(recovery_prob, true),
    F(supply_increment, true),
    F(min_business_capital, true),
    F(welfare_increment, true),
    F(welfare, true),
    F(max_tenants, true),
    F(contact_rate, true),
    F(starting_welfare_req, true),
    F(extravagant_wage_range, true),
    F(tax_rate, true),
    F(starting_wage, true),
    F(patient_zero_prob, true),
    F(rent, true),
    F(wage_increment, true),
    F(material_cost_per_good, true),
    F(sickness_severity, true),

    F(hunger_penalty, false),
    F(recovery_gain, false),
    F(price_to_utils, false),
    F(patients_per_worker, false),
    F(bankruptcy_grace, false),
    F(nationalize_compensation, false),
    F(voting_window, false),
    F(max_tax_rate, false),
    F(max_welfare_payment, false),
    F(firms_per_building, false),
    F(initial_firms_per_sector, false),
    F(initial_staff, false),
    F(initial_cash_multiple, false),
    F(initial_supply, false),
    F(initial_profit_margin, false),
    F(government_initial_cash, false),
    F(owner_dividend_share, false),
    F(equipment_amortization_steps, false),
    F(referral_multiplier, false),
    F(founding_profit_floor, false),
    F(min_price, false),
    F(firm_reward_scale, false),
    F(price_consumer_good, false),
    F(price_raw_material, false),
    F(price_capital_equipment, false),
    F(price_hospital, false),
    F(rent_spread, false),
    F(bin_sold_low, false),
    F(bin_sold_high, false),
    F(bin_leftover_low, false),
    F(bin_leftover_high, false),
    F(bin_profit_low, false),
    F(bin_profit_high, false),
    F(q_alpha, false),
    F(q_gamma, false),
    F(q_epsilon, false),
    F(q_epsilon_decay, false),
    F(q_epsilon_floor, false),
    F(q_hold_prior, false),
};

#undef F

constexpr std::size_t count_named() {
    std::size_t n = 0;
    for (const auto& f : kFields) n += f.named_model_parameter ? 1 : 0;
    return n;
}

constexpr auto kNamed = [] {
    std::array<std::string_view, count_named()> names{};
    std::size_t i = 0;
    for (const auto& f : kFields) {
        if (f.named_model_parameter) names[i++] = f.name;
    }
    return names;
}();

const ParamField* find_field(std::string_view name) {
    for (const auto& f : kFields) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

void require(bool ok, std::string_view name, const std::string& why) {
    if (!ok) throw ConfigError("parameter " + std::string(name) + " " + why);
}

bool is_probability(double v) { return v >= 0.0 && v <= 1.0; }

} // namespace

SignalBins Params::firm_bins() const {
    return {{bin_sold_low, bin_sold_high},
            {bin_leftover_low, bin_leftover_high},
            {bin_profit_low, bin_profit_high}};
}

std::span<const ParamField> param_fields() { return kFields; }

std::span<const std::string_view> model_parameter_names() { return kNamed; }

void set_param(Params& p, std::string_view name, double value) {
    const ParamField* f = find_field(name);
    if (f == nullptr) throw ConfigError("unknown parameter: " + std::string(name));
    p.*(f->field) = value;
}

double get_param(const Params& p, std::string_view name) {
    const ParamField* f = find_field(name);
    if (f == nullptr) throw ConfigError("unknown parameter: " + std::string(name));
    return p.*(f->field);
}

std::map<std::string, double> to_map(const Params& p) {
    std::map<std::string, double> out;
    for (const auto& f : kFields) out.emplace(std::string(f.name), p.*(f.field));
    return out;
}

void validate(const Params& p) {
    for (const auto& f : kFields) require(std::isfinite(p.*(f.field)), f.name, "must be finite");
    for (auto prob : {&Params::transmission_rate, &Params::contact_rate, &Params::recovery_prob,
                      &Params::patient_zero_prob, &Params::tax_rate, &Params::max_tax_rate,
                      &Params::owner_dividend_share, &Params::nationalize_compensation,
                      &Params::q_epsilon, &Params::q_epsilon_floor}) {
        for (const auto& f : kFields) {
            if (f.field == prob) require(is_probability(p.*prob), f.name, "must lie in [0,1]");
        }
    }
    require(p.labor_cost_per_good > 0, "labor_cost_per_good", "must be > 0");
    require(p.material_cost_per_good > 0, "material_cost_per_good", "must be > 0");
    require(p.labor_per_worker > 0, "labor_per_worker", "must be > 0");
    require(p.labor_per_equipment >= 0, "labor_per_equipment", "must be >= 0");
    require(p.base_min_consumption >= 0, "base_min_consumption", "must be >= 0");
    require(p.consumer_good_utility >= 0, "consumer_good_utility", "must be >= 0");
    require(p.sickness_severity >= 0, "sickness_severity", "must be >= 0");
    require(p.n_buildings >= 0, "n_buildings", "must be >= 0");
    require(p.tax_rate <= p.max_tax_rate, "tax_rate", "must not exceed max_tax_rate");
    require(p.welfare >= 0, "welfare", "must be >= 0");
    require(p.referral_multiplier >= 1, "referral_multiplier", "must be >= 1");
    require(p.patients_per_worker >= 0, "patients_per_worker", "must be >= 0");
    require(p.bankruptcy_grace >= 1, "bankruptcy_grace", "must be >= 1");
    require(p.voting_window >= 1, "voting_window", "must be >= 1");
    require(p.min_price > 0, "min_price", "must be > 0");
    require(p.q_alpha > 0 && p.q_alpha <= 1, "q_alpha", "must lie in (0,1]");
    require(p.q_gamma >= 0 && p.q_gamma < 1, "q_gamma", "must lie in [0,1)");
    require(p.firm_reward_scale > 0, "firm_reward_scale", "must be > 0");
    require(p.equipment_amortization_steps >= 1, "equipment_amortization_steps", "must be >= 1");
}

std::string_view level_name(Level l) {
    switch (l) {
    case Level::High: return "high";
    case Level::Regular: return "regular";
    case Level::Low: return "low";
    }
    return "regular";
}

Level parse_level(std::string_view s) {
    if (s == "high") return Level::High;
    if (s == "regular") return Level::Regular;
    if (s == "low") return Level::Low;
    throw ConfigError("invalid axis level: " + std::string(s));
}

Params ScenarioConfig::effective_params() const {
    Params p = params;
    const AxisEffects& e = effects;
    switch (food_level) {
    case Level::High:
        p.consumer_good_utility *= e.food_utility_high;
        p.base_min_consumption *= e.food_min_high;
        break;
    case Level::Low:
        p.consumer_good_utility *= e.food_utility_low;
        p.base_min_consumption *= e.food_min_low;
        break;
    case Level::Regular: break;
    }
    switch (tech_level) {
    case Level::High: p.labor_per_equipment *= e.tech_equipment_high; break;
    case Level::Low: p.labor_per_equipment *= e.tech_equipment_low; break;
    case Level::Regular: break;
    }
    switch (disease_level) {
    case Level::High:
        p.patient_zero_prob = std::min(1.0, p.patient_zero_prob * e.disease_patient_zero_high);
        p.transmission_rate = std::min(1.0, p.transmission_rate * e.disease_transmission_high);
        p.sickness_severity *= e.disease_severity_high;
        break;
    case Level::Low:
        p.patient_zero_prob = 0.0;
        p.transmission_rate = 0.0;
        p.sickness_severity = 0.0;
        break;
    case Level::Regular: break;
    }
    return p;
}

ScenarioConfig parse_scenario(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
    ScenarioConfig sc;
    for (const auto& [key, value] : doc.items()) {
        if (key == "name") {
            if (!value.is_string()) throw ConfigError("name must be a string");
            sc.name = value.get<std::string>();
        } else if (key == "food_level" || key == "tech_level" || key == "disease_level") {
            if (!value.is_string()) throw ConfigError(key + " must be a string");
            const Level l = parse_level(value.get<std::string>());
            if (key == "food_level") sc.food_level = l;
            if (key == "tech_level") sc.tech_level = l;
            if (key == "disease_level") sc.disease_level = l;
        } else {
            if (!value.is_number()) throw ConfigError("parameter " + key + " must be a number");
            set_param(sc.params, key, value.get<double>());
        }
    }
    validate(sc.params);
    validate(sc.effective_params());
    return sc;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& sc) {
    nlohmann::ordered_json doc;
    doc["name"] = sc.name;
    doc["food_level"] = level_name(sc.food_level);
    doc["tech_level"] = level_name(sc.tech_level);
    doc["disease_level"] = level_name(sc.disease_level);
    for (const auto& f : kFields) doc[std::string(f.name)] = sc.params.*(f.field);
    return doc.dump(2);
}

std::vector<ScenarioConfig> all_scenarios(const Params& base) {
    std::vector<ScenarioConfig> out;
    constexpr std::array levels = {Level::High, Level::Regular, Level::Low};
    for (Level food : levels) {
        for (Level tech : levels) {
            for (Level disease : levels) {
                ScenarioConfig sc;
                sc.food_level = food;
                sc.tech_level = tech;
                sc.disease_level = disease;
                sc.params = base;
                sc.name = std::string(level_name(food)) + "-" + std::string(level_name(tech)) +
                          "-" + std::string(level_name(disease));
                out.push_back(std::move(sc));
            }
        }
    }
    return out;
}

} // namespace citysim

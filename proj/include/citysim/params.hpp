#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citysim/learning.hpp"
#include "citysim/money.hpp"

namespace citysim {

/// Every tunable of the model. The first block carries the model's named parameter list;
/// the second block holds constants the behaviour needs that the named list leaves open.
/// Currency-valued entries are in currency units and rounded to cents where used.
struct Params {
    // Named model parameters.
    double consumer_good_utility = 10.0;
    double n_buildings = 20;
    double labor_cost_per_good = 4.0;
    double base_min_consumption = 1.0;
    double labor_per_equipment = 10.0;
    double labor_per_worker = 20.0;
    double transmission_rate = 0.1;
    double wage_under_market_multiplier = 0.8;
    double residence_size_limit = 5;  // carried, not used by any behaviour
    double tax_rate_increment = 0.01;
    double profit_increment = 0.05;
    double recovery_prob = 0.6;
    double supply_increment = 5;
    double min_business_capital = 400.0;
    double welfare_increment = 5.0;
    double welfare = 10.0;
    double max_tenants = 10;  // carried, not used by any behaviour
    double contact_rate = 0.5;
    double starting_welfare_req = 15.0;
    double extravagant_wage_range = 2.0;
    double tax_rate = 0.1;
    double starting_wage = 20.0;
    double patient_zero_prob = 0.002;
    double rent = 40.0;
    double wage_increment = 0.05;
    double material_cost_per_good = 1.0;
    double sickness_severity = 0.1;

    // Behavioural constants.
    double hunger_penalty = 0.1;
    double recovery_gain = 0.5;
    double price_to_utils = 1.0;
    double patients_per_worker = 10;
    double bankruptcy_grace = 2;
    double nationalize_compensation = 0.5;
    double voting_window = 3;
    double max_tax_rate = 0.6;
    double max_welfare_payment = 200.0;
    double firms_per_building = 4;
    double initial_firms_per_sector = 2;
    double initial_staff = 5;
    double initial_cash_multiple = 5;
    double initial_supply = 20;
    double initial_profit_margin = 0.2;
    double government_initial_cash = 10000.0;
    double owner_dividend_share = 0.5;
    double equipment_amortization_steps = 24;
    double referral_multiplier = 2.0;
    double founding_profit_floor = 1.0;
    double min_price = 0.01;
    double firm_reward_scale = 100.0;
    double price_consumer_good = 2.0;
    double price_raw_material = 1.0;
    double price_capital_equipment = 40.0;
    double price_hospital = 20.0;
    double rent_spread = 0.25;
    double bin_sold_low = 1.0;
    double bin_sold_high = 20.0;
    double bin_leftover_low = 1.0;
    double bin_leftover_high = 20.0;
    double bin_profit_low = 0.01;
    double bin_profit_high = 50.0;

    // Learning.
    double q_alpha = 0.1;
    double q_gamma = 0.9;
    double q_epsilon = 0.1;
    double q_epsilon_decay = 0.999;
    double q_epsilon_floor = 0.01;
    double q_hold_prior = 0.01;  ///< initial value of the hold action in every state

    Money money(double Params::*field) const { return Money::from_units(this->*field); }
    LearningParams learning() const {
        return {q_alpha, q_gamma, q_epsilon, q_epsilon_decay, q_epsilon_floor};
    }
    SignalBins firm_bins() const;

    friend bool operator==(const Params&, const Params&) = default;
};

struct ParamField {
    std::string_view name;
    double Params::*field;
    bool named_model_parameter;
};

/// All fields, named model parameters first.
std::span<const ParamField> param_fields();
/// The model's named parameter keys.
std::span<const std::string_view> model_parameter_names();

/// Throws ConfigError for unknown keys.
void set_param(Params& p, std::string_view name, double value);
double get_param(const Params& p, std::string_view name);
std::map<std::string, double> to_map(const Params& p);

/// Throws ConfigError when a value is out of its valid range.
void validate(const Params& p);

enum class Level : std::uint8_t { High = 0, Regular = 1, Low = 2 };

std::string_view level_name(Level l);
/// Throws ConfigError.
Level parse_level(std::string_view s);

/// Scenario axis translations; the multipliers are configurable defaults.
struct AxisEffects {
    double food_utility_high = 2.0;
    double food_utility_low = 0.5;
    double food_min_high = 0.75;
    double food_min_low = 1.5;
    double tech_equipment_high = 5.0;
    double tech_equipment_low = 0.0;
    double disease_patient_zero_high = 5.0;
    double disease_transmission_high = 3.0;
    double disease_severity_high = 3.0;
};

struct ScenarioConfig {
    std::string name = "regular";
    Level food_level = Level::Regular;
    Level tech_level = Level::Regular;
    Level disease_level = Level::Regular;
    Params params;  ///< base values before axis translation
    AxisEffects effects;

    /// Parameters after applying the three axis levels.
    Params effective_params() const;
};

/// Parses the scenario document: `food_level`, `tech_level`, `disease_level`, optional
/// `name`, and any parameter keys as overrides. Throws ConfigError.
ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario_file(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& sc);

/// The 27 combinations, food-major, in High/Regular/Low order, named "food-tech-disease".
std::vector<ScenarioConfig> all_scenarios(const Params& base = {});

} // namespace citysim

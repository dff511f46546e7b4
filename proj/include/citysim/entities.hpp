#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "citysim/learning.hpp"
#include "citysim/money.hpp"

namespace citysim {

using PersonId = std::uint32_t;
using FirmId = std::uint32_t;
using BuildingId = std::uint32_t;

enum class Sector : std::uint8_t { Hospital = 0, CapitalEquipment = 1, ConsumerGood = 2, RawMaterial = 3 };

inline constexpr std::array<Sector, 4> kSectors = {Sector::Hospital, Sector::CapitalEquipment,
                                                   Sector::ConsumerGood, Sector::RawMaterial};

std::string_view sector_name(Sector s);
/// Throws UnknownSector.
Sector parse_sector(std::string_view name);
constexpr std::size_t index_of(Sector s) { return static_cast<std::size_t>(s); }

/// Sampled categorical demographics. Ranks are positions in the ordered node domains.
struct Demographics {
    std::string race;
    std::string sex;
    std::string age;
    std::string education;
    std::string neighborhood;
    std::string income;
    int age_rank = 0;
    int education_rank = 0;
    int income_rank = 0;

    friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct Person {
    PersonId id = 0;
    Demographics demographics;
    std::string name;
    Money cash;
    Money wage;  ///< per step; zero when unemployed
    std::optional<FirmId> employer;
    std::optional<FirmId> owned_business;
    double food_stock = 0.0;
    double health = 1.0;
    bool sick = false;
    double frugality = 0.0;
    bool alive = true;
    Money step_income;  ///< wages received during the current step

    bool is_owner() const { return owned_business.has_value(); }
    bool is_employed() const { return employer.has_value(); }

    friend bool operator==(const Person&, const Person&) = default;
};

struct Employee {
    PersonId person = 0;
    Money wage;
    friend bool operator==(const Employee&, const Employee&) = default;
};

/// Money flows of one firm during the current step.
struct FirmBooks {
    Money revenue;
    Money wages;
    Money materials;
    Money equipment;
    Money rent;
    Money taxes;
    Money subsidies;
    Money dividends;
    Money bailout;

    /// Operating profit before tax, subsidies and distributions.
    Money operating_profit() const { return revenue - wages - materials - equipment - rent; }

    friend bool operator==(const FirmBooks&, const FirmBooks&) = default;
};

struct Firm {
    FirmId id = 0;
    Sector sector = Sector::ConsumerGood;
    std::optional<PersonId> owner;  ///< nullopt: government-owned
    BuildingId building = 0;
    Money cash;
    std::int64_t supply = 0;
    std::int64_t materials = 0;
    std::int64_t equipment = 0;
    std::vector<Employee> employees;  ///< sorted by person id
    Money price;
    double profit_margin = 0.0;
    std::int64_t supply_target = 0;
    QTable q;

    std::int64_t last_sold = 0;
    std::int64_t last_produced = 0;
    Money last_profit;
    Money prev_profit;
    StateKey last_state{};
    std::optional<ActionId> last_action;
    int negative_cash_steps = 0;
    bool bankrupt = false;

    /// Materials purchased but not yet consumed, valued at purchase cost.
    Money materials_basis;
    FirmBooks books;

    bool government_owned() const { return !owner.has_value(); }
    bool is_producer() const { return sector != Sector::Hospital; }
    bool uses_materials() const {
        return sector == Sector::ConsumerGood || sector == Sector::CapitalEquipment;
    }
    std::int64_t workers() const { return static_cast<std::int64_t>(employees.size()); }
    Money wage_bill() const;

    friend bool operator==(const Firm&, const Firm&) = default;
};

struct Government {
    Money cash;
    double tax_rate = 0.0;
    Money welfare_payment;
    Money welfare_threshold;
    std::array<Money, 4> subsidies{};  ///< per firm per step, indexed by sector
    std::set<FirmId> owned_firms;
    QTable q;
    double last_mean_qol = 0.0;
    StateKey last_state{};
    std::optional<ActionId> last_action;

    friend bool operator==(const Government&, const Government&) = default;
};

struct Building {
    BuildingId id = 0;
    int slots = 0;
    Money rent;
    friend bool operator==(const Building&, const Building&) = default;
};

} // namespace citysim

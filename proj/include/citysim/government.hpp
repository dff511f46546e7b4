#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citysim/entities.hpp"
#include "citysim/learning.hpp"
#include "citysim/params.hpp"
#include "citysim/rng.hpp"

namespace citysim {

enum class LegislationKind : std::uint8_t {
    Nationalize,
    Privatize,
    SetWelfarePayment,
    SetWelfareThreshold,
    SetTaxRate,
    SetSubsidy,
};

std::string_view legislation_kind_name(LegislationKind k);
/// Throws MalformedLegislation.
LegislationKind parse_legislation_kind(std::string_view s);

struct Legislation {
    LegislationKind kind = LegislationKind::SetTaxRate;
    std::optional<Sector> sector;  ///< Nationalize, Privatize, SetSubsidy
    double delta = 0.0;            ///< rate for SetTaxRate, currency units otherwise
    PersonId proposer = 0;
    std::uint32_t deadline = 0;

    friend bool operator==(const Legislation&, const Legislation&) = default;
};

/// Increment a delta of this kind must be a whole multiple of (0 for ownership kinds).
double legislation_increment(LegislationKind k, const Params& p);

/// Checks sector presence and quantization. Throws MalformedLegislation.
void validate_legislation(const Legislation& l, const Params& p);

/// Each person pays tax_rate of this step's wage income; each firm pays tax_rate of its
/// positive operating profit. Returns the total collected.
Money collect_taxes(Government& g, std::span<Person> persons, std::span<Firm> firms);

/// Every alive person whose step income is below the threshold receives the payment.
/// Returns the number of recipients.
std::size_t distribute_welfare(Government& g, std::span<Person> persons);

/// Per-step subsidy of each active firm's sector. Returns the total paid.
Money pay_subsidies(Government& g, std::span<Firm> firms);

struct GovernmentSignals {
    double qol_delta = 0.0;
    double unemployment = 0.0;
    double cash = 0.0;  ///< currency units
};

struct GovernmentBins {
    BinThresholds qol_delta{0.01, 1.0};
    BinThresholds unemployment{0.05, 0.2};
    BinThresholds cash{0.01, 10000.0};
};

StateKey government_state(const GovernmentSignals& s, const GovernmentBins& bins = {});

struct PolicyLimits {
    double tax_rate_increment = 0.01;
    double max_tax_rate = 0.6;
    Money welfare_increment = Money::from_units(5);
    Money max_welfare_payment = Money::from_units(200);
};

PolicyLimits policy_limits(const Params& p);

/// Learns from reward = mean_qol - last_mean_qol on the previous (state, action), then picks
/// and applies a new joint (tax, welfare) action, clamped to the limits.
void govern_step(Government& g, double mean_qol, const GovernmentSignals& signals, const PolicyLimits& limits,
                 RandomStream& rng, const GovernmentBins& bins = {});

/// Applies passed legislation. Ownership changes move cash double-entry: nationalization
/// compensates former owners with compensation_fraction·max(firm cash, 0); privatization
/// sells each government firm (id order) at the same valuation to the richest alive person
/// (ties to lowest id) who owns no business and can pay. Throws UnknownSector.
void apply_legislation(Government& g, std::span<Person> persons, std::span<Firm> firms, const Legislation& l,
                       const Params& p);

} // namespace citysim

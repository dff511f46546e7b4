#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "citysim/entities.hpp"
#include "citysim/rng.hpp"
#include "citysim/socialgraph.hpp"

namespace citysim {

struct Offer {
    FirmId seller = 0;
    Money price;
    std::int64_t available = 0;
};

/// Index of the offer chosen with probability proportional to 1/price among offers with
/// stock and, when `budget` is given, a price within it. Throws MarketEmpty.
std::size_t pick_offer(std::span<const Offer> offers, RandomStream& rng, std::optional<Money> budget = std::nullopt);

/// Seller drawn with probability proportional to 1/price. Throws MarketEmpty.
FirmId pick_supplier(std::span<const Offer> offers, RandomStream& rng);

struct Demand {
    std::uint32_t buyer = 0;
    std::int64_t units = 0;
    Money budget;
};

struct Transaction {
    std::uint32_t buyer = 0;
    FirmId seller = 0;
    std::int64_t units = 0;
    Money price;

    Money total() const { return price * units; }
    friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct ClearingResult {
    std::vector<Transaction> transactions;
    std::vector<std::int64_t> unmet;  ///< aligned with the buyer list
};

/// Serial fold over buyers in the given (canonical, id-ascending) order. Each buyer
/// repeatedly picks an affordable seller with stock and buys as much as demand, stock and
/// budget allow. Buyer b draws from `market` with entity = b, so no buyer's draws depend
/// on another's. `offers` availability is decremented in place.
ClearingResult clear_goods_market(std::span<const Demand> buyers, std::vector<Offer>& offers,
                                  const StreamAddress& market);

struct JobOpening {
    FirmId firm = 0;
    std::int64_t positions = 0;
    Money wage;
    std::vector<PersonId> employees;  ///< current roster, sorted; used for referrals
};

struct Applicant {
    PersonId person = 0;
    Money reservation;  ///< minimum acceptable wage
    std::optional<FirmId> employer;
};

struct Hire {
    PersonId person = 0;
    FirmId firm = 0;
    Money wage;
    friend bool operator==(const Hire&, const Hire&) = default;
};

/// Openings in the given (firm-id) order; every position is filled by a draw over the
/// applicants still in the pool whose reservation the wage meets, weighted by
/// referral_weight. Firm f draws from `market` with entity = f.
std::vector<Hire> clear_labor_market(std::span<const Applicant> applicants, std::span<const JobOpening> openings,
                                     const SocialGraph& graph, double referral_multiplier,
                                     const StreamAddress& market);

/// One line of the optional transaction log: `step,market,buyer,seller,units,price`.
struct TransactionRecord {
    std::uint32_t step = 0;
    std::string_view market;
    Transaction tx;
};

} // namespace citysim

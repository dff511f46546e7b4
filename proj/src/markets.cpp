#include "citysim/markets.hpp"

#include <algorithm>

#include "citysim/errors.hpp"

namespace citysim {

std::size_t pick_offer(std::span<const Offer> offers, RandomStream& rng, std::optional<Money> budget) {
    std::vector<double> weights(offers.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < offers.size(); ++i) {
        const Offer& o = offers[i];
        if (o.available <= 0 || o.price <= Money{}) continue;
        if (budget && o.price > *budget) continue;
        weights[i] = 1.0 / o.price.units();
        any = true;
    }
    if (!any) throw MarketEmpty("no seller with stock");
    return rng.weighted_index(weights);
}

FirmId pick_supplier(std::span<const Offer> offers, RandomStream& rng) {
    return offers[pick_offer(offers, rng)].seller;
}

ClearingResult clear_goods_market(std::span<const Demand> buyers, std::vector<Offer>& offers,
                                  const StreamAddress& market) {
    ClearingResult result;
    result.unmet.reserve(buyers.size());
    for (const Demand& d : buyers) {
        StreamAddress address = market;
        address.entity = d.buyer;
        RandomStream rng(address);
        std::int64_t remaining = d.units;
        Money budget = d.budget;
        while (remaining > 0) {
            std::size_t i;
            try {
                i = pick_offer(offers, rng, budget);
            } catch (const MarketEmpty&) {
                break;
            }
            Offer& o = offers[i];
            const std::int64_t units = std::min({remaining, o.available, affordable_units(budget, o.price)});
            o.available -= units;
            remaining -= units;
            budget -= o.price * units;
            result.transactions.push_back(Transaction{d.buyer, o.seller, units, o.price});
        }
        result.unmet.push_back(remaining);
    }
    return result;
}

std::vector<Hire> clear_labor_market(std::span<const Applicant> applicants, std::span<const JobOpening> openings,
                                     const SocialGraph& graph, double referral_multiplier,
                                     const StreamAddress& market) {
    std::vector<Hire> hires;
    std::vector<bool> taken(applicants.size(), false);
    for (const JobOpening& opening : openings) {
        StreamAddress address = market;
        address.entity = opening.firm;
        RandomStream rng(address);
        for (std::int64_t position = 0; position < opening.positions; ++position) {
            std::vector<std::size_t> pool;
            std::vector<double> weights;
            for (std::size_t i = 0; i < applicants.size(); ++i) {
                const Applicant& a = applicants[i];
                if (taken[i] || opening.wage < a.reservation || a.employer == opening.firm) continue;
                pool.push_back(i);
                weights.push_back(referral_weight(a.person, opening.employees, graph, referral_multiplier));
            }
            if (pool.empty()) break;
            const std::size_t chosen = pool[rng.weighted_index(weights)];
            taken[chosen] = true;
            hires.push_back(Hire{applicants[chosen].person, opening.firm, opening.wage});
        }
    }
    return hires;
}

} // namespace citysim

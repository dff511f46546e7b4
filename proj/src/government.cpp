#include "citysim/government.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "citysim/errors.hpp"
#include "citysim/firms.hpp"

namespace citysim {

namespace {

constexpr std::array kKindNames = {"nationalize", "privatize", "set_welfare_payment", "set_welfare_threshold",
                                   "set_tax_rate", "set_subsidy"};

bool needs_sector(LegislationKind k) {
    return k == LegislationKind::Nationalize || k == LegislationKind::Privatize || k == LegislationKind::SetSubsidy;
}

Money firm_valuation(const Firm& f, double fraction) { return max(Money{}, f.cash).scaled(fraction); }

} // namespace

std::string_view legislation_kind_name(LegislationKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

LegislationKind parse_legislation_kind(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (s == kKindNames[i]) return static_cast<LegislationKind>(i);
    }
    throw MalformedLegislation("unknown legislation kind: " + std::string(s));
}

double legislation_increment(LegislationKind k, const Params& p) {
    switch (k) {
    case LegislationKind::SetTaxRate: return p.tax_rate_increment;
    case LegislationKind::SetWelfarePayment:
    case LegislationKind::SetWelfareThreshold:
    case LegislationKind::SetSubsidy: return p.welfare_increment;
    case LegislationKind::Nationalize:
    case LegislationKind::Privatize: break;
    }
    return 0.0;
}

void validate_legislation(const Legislation& l, const Params& p) {
    if (needs_sector(l.kind) && !l.sector) {
        throw MalformedLegislation(std::string(legislation_kind_name(l.kind)) + " needs a sector");
    }
    if (!needs_sector(l.kind) && l.sector) {
        throw MalformedLegislation(std::string(legislation_kind_name(l.kind)) + " takes no sector");
    }
    const double inc = legislation_increment(l.kind, p);
    if (inc == 0.0) {
        if (l.delta != 0.0) throw MalformedLegislation("ownership legislation takes no delta");
        return;
    }
    if (!std::isfinite(l.delta)) throw MalformedLegislation("delta must be finite");
    const double steps = l.delta / inc;
    if (std::abs(steps - std::round(steps)) > 1e-6 || std::round(steps) == 0.0) {
        throw MalformedLegislation("delta must be a non-zero whole multiple of " + std::to_string(inc));
    }
}

Money collect_taxes(Government& g, std::span<Person> persons, std::span<Firm> firms) {
    Money total;
    for (Person& p : persons) {
        if (p.step_income <= Money{}) continue;
        const Money tax = min(p.step_income.scaled(g.tax_rate), max(Money{}, p.cash));
        transfer(p.cash, g.cash, tax);
        total += tax;
    }
    for (Firm& f : firms) {
        if (f.bankrupt) continue;
        const Money profit = f.books.operating_profit();
        if (profit <= Money{}) continue;
        const Money tax = profit.scaled(g.tax_rate);
        transfer(f.cash, g.cash, tax);
        f.books.taxes += tax;
        total += tax;
    }
    return total;
}

std::size_t distribute_welfare(Government& g, std::span<Person> persons) {
    if (g.welfare_payment <= Money{}) return 0;
    std::size_t recipients = 0;
    for (Person& p : persons) {
        if (!p.alive || p.step_income >= g.welfare_threshold) continue;
        transfer(g.cash, p.cash, g.welfare_payment);
        ++recipients;
    }
    return recipients;
}

Money pay_subsidies(Government& g, std::span<Firm> firms) {
    Money total;
    for (Firm& f : firms) {
        if (f.bankrupt) continue;
        const Money s = g.subsidies[index_of(f.sector)];
        if (s <= Money{}) continue;
        transfer(g.cash, f.cash, s);
        f.books.subsidies += s;
        total += s;
    }
    return total;
}

StateKey government_state(const GovernmentSignals& s, const GovernmentBins& bins) {
    return {bin_signal(s.qol_delta, bins.qol_delta), bin_signal(s.unemployment, bins.unemployment),
            bin_signal(s.cash, bins.cash)};
}

PolicyLimits policy_limits(const Params& p) {
    return {p.tax_rate_increment, p.max_tax_rate, p.money(&Params::welfare_increment),
            p.money(&Params::max_welfare_payment)};
}

namespace {

void clamp_policy(Government& g, const PolicyLimits& limits) {
    g.tax_rate = std::clamp(g.tax_rate, 0.0, limits.max_tax_rate);
    g.welfare_payment = std::clamp(g.welfare_payment, Money{}, limits.max_welfare_payment);
}

} // namespace

void govern_step(Government& g, double mean_qol, const GovernmentSignals& signals, const PolicyLimits& limits,
                 RandomStream& rng, const GovernmentBins& bins) {
    const StateKey s = government_state(signals, bins);
    if (g.last_action) update(g.q, g.last_state, *g.last_action, mean_qol - g.last_mean_qol, s);
    const ActionId a = select_action(g.q, s, rng);
    const auto [tax_move, welfare_move] = decode_joint_action(a);
    g.tax_rate = apply_lever(g.tax_rate, tax_move, limits.tax_rate_increment);
    if (welfare_move == Lever::Increase) g.welfare_payment += limits.welfare_increment;
    if (welfare_move == Lever::Decrease) g.welfare_payment -= limits.welfare_increment;
    clamp_policy(g, limits);
    g.last_state = s;
    g.last_action = a;
    g.last_mean_qol = mean_qol;
    g.q.decay_epsilon();
}

void apply_legislation(Government& g, std::span<Person> persons, std::span<Firm> firms, const Legislation& l,
                       const Params& p) {
    if ((l.kind == LegislationKind::Nationalize || l.kind == LegislationKind::Privatize ||
         l.kind == LegislationKind::SetSubsidy) &&
        !l.sector) {
        throw UnknownSector("legislation needs a sector");
    }
    const PolicyLimits limits = policy_limits(p);
    switch (l.kind) {
    case LegislationKind::SetTaxRate:
        g.tax_rate += l.delta;
        clamp_policy(g, limits);
        break;
    case LegislationKind::SetWelfarePayment:
        g.welfare_payment += Money::from_units(l.delta);
        clamp_policy(g, limits);
        break;
    case LegislationKind::SetWelfareThreshold:
        g.welfare_threshold = max(Money{}, g.welfare_threshold + Money::from_units(l.delta));
        break;
    case LegislationKind::SetSubsidy: {
        Money& s = g.subsidies[index_of(*l.sector)];
        s = max(Money{}, s + Money::from_units(l.delta));
        break;
    }
    case LegislationKind::Nationalize:
        for (Firm& f : firms) {
            if (f.bankrupt || f.sector != *l.sector || f.government_owned()) continue;
            const PersonId owner = *f.owner;
            transfer(g.cash, persons[owner].cash, firm_valuation(f, p.nationalize_compensation));
            if (persons[owner].owned_business == f.id) persons[owner].owned_business.reset();
            f.owner.reset();
            g.owned_firms.insert(f.id);
        }
        break;
    case LegislationKind::Privatize:
        for (Firm& f : firms) {
            if (f.bankrupt || f.sector != *l.sector || !f.government_owned()) continue;
            const Money price = firm_valuation(f, p.nationalize_compensation);
            Person* buyer = nullptr;
            for (Person& candidate : persons) {
                if (!candidate.alive || candidate.is_owner() || candidate.cash < price) continue;
                if (buyer == nullptr || candidate.cash > buyer->cash) buyer = &candidate;
            }
            if (buyer == nullptr) continue;
            transfer(buyer->cash, g.cash, price);
            if (buyer->employer) {
                for (Firm& old : firms) {
                    if (old.id == *buyer->employer) {
                        release(old, *buyer);
                        break;
                    }
                }
            }
            buyer->owned_business = f.id;
            f.owner = buyer->id;
            g.owned_firms.erase(f.id);
        }
        break;
    }
}

} // namespace citysim

#include "citysim/epidemics.hpp"

#include <algorithm>

#include "citysim/errors.hpp"

namespace citysim {

namespace {

bool susceptible(const Person& p) { return p.alive && !p.sick; }

RandomStream stream_for(const StreamAddress& base, PersonId id, std::uint16_t tag) {
    StreamAddress a = base;
    a.entity = id;
    a.tag = tag;
    return RandomStream(a);
}

void require_sick(const Person& p) {
    if (!p.sick) throw NotSick("person " + std::to_string(p.id) + " is not sick");
}

} // namespace

bool seeded_infection(const Person& p, const ContagionParams& cp, const StreamAddress& base) {
    if (!susceptible(p) || cp.patient_zero_prob <= 0.0) return false;
    RandomStream rng = stream_for(base, p.id, 0);
    return rng.bernoulli(cp.patient_zero_prob);
}

bool caught_from_neighbors(const Person& p, std::span<const Person> persons, const SocialGraph& g,
                           const ContagionParams& cp, const StreamAddress& base) {
    const double per_contact = cp.contact_rate * cp.transmission_rate;
    if (!susceptible(p) || per_contact <= 0.0 || p.id >= g.size()) return false;
    RandomStream rng = stream_for(base, p.id, 1);
    for (PersonId n : g.neighbors(p.id)) {
        const Person& other = persons[n];
        if (other.alive && other.sick && rng.bernoulli(per_contact)) return true;
    }
    return false;
}

std::vector<PersonId> seed_infections(std::span<const Person> persons, const ContagionParams& cp,
                                      const StreamAddress& base) {
    std::vector<PersonId> cases;
    for (const Person& p : persons) {
        if (seeded_infection(p, cp, base)) cases.push_back(p.id);
    }
    return cases;
}

std::vector<PersonId> spread(std::span<const Person> persons, const SocialGraph& g, const ContagionParams& cp,
                             const StreamAddress& base) {
    std::vector<PersonId> cases;
    for (const Person& p : persons) {
        if (caught_from_neighbors(p, persons, g, cp, base)) cases.push_back(p.id);
    }
    return cases;
}

double treatment_gain(const Person& p, const ContagionParams& cp, const HealthUtility& hu) {
    return hu(std::min(p.health + cp.recovery_gain, 1.0)) - hu(p.health);
}

bool wants_treatment(const Person& p, Money price, const ContagionParams& cp, const HealthUtility& hu) {
    require_sick(p);
    if (p.cash < price) return false;
    return treatment_gain(p, cp, hu) >= p.frugality * price.units() * cp.price_to_utils;
}

std::vector<TreatmentOutcome> treat(Firm& hospital, std::span<const PersonId> patients, std::span<Person> persons,
                                    const ContagionParams& cp, const StreamAddress& base) {
    std::vector<TreatmentOutcome> outcomes;
    outcomes.reserve(patients.size());
    for (PersonId id : patients) {
        Person& p = persons[id];
        TreatmentOutcome out{id, false, false};
        if (hospital.supply > 0) {
            require_sick(p);
            transfer(p.cash, hospital.cash, hospital.price);
            hospital.books.revenue += hospital.price;
            --hospital.supply;
            out.treated = true;
            RandomStream rng = stream_for(base, id, 2);
            if (rng.bernoulli(cp.recovery_prob)) {
                p.sick = false;
                p.health = std::min(1.0, p.health + cp.recovery_gain);
                out.recovered = true;
            }
        }
        outcomes.push_back(out);
    }
    return outcomes;
}

} // namespace citysim

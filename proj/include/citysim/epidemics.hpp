#pragma once

#include <span>
#include <vector>

#include "citysim/agents.hpp"
#include "citysim/entities.hpp"
#include "citysim/rng.hpp"
#include "citysim/socialgraph.hpp"

namespace citysim {

struct ContagionParams {
    double patient_zero_prob = 0.002;
    double contact_rate = 0.5;
    double transmission_rate = 0.1;
    double recovery_prob = 0.6;
    double sickness_severity = 0.1;
    double recovery_gain = 0.5;
    double price_to_utils = 1.0;
};

/// Single-person forms of the two draws below, for partitioned evaluation.
bool seeded_infection(const Person& p, const ContagionParams& cp, const StreamAddress& base);
bool caught_from_neighbors(const Person& p, std::span<const Person> persons, const SocialGraph& g,
                           const ContagionParams& cp, const StreamAddress& base);

/// Each alive, healthy person falls sick with patient_zero_prob. Person i draws once from
/// `base` with entity = i, tag 0. Returns new cases, ascending.
std::vector<PersonId> seed_infections(std::span<const Person> persons, const ContagionParams& cp,
                                      const StreamAddress& base);

/// Every alive, healthy person draws one bernoulli(contact·transmission) per sick alive
/// neighbor (neighbor order, entity = person, tag 1) against the sick set as it stood at
/// the call. Returns new cases, ascending.
std::vector<PersonId> spread(std::span<const Person> persons, const SocialGraph& g, const ContagionParams& cp,
                             const StreamAddress& base);

/// health_utility(min(health + recovery_gain, 1)) - health_utility(health).
double treatment_gain(const Person& p, const ContagionParams& cp, const HealthUtility& hu);

/// cash >= price and treatment_gain >= frugality·price·price_to_utils. Throws NotSick.
bool wants_treatment(const Person& p, Money price, const ContagionParams& cp, const HealthUtility& hu);

struct TreatmentOutcome {
    PersonId patient = 0;
    bool treated = false;
    bool recovered = false;
    friend bool operator==(const TreatmentOutcome&, const TreatmentOutcome&) = default;
};

/// The first `hospital.supply` patients (already sorted by id) pay the hospital's price and
/// recover with recovery_prob: sickness cleared, health += recovery_gain capped at 1.
/// Patient i draws from `base` with entity = i. Untreated patients stay sick.
/// `persons` is indexed by id.
std::vector<TreatmentOutcome> treat(Firm& hospital, std::span<const PersonId> patients, std::span<Person> persons,
                                    const ContagionParams& cp, const StreamAddress& base);

} // namespace citysim

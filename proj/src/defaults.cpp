#include <cmath>

#include "citysim/engine.hpp"

namespace citysim {

namespace {

const std::vector<std::string> kRace = {"white", "black", "asian", "hispanic", "other"};
const std::vector<std::string> kSex = {"female", "male"};
const std::vector<std::string> kAge = {"18-29", "30-44", "45-64", "65+"};
const std::vector<std::string> kEducation = {"no_diploma", "high_school", "some_college", "bachelor", "graduate"};
const std::vector<std::string> kNeighborhood = {"bronx", "brooklyn", "manhattan", "queens", "staten_island"};
const std::vector<std::string> kIncome = {"0-25000", "25000-50000", "50000-100000", "100000-200000"};

std::vector<double> normalized(std::vector<double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    return w;
}

// Neighborhood leans toward a different borough per race.
std::vector<std::vector<double>> neighborhood_cpt() {
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < kRace.size(); ++r) {
        std::vector<double> w(kNeighborhood.size(), 1.0);
        w[r % kNeighborhood.size()] += 2.0;
        w[(r + 1) % kNeighborhood.size()] += 0.5;
        rows.push_back(normalized(w));
    }
    return rows;
}

// Income brackets shift upward with education and with age up to 45-64.
std::vector<std::vector<double>> income_cpt() {
    static const double kAgeShift[] = {-0.4, 0.2, 0.5, -0.2};
    static const double kRaceShift[] = {0.2, -0.2, 0.1, -0.2, 0.0};
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < kRace.size(); ++r) {
        for (std::size_t a = 0; a < kAge.size(); ++a) {
            for (std::size_t e = 0; e < kEducation.size(); ++e) {
                const double score = 0.45 * static_cast<double>(e) - 0.9 + kAgeShift[a] + kRaceShift[r];
                std::vector<double> w(kIncome.size());
                for (std::size_t k = 0; k < kIncome.size(); ++k) {
                    const double centered = static_cast<double>(k) - 1.5;
                    w[k] = std::exp(score * centered - 0.3 * centered * centered);
                }
                rows.push_back(normalized(w));
            }
        }
    }
    return rows;
}

std::vector<WeightedName> table(std::initializer_list<std::pair<const char*, double>> entries) {
    std::vector<WeightedName> out;
    for (const auto& [name, weight] : entries) out.push_back(WeightedName{name, weight});
    return out;
}

} // namespace

WorldInputs default_inputs() {
    std::vector<NodeSpec> nodes;
    nodes.push_back({"race", kRace, {}, {{0.43, 0.22, 0.14, 0.18, 0.03}}});
    nodes.push_back({"sex", kSex, {}, {{0.52, 0.48}}});
    nodes.push_back({"age", kAge, {}, {{0.22, 0.28, 0.32, 0.18}}});
    nodes.push_back({"education", kEducation, {}, {{0.13, 0.25, 0.22, 0.24, 0.16}}});
    nodes.push_back({"neighborhood", kNeighborhood, {"race"}, neighborhood_cpt()});
    nodes.push_back({"income", kIncome, {"race", "age", "education"}, income_cpt()});

    NameTables names;
    names.surnames = table({{"Smith", 828}, {"Johnson", 655}, {"Williams", 550}, {"Brown", 487}, {"Jones", 466},
                            {"Garcia", 429}, {"Miller", 424}, {"Davis", 397}, {"Rodriguez", 388}, {"Martinez", 383},
                            {"Lee", 233}, {"Nguyen", 210}, {"Chen", 180}, {"Wang", 160}, {"Kim", 150},
                            {"Patel", 140}, {"Cohen", 120}, {"Rossi", 90}, {"Murphy", 110}, {"Okafor", 60}});
    names.female_given = table({{"Mary", 26}, {"Patricia", 11}, {"Linda", 10}, {"Jennifer", 9}, {"Maria", 8},
                                {"Susan", 8}, {"Lisa", 7}, {"Karen", 7}, {"Mei", 4}, {"Aisha", 3},
                                {"Sofia", 5}, {"Grace", 4}, {"Ana", 4}, {"Priya", 3}, {"Emma", 6}});
    names.male_given = table({{"James", 33}, {"John", 32}, {"Robert", 31}, {"Michael", 26}, {"William", 24},
                              {"David", 23}, {"Jose", 10}, {"Carlos", 8}, {"Wei", 5}, {"Omar", 4},
                              {"Daniel", 12}, {"Kenji", 3}, {"Luis", 7}, {"Arjun", 3}, {"Noah", 6}});
    return WorldInputs{BayesNet(std::move(nodes)), std::move(names), FriendshipCoefficients{}, GraphBuildOptions{}};
}

} // namespace citysim

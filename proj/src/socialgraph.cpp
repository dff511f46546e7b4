#include "citysim/socialgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "citysim/errors.hpp"
#include "citysim/rng.hpp"

namespace citysim {

FriendshipCoefficients parse_coefficients(std::string_view text) {
    FriendshipCoefficients c;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto sep = line.find_first_of("=:");
        if (sep == std::string::npos) throw ConfigError("coefficients line " + std::to_string(line_no) + " lacks '='");
        const std::string key = trim(line.substr(0, sep));
        const std::string raw = trim(line.substr(sep + 1));
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (raw.empty() || end != raw.c_str() + raw.size() || !std::isfinite(v)) {
            throw ConfigError("coefficient " + key + " is not a finite number");
        }
        if (key == "intercept") c.intercept = v;
        else if (key == "race_match") c.race_match = v;
        else if (key == "sex_match") c.sex_match = v;
        else if (key == "age_distance") c.age_distance = v;
        else if (key == "education_distance") c.education_distance = v;
        else throw ConfigError("unknown coefficient: " + key);
    }
    return c;
}

FriendshipCoefficients load_coefficients_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_coefficients(ss.str());
}

double friendship_probability(const Demographics& a, const Demographics& b, const FriendshipCoefficients& c) {
    const double z = c.intercept + c.race_match * (a.race == b.race ? 1.0 : 0.0) +
                     c.sex_match * (a.sex == b.sex ? 1.0 : 0.0) +
                     c.age_distance * std::abs(a.age_rank - b.age_rank) +
                     c.education_distance * std::abs(a.education_rank - b.education_rank);
    return 1.0 / (1.0 + std::exp(-z));
}

SocialGraph SocialGraph::from_edges(std::size_t n, std::span<const std::pair<PersonId, PersonId>> edges) {
    SocialGraph g(n);
    for (auto [a, b] : edges) {
        if (a == b || a >= n || b >= n) continue;
        g.adjacency_[a].push_back(b);
        g.adjacency_[b].push_back(a);
    }
    for (auto& list : g.adjacency_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return g;
}

std::size_t SocialGraph::edge_count() const {
    std::size_t degree_sum = 0;
    for (const auto& list : adjacency_) degree_sum += list.size();
    return degree_sum / 2;
}

bool SocialGraph::has_edge(PersonId a, PersonId b) const {
    if (a >= adjacency_.size()) return false;
    const auto& list = adjacency_[a];
    return std::binary_search(list.begin(), list.end(), b);
}

std::vector<std::pair<PersonId, PersonId>> SocialGraph::edges() const {
    std::vector<std::pair<PersonId, PersonId>> out;
    for (PersonId i = 0; i < adjacency_.size(); ++i) {
        for (PersonId j : adjacency_[i]) {
            if (i < j) out.emplace_back(i, j);
        }
    }
    return out;
}

void SocialGraph::write_edge_list(std::ostream& out) const {
    for (auto [i, j] : edges()) out << i << ' ' << j << '\n';
}

double pair_uniform(std::uint64_t seed, PersonId i, PersonId j) {
    const std::array<std::uint32_t, 4> counter = {j, i, 0u, static_cast<std::uint32_t>(StreamKind::Graph) << 16};
    const auto block = philox4x32(counter, {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    const std::uint64_t bits = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

SocialGraph build_graph(std::span<const Person> persons, const FriendshipCoefficients& c, std::uint64_t seed,
                        const GraphBuildOptions& options) {
    const std::size_t n = persons.size();
    const double q = options.pair_sample_fraction;
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("pair_sample_fraction must lie in (0,1]");
    if (n > options.max_exhaustive_population && q >= 1.0) {
        throw ConfigError("population " + std::to_string(n) +
                          " exceeds the exhaustive pair limit; set a pair sample fraction below 1");
    }
    std::vector<std::pair<PersonId, PersonId>> edges;
    for (PersonId i = 0; i < n; ++i) {
        if (q >= 1.0) {
            for (PersonId j = i + 1; j < n; ++j) {
                const double p = friendship_probability(persons[i].demographics, persons[j].demographics, c);
                if (pair_uniform(seed, i, j) < p) edges.emplace_back(i, j);
            }
            continue;
        }
        // Geometric skips visit each later j independently with probability q.
        RandomStream skips(StreamAddress{seed, 0, 0, StreamKind::Graph, i, 1});
        const double log_miss = std::log1p(-q);
        std::uint64_t j = i;
        while (true) {
            const double u = skips.uniform();
            j += 1 + static_cast<std::uint64_t>(std::floor(std::log1p(-u) / log_miss));
            if (j >= n) break;
            const auto pj = static_cast<PersonId>(j);
            const double p = friendship_probability(persons[i].demographics, persons[pj].demographics, c);
            if (pair_uniform(seed, i, pj) < std::min(1.0, p / q)) edges.emplace_back(i, pj);
        }
    }
    return SocialGraph::from_edges(n, edges);
}

double referral_weight(PersonId applicant, std::span<const PersonId> firm_employees_sorted, const SocialGraph& g,
                       double multiplier) {
    if (applicant >= g.size()) return 1.0;
    for (PersonId friend_id : g.neighbors(applicant)) {
        if (std::binary_search(firm_employees_sorted.begin(), firm_employees_sorted.end(), friend_id)) {
            return multiplier;
        }
    }
    return 1.0;
}

} // namespace citysim

#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citysim/entities.hpp"

namespace citysim {

/// Logistic friendship model over demographic similarity.
struct FriendshipCoefficients {
    double intercept = -4.0;
    double race_match = 1.5;
    double sex_match = 0.3;
    double age_distance = -0.4;        ///< per bracket
    double education_distance = -0.3;  ///< per level

    friend bool operator==(const FriendshipCoefficients&, const FriendshipCoefficients&) = default;
};

/// Flat `key = value` (or `key: value`) text; unknown keys or non-finite values throw ConfigError.
FriendshipCoefficients parse_coefficients(std::string_view text);
FriendshipCoefficients load_coefficients_file(const std::string& path);

/// sigmoid(intercept + Σ weight·feature); symmetric in (a, b).
double friendship_probability(const Demographics& a, const Demographics& b, const FriendshipCoefficients& c);

/// Undirected simple graph over person ids 0..n-1 with sorted neighbor lists.
class SocialGraph {
public:
    SocialGraph() = default;
    explicit SocialGraph(std::size_t n) : adjacency_(n) {}

    /// Builds from an edge list; duplicates and self-loops are dropped.
    static SocialGraph from_edges(std::size_t n, std::span<const std::pair<PersonId, PersonId>> edges);

    std::size_t size() const { return adjacency_.size(); }
    const std::vector<PersonId>& neighbors(PersonId p) const { return adjacency_[p]; }
    std::size_t edge_count() const;
    bool has_edge(PersonId a, PersonId b) const;

    /// Edges with i < j, ascending.
    std::vector<std::pair<PersonId, PersonId>> edges() const;
    /// One `i j` pair per line, i < j.
    void write_edge_list(std::ostream& out) const;

    friend bool operator==(const SocialGraph&, const SocialGraph&) = default;

private:
    std::vector<std::vector<PersonId>> adjacency_;
};

struct GraphBuildOptions {
    /// Above this many persons the exhaustive pair scan is refused unless
    /// `pair_sample_fraction` < 1.
    std::size_t max_exhaustive_population = 20000;
    /// Fraction q of pairs considered; a considered pair links with min(1, p/q), so the
    /// expected degree is preserved while p <= q.
    double pair_sample_fraction = 1.0;
};

/// Each unordered pair (i < j) is linked independently with its friendship probability.
/// The draw for pair (i, j) is the first uniform of stream (seed, Graph, entity i, tag),
/// counter j, so the edge set does not depend on evaluation order.
SocialGraph build_graph(std::span<const Person> persons, const FriendshipCoefficients& c,
                        std::uint64_t seed, const GraphBuildOptions& options = {});

/// Uniform draw shared by every graph built with this seed for pair (i, j), i < j.
double pair_uniform(std::uint64_t seed, PersonId i, PersonId j);

/// `multiplier` if any neighbor of the applicant works at the firm, else 1.
double referral_weight(PersonId applicant, std::span<const PersonId> firm_employees_sorted,
                       const SocialGraph& g, double multiplier);

} // namespace citysim

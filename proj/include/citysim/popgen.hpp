#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "citysim/entities.hpp"
#include "citysim/rng.hpp"

namespace citysim {

/// One categorical variable with its conditional probability table.
///
/// `cpt` is indexed by the mixed-radix number formed from the parents' category indices,
/// first parent most significant; a root node has a single row.
struct NodeSpec {
    std::string id;
    std::vector<std::string> domain;
    std::vector<std::string> parents;
    std::vector<std::vector<double>> cpt;
};

/// Category index per node, in net node order.
using Assignment = std::vector<std::size_t>;

/// Validated Bayesian network over categorical variables. Immutable once built.
class BayesNet {
public:
    /// Validates structure and tables and computes a topological order. Throws
    /// CptNotNormalized, CycleDetected, MissingCptRow, UnknownParentId or NetFormatError.
    explicit BayesNet(std::vector<NodeSpec> nodes);

    std::size_t size() const { return nodes_.size(); }
    const NodeSpec& node(std::size_t i) const { return nodes_[i]; }
    const std::vector<NodeSpec>& nodes() const { return nodes_; }
    /// Node indices, every parent before its children.
    const std::vector<std::size_t>& topological_order() const { return order_; }
    /// Node indices of each node's parents.
    const std::vector<std::size_t>& parent_indices(std::size_t i) const { return parents_[i]; }
    /// Throws NetFormatError when absent.
    std::size_t index_of(std::string_view id) const;
    bool contains(std::string_view id) const;

    /// CPT row selected by the parents' values in `a`.
    const std::vector<double>& row_for(std::size_t node, const Assignment& a) const;
    std::size_t row_count(std::size_t node) const;

    /// Serializes back to the JSON net format.
    std::string to_json() const;

private:
    std::vector<NodeSpec> nodes_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::size_t> order_;
};

/// Parses the JSON net document `{"nodes": [{"id","domain","parents","cpt"}]}` where cpt keys
/// are parent values joined by "|" (the empty string for roots).
BayesNet load_bayes_net(std::string_view json_text);
BayesNet load_bayes_net_file(const std::string& path);

/// Observer called with each node index just before its CPT row is read.
using SampleObserver = std::function<void(std::size_t node, const Assignment& partial)>;

/// Prior (ancestral) sampling in topological order. Unassigned entries of the partial
/// assignment passed to the observer hold `kUnassigned`.
Assignment prior_sample(const BayesNet& net, RandomStream& rng, const SampleObserver& observer = {});

inline constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

struct WeightedName {
    std::string name;
    double weight = 0.0;
};

struct NameTables {
    std::vector<WeightedName> surnames;
    std::vector<WeightedName> female_given;
    std::vector<WeightedName> male_given;
};

/// Two-column delimited text: `name,weight` per line; blank lines and `#` comments skipped.
/// Throws ConfigError for non-positive weights or an empty table.
std::vector<WeightedName> parse_name_table(std::string_view text);
/// Loads `surnames.csv`, `female.csv` and `male.csv` from a directory.
NameTables load_name_tables(const std::string& directory);

/// Midpoint of a bracket label "lo-hi" or "lo+" (the open bracket uses 1.25·lo).
double bracket_midpoint(std::string_view label);

struct PopulationOptions {
    /// Node ids that hold each demographic field.
    std::string race = "race";
    std::string sex = "sex";
    std::string age = "age";
    std::string education = "education";
    std::string neighborhood = "neighborhood";
    std::string income = "income";
    /// Sex label that selects the female given-name table; others use the male table.
    std::string female_label = "female";
};

/// Synthesizes `n` persons with ids 0..n-1. Person i draws from the stream
/// (seed, step 0, phase 0, Person, i) so every person is independent of population size.
/// Initial state: cash = income bracket midpoint / 12, wage 0, frugality ~ U[0,1), health 1.
std::vector<Person> generate_population(const BayesNet& net, const NameTables& names,
                                        std::size_t n, std::uint64_t seed,
                                        const PopulationOptions& options = {});

/// Demographics from an assignment over a net holding the six demographic nodes.
Demographics to_demographics(const BayesNet& net, const Assignment& a,
                             const PopulationOptions& options = {});

} // namespace citysim

#include "citysim/popgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "citysim/errors.hpp"

namespace citysim {

namespace {

constexpr double kRowTolerance = 1e-9;

std::string join_key(const std::vector<std::string>& parts) {
    std::string key;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) key += '|';
        key += parts[i];
    }
    return key;
}

std::vector<std::string> split_key(const std::string& key) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto bar = key.find('|', start);
        parts.push_back(key.substr(start, bar - start));
        if (bar == std::string::npos) break;
        start = bar + 1;
    }
    return parts;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

BayesNet::BayesNet(std::vector<NodeSpec> nodes) : nodes_(std::move(nodes)) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].domain.empty()) throw NetFormatError("node " + nodes_[i].id + " has an empty domain");
        if (!index.emplace(nodes_[i].id, i).second) throw NetFormatError("duplicate node id " + nodes_[i].id);
    }
    parents_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (const auto& p : nodes_[i].parents) {
            auto it = index.find(p);
            if (it == index.end()) throw UnknownParentId("node " + nodes_[i].id + " names unknown parent " + p);
            parents_[i].push_back(it->second);
        }
    }

    // Depth-first post-order; a grey node reached again closes a cycle.
    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(nodes_.size(), Mark::White);
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        if (mark[v] == Mark::Black) return;
        if (mark[v] == Mark::Grey) throw CycleDetected("cycle through node " + nodes_[v].id);
        mark[v] = Mark::Grey;
        for (std::size_t p : parents_[v]) visit(p);
        mark[v] = Mark::Black;
        order_.push_back(v);
    };
    for (std::size_t i = 0; i < nodes_.size(); ++i) visit(i);

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.cpt.size() != row_count(i)) {
            throw MissingCptRow("node " + n.id + " has " + std::to_string(n.cpt.size()) + " CPT rows, expected " +
                                std::to_string(row_count(i)));
        }
        for (const auto& row : n.cpt) {
            if (row.size() != n.domain.size()) throw NetFormatError("node " + n.id + " has a CPT row of wrong length");
            double sum = 0.0;
            for (double p : row) {
                if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                    throw NetFormatError("node " + n.id + " has a probability outside [0,1]");
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowTolerance) {
                throw CptNotNormalized("node " + n.id + " has a CPT row summing to " + std::to_string(sum));
            }
        }
    }
}

std::size_t BayesNet::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id == id) return i;
    }
    throw NetFormatError("net has no node " + std::string(id));
}

bool BayesNet::contains(std::string_view id) const {
    for (const auto& n : nodes_) {
        if (n.id == id) return true;
    }
    return false;
}

std::size_t BayesNet::row_count(std::size_t node) const {
    std::size_t rows = 1;
    for (std::size_t p : parents_[node]) rows *= nodes_[p].domain.size();
    return rows;
}

const std::vector<double>& BayesNet::row_for(std::size_t node, const Assignment& a) const {
    std::size_t row = 0;
    for (std::size_t p : parents_[node]) row = row * nodes_[p].domain.size() + a[p];
    return nodes_[node].cpt[row];
}

std::string BayesNet::to_json() const {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        nlohmann::ordered_json node;
        node["id"] = n.id;
        node["domain"] = n.domain;
        node["parents"] = n.parents;
        nlohmann::ordered_json cpt = nlohmann::ordered_json::object();
        for (std::size_t row = 0; row < n.cpt.size(); ++row) {
            std::vector<std::string> labels(parents_[i].size());
            std::size_t rem = row;
            for (std::size_t k = parents_[i].size(); k-- > 0;) {
                const auto& dom = nodes_[parents_[i][k]].domain;
                labels[k] = dom[rem % dom.size()];
                rem /= dom.size();
            }
            cpt[join_key(labels)] = n.cpt[row];
        }
        node["cpt"] = std::move(cpt);
        doc["nodes"].push_back(std::move(node));
    }
    return doc.dump(2);
}

BayesNet load_bayes_net(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw NetFormatError(std::string("net is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw NetFormatError("net document needs a \"nodes\" array");
    }

    std::vector<NodeSpec> specs;
    std::map<std::string, std::vector<std::string>> domains;
    for (const auto& jn : doc["nodes"]) {
        NodeSpec n;
        try {
            n.id = jn.at("id").get<std::string>();
            n.domain = jn.at("domain").get<std::vector<std::string>>();
            n.parents = jn.value("parents", std::vector<std::string>{});
        } catch (const nlohmann::json::exception& e) {
            throw NetFormatError(std::string("malformed node: ") + e.what());
        }
        domains[n.id] = n.domain;
        specs.push_back(std::move(n));
    }

    // Rows are placed by parent-value index; missing combinations stay empty and are
    // reported by the BayesNet validation.
    std::size_t spec_index = 0;
    for (const auto& jn : doc["nodes"]) {
        NodeSpec& n = specs[spec_index++];
        std::size_t rows = 1;
        for (const auto& p : n.parents) {
            auto it = domains.find(p);
            if (it == domains.end()) throw UnknownParentId("node " + n.id + " names unknown parent " + p);
            rows *= it->second.size();
        }
        if (!jn.contains("cpt") || !jn["cpt"].is_object()) throw NetFormatError("node " + n.id + " needs a cpt object");
        std::vector<std::vector<double>> table(rows);
        std::vector<bool> seen(rows, false);
        for (const auto& [key, value] : jn["cpt"].items()) {
            const auto labels = n.parents.empty() ? std::vector<std::string>{} : split_key(key);
            if (n.parents.empty() && !key.empty()) throw NetFormatError("root node " + n.id + " cpt key must be empty");
            if (labels.size() != n.parents.size()) throw NetFormatError("node " + n.id + " cpt key has wrong arity: " + key);
            std::size_t row = 0;
            for (std::size_t k = 0; k < labels.size(); ++k) {
                const auto& dom = domains[n.parents[k]];
                auto pos = std::find(dom.begin(), dom.end(), labels[k]);
                if (pos == dom.end()) throw NetFormatError("node " + n.id + " cpt key names unknown value " + labels[k]);
                row = row * dom.size() + static_cast<std::size_t>(pos - dom.begin());
            }
            if (!value.is_array()) throw NetFormatError("node " + n.id + " cpt row must be an array");
            std::vector<double> probs;
            for (const auto& v : value) {
                if (v.is_null()) {
                    probs.push_back(std::nan(""));
                } else if (v.is_number()) {
                    probs.push_back(v.get<double>());
                } else {
                    throw NetFormatError("node " + n.id + " cpt entries must be numbers");
                }
            }
            table[row] = std::move(probs);
            seen[row] = true;
        }
        for (std::size_t row = 0; row < rows; ++row) {
            if (!seen[row]) throw MissingCptRow("node " + n.id + " lacks CPT row " + std::to_string(row));
        }
        n.cpt = std::move(table);
    }
    return BayesNet(std::move(specs));
}

BayesNet load_bayes_net_file(const std::string& path) { return load_bayes_net(read_file(path)); }

Assignment prior_sample(const BayesNet& net, RandomStream& rng, const SampleObserver& observer) {
    Assignment a(net.size(), kUnassigned);
    for (std::size_t node : net.topological_order()) {
        if (observer) observer(node, a);
        const auto& row = net.row_for(node, a);
        std::size_t pick = rng.weighted_index(row);
        // A validated row sums to one, so weighted_index only fails on pathological input.
        if (pick >= row.size()) pick = 0;
        a[node] = pick;
    }
    return a;
}

std::vector<WeightedName> parse_name_table(std::string_view text) {
    std::vector<WeightedName> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("name table line " + std::to_string(line_no) + " lacks a weight");
        WeightedName w;
        w.name = line.substr(0, comma);
        const std::string weight = line.substr(comma + 1);
        try {
            std::size_t used = 0;
            w.weight = std::stod(weight, &used);
        } catch (const std::exception&) {
            throw ConfigError("name table line " + std::to_string(line_no) + " has a bad weight");
        }
        if (!(w.weight > 0.0)) throw ConfigError("name table line " + std::to_string(line_no) + " has a non-positive weight");
        out.push_back(std::move(w));
    }
    if (out.empty()) throw ConfigError("name table is empty");
    return out;
}

NameTables load_name_tables(const std::string& directory) {
    const std::filesystem::path dir(directory);
    NameTables t;
    t.surnames = parse_name_table(read_file((dir / "surnames.csv").string()));
    t.female_given = parse_name_table(read_file((dir / "female.csv").string()));
    t.male_given = parse_name_table(read_file((dir / "male.csv").string()));
    return t;
}

double bracket_midpoint(std::string_view label) {
    auto parse = [&](std::string_view s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw ConfigError("bad bracket label: " + std::string(label));
        }
        return v;
    };
    if (!label.empty() && label.back() == '+') return 1.25 * parse(label.substr(0, label.size() - 1));
    const auto dash = label.find('-');
    if (dash == std::string_view::npos || dash == 0) throw ConfigError("bad bracket label: " + std::string(label));
    return 0.5 * (parse(label.substr(0, dash)) + parse(label.substr(dash + 1)));
}

Demographics to_demographics(const BayesNet& net, const Assignment& a, const PopulationOptions& o) {
    auto label = [&](const std::string& id, int* rank) {
        const std::size_t i = net.index_of(id);
        if (rank != nullptr) *rank = static_cast<int>(a[i]);
        return net.node(i).domain[a[i]];
    };
    Demographics d;
    d.race = label(o.race, nullptr);
    d.sex = label(o.sex, nullptr);
    d.age = label(o.age, &d.age_rank);
    d.education = label(o.education, &d.education_rank);
    d.neighborhood = label(o.neighborhood, nullptr);
    d.income = label(o.income, &d.income_rank);
    return d;
}

namespace {

const std::string& pick_name(const std::vector<WeightedName>& table, RandomStream& rng) {
    std::vector<double> w;
    w.reserve(table.size());
    for (const auto& n : table) w.push_back(n.weight);
    return table[rng.weighted_index(w)].name;
}

} // namespace

std::vector<Person> generate_population(const BayesNet& net, const NameTables& names, std::size_t n,
                                        std::uint64_t seed, const PopulationOptions& options) {
    for (const auto* id : {&options.race, &options.sex, &options.age, &options.education,
                           &options.neighborhood, &options.income}) {
        (void)net.index_of(*id);
    }
    std::vector<Person> people;
    people.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rng(StreamAddress{seed, 0, 0, StreamKind::Person, static_cast<std::uint32_t>(i), 0});
        const Assignment a = prior_sample(net, rng);
        Person p;
        p.id = static_cast<PersonId>(i);
        p.demographics = to_demographics(net, a, options);
        const auto& given = p.demographics.sex == options.female_label ? names.female_given : names.male_given;
        const std::string& first = pick_name(given, rng);
        const std::string& last = pick_name(names.surnames, rng);
        p.name = first + " " + last;
        p.cash = Money::from_units(bracket_midpoint(p.demographics.income) / 12.0);
        p.frugality = rng.uniform();
        people.push_back(std::move(p));
    }
    return people;
}

} // namespace citysim

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "../oracles.hpp"
#include "citysim/engine.hpp"
#include "citysim/errors.hpp"
#include "citysim/popgen.hpp"

using namespace citysim;

namespace {

std::string fixture_text() {
    std::ifstream in(CITYSIM_FIXTURES "/net4.json");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> empirical_joint(const BayesNet& net, std::size_t samples, std::uint64_t seed,
                                    const std::vector<std::size_t>& radix) {
    std::size_t total = 1;
    for (auto r : radix) total *= r;
    std::vector<double> freq(total, 0.0);
    for (std::size_t i = 0; i < samples; ++i) {
        RandomStream rng = RandomStream::seeded(seed, static_cast<std::uint32_t>(i));
        const Assignment a = prior_sample(net, rng);
        freq[oracle::joint_index(a, radix)] += 1.0;
    }
    for (auto& f : freq) f /= static_cast<double>(samples);
    return freq;
}

} // namespace

TEST_CASE("load_bayes_net rejects bad tables") {
    CHECK_THROWS_AS(load_bayes_net(R"({"nodes":[{"id":"A","domain":["x","y"],"parents":[],"cpt":{"":[0.6,0.3]}}]})"),
                    CptNotNormalized);
    CHECK_THROWS_AS(load_bayes_net(R"({"nodes":[
        {"id":"A","domain":["0","1"],"parents":["B"],"cpt":{"0":[1,0],"1":[0,1]}},
        {"id":"B","domain":["0","1"],"parents":["A"],"cpt":{"0":[1,0],"1":[0,1]}}]})"),
                    CycleDetected);
    CHECK_THROWS_AS(load_bayes_net(R"({"nodes":[
        {"id":"A","domain":["0","1"],"parents":[],"cpt":{"":[0.5,0.5]}},
        {"id":"B","domain":["0","1"],"parents":["A"],"cpt":{"0":[1,0]}}]})"),
                    MissingCptRow);
    CHECK_THROWS_AS(load_bayes_net(R"({"nodes":[{"id":"B","domain":["0"],"parents":["Z"],"cpt":{"z":[1]}}]})"),
                    UnknownParentId);
    CHECK_THROWS_AS(load_bayes_net(R"({"nodes":[{"id":"A","domain":["x","y"],"parents":[],"cpt":{"":[NaN,1]}}]})"),
                    NetFormatError);
    CHECK_THROWS_AS(load_bayes_net("not json"), NetFormatError);
}

TEST_CASE("topological order agrees with Kahn") {
    const BayesNet net = load_bayes_net(fixture_text());
    REQUIRE(net.size() == 4);
    const auto kahn = oracle::kahn_order(net.nodes());
    REQUIRE_FALSE(kahn.empty());
    std::vector<std::string> ours;
    for (auto i : net.topological_order()) ours.push_back(net.node(i).id);
    CHECK(oracle::respects_edges(net.nodes(), ours));
    CHECK(oracle::respects_edges(net.nodes(), kahn));
}

TEST_CASE("degenerate and deterministic rows") {
    const BayesNet single = load_bayes_net(R"({"nodes":[{"id":"A","domain":["x"],"parents":[],"cpt":{"":[1.0]}}]})");
    for (std::uint32_t i = 0; i < 50; ++i) {
        RandomStream rng = RandomStream::seeded(3, i);
        CHECK(prior_sample(single, rng) == Assignment{0});
    }
    const BayesNet chain = load_bayes_net(R"({"nodes":[
        {"id":"A","domain":["0","1"],"parents":[],"cpt":{"":[0.5,0.5]}},
        {"id":"B","domain":["0","1"],"parents":["A"],"cpt":{"0":[0.5,0.5],"1":[0.0,1.0]}}]})");
    int ones = 0;
    for (std::uint32_t i = 0; i < 500; ++i) {
        RandomStream rng = RandomStream::seeded(4, i);
        const auto a = prior_sample(chain, rng);
        if (a[0] == 1) {
            ++ones;
            CHECK(a[1] == 1);
        }
    }
    CHECK(ones > 0);
}

TEST_CASE("zero-probability categories are never drawn") {
    const BayesNet net =
        load_bayes_net(R"({"nodes":[{"id":"A","domain":["x","y","z"],"parents":[],"cpt":{"":[0.5,0.0,0.5]}}]})");
    for (std::uint32_t i = 0; i < 2000; ++i) {
        RandomStream rng = RandomStream::seeded(5, i);
        CHECK(prior_sample(net, rng)[0] != 1);
    }
}

TEST_CASE("parents are sampled before their children") {
    const BayesNet net = load_bayes_net(fixture_text());
    RandomStream rng = RandomStream::seeded(6);
    std::size_t calls = 0;
    prior_sample(net, rng, [&](std::size_t node, const Assignment& partial) {
        ++calls;
        CHECK(partial[node] == kUnassigned);
        for (auto p : net.parent_indices(node)) CHECK(partial[p] != kUnassigned);
    });
    CHECK(calls == net.size());
}

TEST_CASE("sampled joint matches the enumerated joint") {
    const std::string text = fixture_text();
    const BayesNet net = load_bayes_net(text);
    std::vector<std::size_t> radix;
    const auto exact = oracle::exact_joint_from_document(nlohmann::json::parse(text), radix);
    double mass = 0.0;
    for (double p : exact) mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::l1(exact, oracle::exact_joint(net.nodes())) < 1e-12);

    const auto freq = empirical_joint(net, 100000, 2024, radix);
    CHECK(oracle::l1(freq, exact) <= 0.02);
    for (std::size_t k = 0; k < radix.size(); ++k) {
        CHECK(oracle::l1(oracle::marginal(freq, radix, k), oracle::marginal(exact, radix, k)) <= 0.02);
    }
}

TEST_CASE("root frequencies within three standard errors") {
    const BayesNet net = load_bayes_net(fixture_text());
    const std::size_t n = 20000;
    const std::size_t weather = net.index_of("weather");
    std::vector<double> counts(3, 0.0);
    for (std::uint32_t i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::seeded(77, i);
        counts[prior_sample(net, rng)[weather]] += 1.0;
    }
    const std::vector<double> p = {0.5, 0.3, 0.2};
    for (std::size_t v = 0; v < 3; ++v) {
        const double se = std::sqrt(p[v] * (1 - p[v]) / n);
        CHECK(std::abs(counts[v] / n - p[v]) <= 3 * se);
    }
}

TEST_CASE("net survives a JSON round trip") {
    const BayesNet net = load_bayes_net(fixture_text());
    const BayesNet again = load_bayes_net(net.to_json());
    REQUIRE(again.size() == net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        CHECK(again.node(i).id == net.node(i).id);
        CHECK(again.node(i).cpt == net.node(i).cpt);
    }
}

TEST_CASE("name tables and brackets") {
    const auto t = parse_name_table("# comment\nSmith,2.5\n\nJones,1\n");
    REQUIRE(t.size() == 2);
    CHECK(t[0].name == "Smith");
    CHECK(t[1].weight == 1.0);
    CHECK_THROWS_AS(parse_name_table("A,0\n"), ConfigError);
    CHECK_THROWS_AS(parse_name_table("A\n"), ConfigError);
    CHECK_THROWS_AS(parse_name_table(""), ConfigError);
    CHECK(bracket_midpoint("20000-40000") == 30000.0);
    CHECK(bracket_midpoint("100000+") == 125000.0);
    CHECK_THROWS_AS(bracket_midpoint("lots"), ConfigError);
}

TEST_CASE("generate_population") {
    const WorldInputs in = default_inputs();
    CHECK(generate_population(in.net, in.names, 0, 1).empty());

    const auto people = generate_population(in.net, in.names, 1000, 11);
    REQUIRE(people.size() == 1000);
    const PopulationOptions o;
    auto domain_has = [&](const std::string& node, const std::string& value) {
        const auto& d = in.net.node(in.net.index_of(node)).domain;
        return std::find(d.begin(), d.end(), value) != d.end();
    };
    for (std::size_t i = 0; i < people.size(); ++i) {
        const Person& p = people[i];
        CHECK(p.id == i);
        CHECK(domain_has(o.race, p.demographics.race));
        CHECK(domain_has(o.sex, p.demographics.sex));
        CHECK(domain_has(o.age, p.demographics.age));
        CHECK(domain_has(o.education, p.demographics.education));
        CHECK(domain_has(o.neighborhood, p.demographics.neighborhood));
        CHECK(domain_has(o.income, p.demographics.income));
        CHECK(p.wage == Money{});
        CHECK(p.frugality >= 0.0);
        CHECK(p.frugality < 1.0);
        CHECK(p.health == 1.0);
        CHECK(p.cash == Money::from_units(bracket_midpoint(p.demographics.income) / 12.0));
        CHECK_FALSE(p.name.empty());
    }
    CHECK(generate_population(in.net, in.names, 1000, 11) == people);

    const auto prefix = generate_population(in.net, in.names, 10, 11);
    for (std::size_t i = 0; i < prefix.size(); ++i) CHECK(prefix[i] == people[i]);
}

TEST_CASE("population marginals match the enumerated joint") {
    const WorldInputs in = default_inputs();
    const nlohmann::json doc = nlohmann::json::parse(in.net.to_json());
    std::vector<std::size_t> radix;
    const auto exact = oracle::exact_joint_from_document(doc, radix);
    const auto people = generate_population(in.net, in.names, 100000, 99);
    const PopulationOptions o;
    const std::vector<std::pair<std::string, std::string Demographics::*>> fields = {
        {o.race, &Demographics::race},           {o.sex, &Demographics::sex},
        {o.age, &Demographics::age},             {o.education, &Demographics::education},
        {o.neighborhood, &Demographics::neighborhood}, {o.income, &Demographics::income},
    };
    for (const auto& [node, member] : fields) {
        const std::size_t k = in.net.index_of(node);
        const auto& domain = in.net.node(k).domain;
        std::vector<double> freq(domain.size(), 0.0);
        for (const auto& p : people) {
            const auto it = std::find(domain.begin(), domain.end(), p.demographics.*member);
            freq[static_cast<std::size_t>(it - domain.begin())] += 1.0 / people.size();
        }
        CHECK_MESSAGE(oracle::l1(freq, oracle::marginal(exact, radix, k)) <= 0.02, node);
    }
}

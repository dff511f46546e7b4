#include <doctest.h>

#include "citysim/engine.hpp"
#include "citysim/serialize.hpp"

using namespace citysim;

TEST_CASE("world survives JSON and binary round trips") {
    WorldState w = init_world(ScenarioConfig{}, 150, 12);
    run(w, 8);
    CHECK(world_from_json(world_to_json(w)) == w);
    CHECK(decode_world(encode_world(w)) == w);

    WorldJsonOptions lean;
    lean.graph = false;
    lean.metrics = false;
    const WorldState stripped = world_from_json(world_to_json(w, lean));
    CHECK(stripped.graph.size() == 0);
    CHECK(stripped.metrics.empty());
    CHECK(stripped.persons == w.persons);
}

TEST_CASE("a restored world continues identically") {
    WorldState a = init_world(ScenarioConfig{}, 150, 12);
    run(a, 5);
    WorldState b = decode_world(encode_world(a));
    CHECK(run(a, 10) == run(b, 10));
    CHECK(world_digest(a) == world_digest(b));
}

TEST_CASE("intent sets and legislation round trip") {
    WorldState w = init_world(ScenarioConfig{}, 100, 4);
    run(w, 3);
    for (Phase phase : kPhases) {
        if (!is_parallel(phase)) continue;
        const IntentSet s = compute_intents(w, phase, Partition{});
        CHECK(Json(s).get<IntentSet>() == s);
        commit_phase(w, phase, s);
    }
    Legislation l;
    l.kind = LegislationKind::SetSubsidy;
    l.sector = Sector::Hospital;
    l.delta = 10;
    l.proposer = 3;
    l.deadline = 9;
    CHECK(Json(l).get<Legislation>() == l);
}

TEST_CASE("fnv1a") {
    const std::vector<std::uint8_t> empty;
    CHECK(fnv1a64(empty) == 0xcbf29ce484222325ULL);
    const std::vector<std::uint8_t> a = {'a'};
    CHECK(fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
}

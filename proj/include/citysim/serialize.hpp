#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "citysim/engine.hpp"

namespace citysim {

using Json = nlohmann::json;

void to_json(Json& j, const Money& m);
void from_json(const Json& j, Money& m);
void to_json(Json& j, const Person& p);
void from_json(const Json& j, Person& p);
void to_json(Json& j, const Firm& f);
void from_json(const Json& j, Firm& f);
void to_json(Json& j, const Government& g);
void from_json(const Json& j, Government& g);
void to_json(Json& j, const QTable& q);
void from_json(const Json& j, QTable& q);
void to_json(Json& j, const Legislation& l);
void from_json(const Json& j, Legislation& l);
void to_json(Json& j, const MetricsRow& r);
void from_json(const Json& j, MetricsRow& r);
void to_json(Json& j, const IntentSet& s);
void from_json(const Json& j, IntentSet& s);
void to_json(Json& j, const Params& p);
void from_json(const Json& j, Params& p);

struct WorldJsonOptions {
    bool graph = true;
    bool metrics = true;
};

Json world_to_json(const WorldState& w, const WorldJsonOptions& options = {});
/// Without a "graph" member the graph is left empty.
WorldState world_from_json(const Json& j);

std::vector<std::uint8_t> encode_world(const WorldState& w);
WorldState decode_world(std::span<const std::uint8_t> bytes);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

} // namespace citysim

#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "muda/clearing.hpp"
#include "muda/errors.hpp"
#include "muda/mechanism.hpp"
#include "muda/money.hpp"
#include "muda/valuation.hpp"

namespace muda {

using nlohmann::json;

namespace detail {

inline Money money_from_json(const json& value, const std::string& where) {
    if (!value.is_number()) throw ParseError(where + ": expected a number");
    try {
        return Money::from_double(value.get<double>());
    } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
    }
}

}  // namespace detail

/// Parses a market document:
///   {"max_units": int, "traders": [{"id", "side", "marginals"}...]}
/// Marginals must be non-increasing and on the fixed-point grid (at most
/// four decimal places); violations name the offending trader and position.
inline Market parse_market(const json& doc) {
    if (!doc.is_object()) throw ParseError("market: expected a JSON object");
    if (!doc.contains("max_units")) throw ParseError("market: missing field \"max_units\"");
    if (!doc["max_units"].is_number_integer()) {
        throw ParseError("market: \"max_units\" must be an integer");
    }
    const std::int64_t max_units = doc["max_units"].get<std::int64_t>();
    if (!doc.contains("traders")) throw ParseError("market: missing field \"traders\"");
    if (!doc["traders"].is_array()) throw ParseError("market: \"traders\" must be an array");

    std::vector<Trader> traders;
    std::size_t index = 0;
    for (const json& entry : doc["traders"]) {
        const std::string where = "trader " + std::to_string(index);
        if (!entry.is_object()) throw ParseError(where + ": expected an object");

        if (!entry.contains("id")) throw ParseError(where + ": missing field \"id\"");
        std::string id;
        if (entry["id"].is_string()) {
            id = entry["id"].get<std::string>();
        } else if (entry["id"].is_number_integer()) {
            id = std::to_string(entry["id"].get<std::int64_t>());
        } else {
            throw ParseError(where + ": \"id\" must be a string or integer");
        }

        if (!entry.contains("side")) throw ParseError(where + " (" + id + "): missing field \"side\"");
        if (!entry["side"].is_string()) {
            throw ParseError(where + " (" + id + "): \"side\" must be a string");
        }
        const std::string side_text = entry["side"].get<std::string>();
        Side side;
        if (side_text == "buyer") {
            side = Side::Buyer;
        } else if (side_text == "seller") {
            side = Side::Seller;
        } else {
            throw ParseError(where + " (" + id + "): \"side\" must be \"buyer\" or \"seller\"");
        }

        if (!entry.contains("marginals")) {
            throw ParseError(where + " (" + id + "): missing field \"marginals\"");
        }
        if (!entry["marginals"].is_array() || entry["marginals"].empty()) {
            throw ParseError(where + " (" + id + "): \"marginals\" must be a non-empty array");
        }
        std::vector<Money> marginals;
        std::size_t pos = 0;
        for (const json& m : entry["marginals"]) {
            marginals.push_back(detail::money_from_json(
                m, where + " (" + id + "), marginal " + std::to_string(pos)));
            if (pos > 0 && marginals[pos] > marginals[pos - 1]) {
                throw ParseError(where + " (" + id + "): marginals increase at position " +
                                 std::to_string(pos));
            }
            ++pos;
        }
        traders.push_back({std::move(id), side, Valuation(std::move(marginals))});
        ++index;
    }
    try {
        return Market(std::move(traders), max_units);
    } catch (const Error& e) {
        throw ParseError(std::string("market: ") + e.what());
    }
}

inline Market parse_market(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return parse_market(doc);
}

inline Market load_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_market(in);
}

inline json to_json(const Market& market) {
    json traders = json::array();
    for (const Trader& t : market.traders()) {
        json marginals = json::array();
        for (Money m : t.valuation.marginals()) marginals.push_back(m.to_double());
        traders.push_back(
            {{"id", t.id}, {"side", to_string(t.side)}, {"marginals", std::move(marginals)}});
    }
    return {{"max_units", market.max_units()}, {"traders", std::move(traders)}};
}

inline json to_json(const PriceInterval& interval) {
    json out = json::object();
    out["low"] = interval.low ? json(interval.low->to_double()) : json();
    out["high"] = interval.high ? json(interval.high->to_double()) : json();
    return out;
}

inline json to_json(const OptimalTrade& optimal) {
    json buyers = json::array();
    for (const auto& [id, unit] : optimal.efficient_buyers) {
        buyers.push_back({{"trader", id}, {"unit", unit}});
    }
    json sellers = json::array();
    for (const auto& [id, unit] : optimal.efficient_sellers) {
        sellers.push_back({{"trader", id}, {"unit", unit}});
    }
    return {{"k", optimal.k},
            {"max_gft", optimal.max_gft.to_double()},
            {"equilibrium_interval", to_json(optimal.equilibrium_interval)},
            {"efficient_buyers", std::move(buyers)},
            {"efficient_sellers", std::move(sellers)}};
}

inline json to_json(const SideOutcome& outcome) {
    json traders = json::object();
    for (const auto& [id, r] : outcome.traders) {
        traders[id] = {{"side", to_string(r.side)},
                       {"units", r.units},
                       {"payment", r.payment.to_double()},
                       {"fee", r.fee.to_double()},
                       {"gain", r.gain.to_double()}};
    }
    return {{"cross_price", outcome.cross_price.to_double()},
            {"long_side", to_string(outcome.long_side)},
            {"traders", std::move(traders)}};
}

inline json to_json(const MudaOutcome& outcome) {
    json sides = json::object();
    for (const auto& [id, tag] : outcome.split.sides) sides[id] = to_string(tag);
    return {{"variant", to_string(outcome.variant)},
            {"seed", outcome.seed},
            {"split", {{"rng_seed", outcome.split.rng_seed}, {"sides", std::move(sides)}}},
            {"left_price", outcome.left_price.to_double()},
            {"right_price", outcome.right_price.to_double()},
            {"left", to_json(outcome.left)},
            {"right", to_json(outcome.right)},
            {"total_gft", outcome.total_gft.to_double()},
            {"agents_gft", outcome.agents_gft.to_double()},
            {"market_maker_revenue", outcome.market_maker_revenue.to_double()},
            {"benchmark", to_json(outcome.benchmark)}};
}

}  // namespace muda

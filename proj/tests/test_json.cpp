#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "muda/json_io.hpp"
#include "muda/mechanism.hpp"
#include "oracle.hpp"

using namespace muda;

namespace {

Market parse(const std::string& text) {
    std::istringstream in(text);
    return parse_market(in);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    FAIL("expected ParseError");
    return {};
}

}  // namespace

TEST_CASE("market document parses") {
    const Market m = parse(R"({
        "max_units": 6,
        "traders": [
            {"id": "alice", "side": "seller", "marginals": [70, 60, 40, 20, 10]},
            {"id": 7, "side": "buyer", "marginals": [99.5, 12.0125]}
        ]
    })");
    REQUIRE(m.max_units() == 6);
    REQUIRE(m.traders().size() == 2);
    REQUIRE(m.find("alice")->side == Side::Seller);
    // integer ids are accepted and stringified
    REQUIRE(m.find("7") != nullptr);
    REQUIRE(m.find("7")->valuation.marginals()[1] == Money::from_atomic(120'125));
}

TEST_CASE("market parse errors name the offending field") {
    REQUIRE(error_of(R"([1,2])").find("expected a JSON object") != std::string::npos);
    REQUIRE(error_of(R"({"traders": []})").find("max_units") != std::string::npos);
    REQUIRE(error_of(R"({"max_units": 2.5, "traders": []})").find("integer") !=
            std::string::npos);
    REQUIRE(error_of(R"({"max_units": 2})").find("traders") != std::string::npos);

    const std::string no_id = R"({"max_units": 2, "traders": [{"side": "buyer"}]})";
    REQUIRE(error_of(no_id).find("id") != std::string::npos);

    const std::string bad_side =
        R"({"max_units": 2, "traders": [{"id": "x", "side": "short", "marginals": [1]}]})";
    REQUIRE(error_of(bad_side).find("buyer") != std::string::npos);

    const std::string empty_marginals =
        R"({"max_units": 2, "traders": [{"id": "x", "side": "buyer", "marginals": []}]})";
    REQUIRE(error_of(empty_marginals).find("non-empty") != std::string::npos);
}

TEST_CASE("marginals must be non-increasing and on the money grid") {
    const std::string increasing =
        R"({"max_units": 3, "traders": [{"id": "x", "side": "buyer", "marginals": [5, 9]}]})";
    const std::string message = error_of(increasing);
    REQUIRE(message.find("increase at position 1") != std::string::npos);
    REQUIRE(message.find("x") != std::string::npos);

    const std::string off_grid =
        R"({"max_units": 2, "traders": [{"id": "x", "side": "buyer", "marginals": [1.00001]}]})";
    REQUIRE(error_of(off_grid).find("decimal") != std::string::npos);

    const std::string not_a_number =
        R"({"max_units": 2, "traders": [{"id": "x", "side": "buyer", "marginals": ["9"]}]})";
    REQUIRE(error_of(not_a_number).find("number") != std::string::npos);
}

TEST_CASE("market-level violations surface as parse errors") {
    const std::string duplicate = R"({"max_units": 2, "traders": [
        {"id": "x", "side": "buyer", "marginals": [5]},
        {"id": "x", "side": "seller", "marginals": [3]}
    ]})";
    REQUIRE(error_of(duplicate).find("duplicate") != std::string::npos);

    const std::string too_long = R"({"max_units": 1, "traders": [
        {"id": "x", "side": "buyer", "marginals": [5, 4]}
    ]})";
    REQUIRE(error_of(too_long).find("cap") != std::string::npos);
}

TEST_CASE("invalid JSON is reported as a parse error") {
    REQUIRE(error_of("{not json").find("invalid JSON") != std::string::npos);
    REQUIRE_THROWS_AS(load_market("/nonexistent/market.json"), ParseError);
}

TEST_CASE("market round-trips through its JSON form") {
    const Market m = parse(R"({
        "max_units": 3,
        "traders": [
            {"id": "b", "side": "buyer", "marginals": [10.5, 8]},
            {"id": "s", "side": "seller", "marginals": [7, 3.25, 1]}
        ]
    })");
    const Market back = parse_market(to_json(m));
    REQUIRE(back.max_units() == m.max_units());
    REQUIRE(back.traders().size() == m.traders().size());
    for (std::size_t i = 0; i < m.traders().size(); ++i) {
        REQUIRE(back.traders()[i].id == m.traders()[i].id);
        REQUIRE(back.traders()[i].side == m.traders()[i].side);
        REQUIRE(oracle::to_vector(back.traders()[i].valuation.marginals()) ==
                oracle::to_vector(m.traders()[i].valuation.marginals()));
    }
}

TEST_CASE("outcome serialization carries every reported figure") {
    const Market m = parse(R"({
        "max_units": 2,
        "traders": [
            {"id": "b1", "side": "buyer", "marginals": [10, 9]},
            {"id": "b2", "side": "buyer", "marginals": [8]},
            {"id": "s1", "side": "seller", "marginals": [2, 1]},
            {"id": "s2", "side": "seller", "marginals": [4]}
        ]
    })");
    const MudaOutcome outcome = run_muda(m, Variant::Vickrey, 42);
    const json doc = to_json(outcome);

    REQUIRE(doc["variant"] == "vickrey");
    REQUIRE(doc["seed"] == 42);
    REQUIRE(doc["split"]["sides"].size() == 4);
    for (const auto& [id, side] : doc["split"]["sides"].items()) {
        REQUIRE((side == "left" || side == "right"));
    }
    REQUIRE(doc["left"]["traders"].size() + doc["right"]["traders"].size() == 4);
    REQUIRE(doc["total_gft"].get<double>() == outcome.total_gft.to_double());
    REQUIRE(doc["benchmark"]["k"].get<std::int64_t>() == outcome.benchmark.k);
    REQUIRE(doc["benchmark"]["max_gft"].get<double>() ==
            outcome.benchmark.max_gft.to_double());

    // price interval bounds serialize as numbers or null
    const json& interval = doc["benchmark"]["equilibrium_interval"];
    REQUIRE((interval["low"].is_number() || interval["low"].is_null()));
    REQUIRE((interval["high"].is_number() || interval["high"].is_null()));
}

TEST_CASE("optimal trade serialization lists the efficient units") {
    const Market m = parse(R"({
        "max_units": 2,
        "traders": [
            {"id": "b", "side": "buyer", "marginals": [10, 9]},
            {"id": "s", "side": "seller", "marginals": [2, 1]}
        ]
    })");
    const json doc = to_json(optimal_trade(m));
    REQUIRE(doc["k"] == 2);
    REQUIRE(doc["max_gft"] == 16.0);
    REQUIRE(doc["efficient_buyers"].size() == 2);
    REQUIRE(doc["efficient_buyers"][0]["trader"] == "b");
    REQUIRE(doc["efficient_sellers"][0].contains("unit"));
}

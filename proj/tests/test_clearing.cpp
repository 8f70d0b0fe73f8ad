#include <catch2/catch_amalgamated.hpp>

#include "muda/clearing.hpp"
#include "oracle.hpp"

using namespace muda;

namespace {

Trader trader(std::string id, Side side, std::initializer_list<std::int64_t> units_list) {
    std::vector<Money> m;
    for (std::int64_t u : units_list) m.push_back(Money::units(u));
    return {std::move(id), side, Valuation(m)};
}

Market example1_left() {
    return Market({trader("alice", Side::Seller, {70, 60, 40, 20, 10}),
                   trader("bob", Side::Seller, {65, 45, 35, 25, 15}),
                   trader("carol", Side::Buyer, {100, 90, 80, 60, 40, 20})},
                  6);
}

}  // namespace

TEST_CASE("aggregate demand and supply are sums of strict unit counts") {
    const Market m({trader("b1", Side::Buyer, {9, 7, 3}), trader("b2", Side::Buyer, {7}),
                    trader("s1", Side::Seller, {2, 4, 8})},
                   3);
    REQUIRE(aggregate_demand(m, Money::units(7)) == 1);
    REQUIRE(aggregate_supply(m, Money::units(7)) == 2);
    REQUIRE(aggregate_demand(m, Money::units(0)) == 4);
    REQUIRE(aggregate_supply(m, Money::units(10)) == 3);
}

TEST_CASE("aggregate curves are step functions with one-sided continuity") {
    const Market m({trader("b", Side::Buyer, {9, 7, 7, 3}), trader("s", Side::Seller, {2, 7})}, 4);

    const AggregateCurve demand_curve = aggregate_curve(m, Side::Buyer);
    REQUIRE(demand_curve.base == 4);
    REQUIRE(demand_curve.steps ==
            std::vector<std::pair<Money, std::int64_t>>{
                {Money::units(3), 3}, {Money::units(7), 1}, {Money::units(9), 0}});
    // right-continuous: the unit at the breakpoint already stopped trading
    REQUIRE(demand_curve.quantity_at(Money::units(2)) == 4);
    REQUIRE(demand_curve.quantity_at(Money::units(7)) == 1);
    REQUIRE(demand_curve.quantity_at(Money::units(8)) == 1);
    REQUIRE(demand_curve.quantity_at(Money::units(100)) == 0);

    const AggregateCurve supply_curve = aggregate_curve(m, Side::Seller);
    REQUIRE(supply_curve.base == 0);
    REQUIRE(supply_curve.steps ==
            std::vector<std::pair<Money, std::int64_t>>{{Money::units(2), 1},
                                                        {Money::units(7), 2}});
    // left-continuous: the unit at the breakpoint has not joined yet
    REQUIRE(supply_curve.quantity_at(Money::units(2)) == 0);
    REQUIRE(supply_curve.quantity_at(Money::units(7)) == 1);
    REQUIRE(supply_curve.quantity_at(Money::units(7) + kMoneyEpsilon) == 2);
}

TEST_CASE("equilibrium on a simple crossing") {
    const Market m({trader("b", Side::Buyer, {9, 7, 3}), trader("s", Side::Seller, {2, 4, 8})}, 3);
    const Equilibrium eq = equilibrium_price(m);
    REQUIRE(eq.interval.low == Money::units(4));
    REQUIRE(eq.interval.high == Money::units(7));
    REQUIRE(eq.price == Money::from_atomic(55'000));
    REQUIRE(eq.quantity == 2);
    REQUIRE(aggregate_demand(m, eq.price) == aggregate_supply(m, eq.price));
}

TEST_CASE("equilibrium with one buyer and one seller") {
    const Market m({trader("b", Side::Buyer, {10}), trader("s", Side::Seller, {5})}, 1);
    const Equilibrium eq = equilibrium_price(m);
    REQUIRE(eq.interval.low == Money::units(5));
    REQUIRE(eq.interval.high == Money::units(10));
    REQUIRE(eq.price == Money::from_atomic(75'000));
    REQUIRE(eq.quantity == 1);
}

TEST_CASE("equilibrium degenerate cases") {
    SECTION("buyers only: price just above the top marginal, no trade") {
        const Market m({trader("b", Side::Buyer, {9, 7})}, 2);
        const Equilibrium eq = equilibrium_price(m);
        REQUIRE(eq.price == Money::units(9) + kMoneyEpsilon);
        REQUIRE(eq.quantity == 0);
        REQUIRE(aggregate_demand(m, eq.price) == 0);
    }
    SECTION("sellers only: price just below the bottom marginal, no trade") {
        const Market m({trader("s", Side::Seller, {4, 6})}, 2);
        const Equilibrium eq = equilibrium_price(m);
        REQUIRE(eq.price == Money::units(4) - kMoneyEpsilon);
        REQUIRE(eq.quantity == 0);
        REQUIRE(aggregate_supply(m, eq.price) == 0);
    }
    SECTION("sellers only at zero stays non-negative") {
        const Market m({trader("s", Side::Seller, {0, 2})}, 2);
        const Equilibrium eq = equilibrium_price(m);
        REQUIRE(eq.price == Money{});
    }
    SECTION("empty market clears at zero") {
        const Market m({}, 1);
        const Equilibrium eq = equilibrium_price(m);
        REQUIRE(eq.price == Money{});
        REQUIRE(eq.quantity == 0);
    }
}

TEST_CASE("equilibrium when excess crosses zero only at a tie value") {
    // demand(p) and supply(p) never meet on an open region: at p just below 5
    // demand is 2 vs supply 1, at p just above 5 demand is 1 vs supply 2.
    const Market m({trader("b", Side::Buyer, {9, 5}), trader("s", Side::Seller, {1, 5})}, 2);
    const Equilibrium eq = equilibrium_price(m);
    REQUIRE(eq.price == Money::units(5));
    REQUIRE(eq.interval.low == Money::units(5));
    REQUIRE(eq.interval.high == Money::units(5));
    REQUIRE(eq.quantity == 1);
}

TEST_CASE("equilibrium when excess skips zero entirely") {
    // excess is +1 just below 5 and -1 from 5 upward; the crossing
    // breakpoint becomes a degenerate interval and nothing trades strictly
    const Market m({trader("b", Side::Buyer, {5, 5}), trader("s", Side::Seller, {3, 5})}, 2);
    const Equilibrium eq = equilibrium_price(m);
    REQUIRE(eq.price == Money::units(5));
    REQUIRE(eq.interval.low == Money::units(5));
    REQUIRE(eq.interval.high == Money::units(5));
    REQUIRE(eq.quantity == 0);
}

TEST_CASE("equilibrium price balances demand and supply on random markets") {
    rng::Stream stream(771);
    for (int iter = 0; iter < 400; ++iter) {
        const Market m = oracle::random_market(stream, 2, 10, 6);
        const Equilibrium eq = equilibrium_price(m);
        if (eq.interval.low && eq.interval.high && *eq.interval.low < eq.price) {
            REQUIRE(aggregate_demand(m, eq.price) == aggregate_supply(m, eq.price));
            REQUIRE(aggregate_demand(m, eq.price) == eq.quantity);
        }
        REQUIRE(eq.price >= Money{});
    }
}

TEST_CASE("optimal trade on the worked example") {
    const OptimalTrade best = optimal_trade(example1_left());
    REQUIRE(best.k == 5);
    REQUIRE(best.max_gft == Money::units(265));
    REQUIRE(best.equilibrium_interval.low == Money::units(35));
    REQUIRE(best.equilibrium_interval.high == Money::units(40));
    REQUIRE(best.efficient_buyers.size() == 5);
    REQUIRE(best.efficient_sellers.size() == 5);

    // the efficient units themselves account for the whole optimum
    Money total{};
    const Market m = example1_left();
    for (const auto& [id, unit] : best.efficient_buyers) {
        total += m.find(id)->valuation.marginals()[static_cast<std::size_t>(unit)];
    }
    for (const auto& [id, unit] : best.efficient_sellers) {
        total -= m.find(id)->valuation.marginals()[static_cast<std::size_t>(unit)];
    }
    REQUIRE(total == best.max_gft);
}

TEST_CASE("optimal trade matches exhaustive enumeration") {
    rng::Stream stream(424242);
    for (int iter = 0; iter < 300; ++iter) {
        const Market m = oracle::random_small_market(stream, 10);
        const OptimalTrade fast = optimal_trade(m);
        const auto reference = oracle::enumerate_optimum(m);
        REQUIRE(fast.max_gft == reference.max_gft);
        REQUIRE(fast.k == reference.min_k);
    }
}

TEST_CASE("optimal_trade_size agrees with optimal_trade") {
    rng::Stream stream(99);
    for (int iter = 0; iter < 300; ++iter) {
        const Market m = oracle::random_market(stream, 2, 12, 8);
        const OptimalTrade full = optimal_trade(m);
        const OptimalTrade lean = optimal_trade_size(m);
        REQUIRE(lean.k == full.k);
        REQUIRE(lean.max_gft == full.max_gft);
        REQUIRE(lean.equilibrium_interval.low == full.equilibrium_interval.low);
        REQUIRE(lean.equilibrium_interval.high == full.equilibrium_interval.high);
        REQUIRE(lean.efficient_buyers.empty());
    }
}

TEST_CASE("optimal trade of a one-sided or empty market is zero") {
    REQUIRE(optimal_trade(Market({trader("b", Side::Buyer, {9})}, 1)).k == 0);
    REQUIRE(optimal_trade(Market({}, 1)).max_gft == Money{});
}

TEST_CASE("virtual unit order breaks ties deterministically") {
    // equal values: sellers come before buyers, then lexicographic id
    const VirtualUnit seller{Money::units(5), Side::Seller, "zed", 0};
    const VirtualUnit buyer{Money::units(5), Side::Buyer, "abe", 0};
    REQUIRE(virtual_unit_less(seller, buyer));
    const VirtualUnit a{Money::units(5), Side::Buyer, "abe", 0};
    const VirtualUnit b{Money::units(5), Side::Buyer, "ben", 0};
    REQUIRE(virtual_unit_less(a, b));
    const VirtualUnit u0{Money::units(5), Side::Buyer, "abe", 0};
    const VirtualUnit u1{Money::units(5), Side::Buyer, "abe", 1};
    REQUIRE(virtual_unit_less(u0, u1));
}

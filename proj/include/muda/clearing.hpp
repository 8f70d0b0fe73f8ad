#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "muda/money.hpp"
#include "muda/valuation.hpp"

namespace muda {

/// One marginal unit of one trader, viewed as a single-unit trader.
struct VirtualUnit {
    Money value;
    Side side;
    std::string_view trader_id;
    std::int64_t unit_index;  // position in the trader's non-increasing marginal list
};

/// Strict total order on virtual units: by value, then seller before buyer,
/// then trader id, then unit index. Breaking value ties through this order
/// keeps matching and winner selection deterministic when marginals collide.
inline bool virtual_unit_less(const VirtualUnit& a, const VirtualUnit& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.side != b.side) return a.side == Side::Seller;
    if (a.trader_id != b.trader_id) return a.trader_id < b.trader_id;
    return a.unit_index < b.unit_index;
}

inline std::vector<VirtualUnit> virtual_units(const Market& market, Side side) {
    std::vector<VirtualUnit> units;
    for (const Trader& t : market.traders()) {
        if (t.side != side) continue;
        const auto marginals = t.valuation.marginals();
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(marginals.size()); ++i) {
            units.push_back({marginals[static_cast<std::size_t>(i)], side, t.id, i});
        }
    }
    return units;
}

/// Sum of buyer demands at the price.
inline std::int64_t aggregate_demand(const Market& market, Money price) {
    std::int64_t total = 0;
    for (const Trader& t : market.traders()) {
        if (t.side == Side::Buyer) total += demand(t, price);
    }
    return total;
}

/// Sum of seller supplies at the price.
inline std::int64_t aggregate_supply(const Market& market, Money price) {
    std::int64_t total = 0;
    for (const Trader& t : market.traders()) {
        if (t.side == Side::Seller) total += supply(t, price);
    }
    return total;
}

/// One side's aggregate quantity as a step function of price.
///
/// Demand steps down as the price rises past a buyer marginal and is
/// right-continuous (at a breakpoint the unit no longer trades); supply steps
/// up just after the price passes a seller marginal and is left-continuous.
/// Each step stores the quantity that holds once the price has crossed the
/// breakpoint moving upward.
struct AggregateCurve {
    Side side;
    std::int64_t base = 0;  // quantity below the lowest breakpoint
    std::vector<std::pair<Money, std::int64_t>> steps;  // ascending by price

    std::int64_t quantity_at(Money price) const {
        // Demand: last step with price <= p. Supply: last step with price < p.
        auto cmp = [](const std::pair<Money, std::int64_t>& s, Money p) { return s.first < p; };
        auto it = side == Side::Buyer
                      ? std::upper_bound(steps.begin(), steps.end(), price,
                                         [](Money p, const auto& s) { return p < s.first; })
                      : std::lower_bound(steps.begin(), steps.end(), price, cmp);
        if (it == steps.begin()) return base;
        return std::prev(it)->second;
    }
};

inline AggregateCurve aggregate_curve(const Market& market, Side side) {
    std::vector<Money> values;
    for (const Trader& t : market.traders()) {
        if (t.side != side) continue;
        const auto m = t.valuation.marginals();
        values.insert(values.end(), m.begin(), m.end());
    }
    std::sort(values.begin(), values.end());

    AggregateCurve curve;
    curve.side = side;
    const auto total = static_cast<std::int64_t>(values.size());
    curve.base = side == Side::Buyer ? total : 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;  // last of a tie run
        const Money w = values[i];
        const std::int64_t count_at_most = static_cast<std::int64_t>(i) + 1;
        // After the price crosses w: demand keeps only marginals above w,
        // supply has gained every marginal at or below w.
        curve.steps.emplace_back(w, side == Side::Buyer ? total - count_at_most : count_at_most);
    }
    return curve;
}

/// Price interval; a missing bound means the region extends without limit.
struct PriceInterval {
    std::optional<Money> low;
    std::optional<Money> high;
};

struct Equilibrium {
    Money price{};
    PriceInterval interval;
    std::int64_t quantity = 0;  // units that trade at `price`
};

/// Finds the maximal price region where aggregate demand equals aggregate
/// supply, by scanning the regions delimited by the sorted marginal values
/// (excess demand is non-increasing across them and constant inside each).
/// Returns the region's midpoint as the price, rounded down to the atomic
/// grid.
///
/// Degenerate cases keep this total:
///  - no equal-quantity region (value ties can make excess skip zero):
///    the breakpoint where excess changes sign, as a single-point interval;
///  - region unbounded above (e.g. no sellers): price = low + one atomic unit;
///  - region unbounded below (e.g. no buyers): price = max(0, high - one unit);
///  - empty market: price 0.
/// The core works on pre-sorted (ascending) value vectors so callers that
/// already hold them avoid a second sort.
namespace detail {

inline Equilibrium equilibrium_from_sorted(const std::vector<Money>& buyer_vals,
                                           const std::vector<Money>& seller_vals) {
    const auto buyers_above = [&](Money x) -> std::int64_t {
        return buyer_vals.end() - std::upper_bound(buyer_vals.begin(), buyer_vals.end(), x);
    };
    const auto sellers_below = [&](Money x) -> std::int64_t {
        return std::lower_bound(seller_vals.begin(), seller_vals.end(), x) - seller_vals.begin();
    };
    const auto sellers_at_most = [&](Money x) -> std::int64_t {
        return std::upper_bound(seller_vals.begin(), seller_vals.end(), x) - seller_vals.begin();
    };

    std::vector<Money> breaks;
    breaks.reserve(buyer_vals.size() + seller_vals.size());
    std::merge(buyer_vals.begin(), buyer_vals.end(), seller_vals.begin(), seller_vals.end(),
               std::back_inserter(breaks));
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const std::int64_t m = static_cast<std::int64_t>(breaks.size());

    // Region r over the price axis, in increasing order:
    //   r = 0        : below the lowest breakpoint
    //   r = 2i + 1   : exactly at breaks[i]
    //   r = 2i + 2   : strictly between breaks[i] and breaks[i + 1]
    //                  (the last one extends above the highest breakpoint)
    const std::int64_t num_regions = 2 * m + 1;
    const auto demand_in = [&](std::int64_t r) -> std::int64_t {
        if (r == 0) return static_cast<std::int64_t>(buyer_vals.size());
        // Demand is right-continuous: at breaks[i] it already equals the
        // value it keeps on the open region above.
        const std::int64_t i = (r - 1) / 2;
        return buyers_above(breaks[static_cast<std::size_t>(i)]);
    };
    const auto supply_in = [&](std::int64_t r) -> std::int64_t {
        if (r == 0) return 0;
        const std::int64_t i = (r - 1) / 2;
        const Money w = breaks[static_cast<std::size_t>(i)];
        // Supply is left-continuous: at breaks[i] the unit valued w has not
        // joined yet; it joins on the open region above.
        return (r % 2 == 1) ? sellers_below(w) : sellers_at_most(w);
    };

    std::int64_t first_zero = -1;
    std::int64_t last_zero = -1;
    std::int64_t first_negative = -1;
    std::int64_t zero_quantity = 0;
    for (std::int64_t r = 0; r < num_regions; ++r) {
        const std::int64_t excess = demand_in(r) - supply_in(r);
        if (excess == 0) {
            if (first_zero < 0) {
                first_zero = r;
                zero_quantity = demand_in(r);
            }
            last_zero = r;
        } else if (excess < 0 && first_negative < 0) {
            first_negative = r;
        }
    }

    Equilibrium eq;
    if (first_zero < 0) {
        // Excess jumps straight from positive to negative; both jumps happen
        // around a breakpoint, so the sign change pins down one price.
        const std::int64_t r = first_negative;
        const std::int64_t i = (r - 1) / 2;
        const Money w = breaks[static_cast<std::size_t>(i)];
        eq.price = w;
        eq.interval = {w, w};
        eq.quantity = std::min(buyers_above(w), sellers_below(w));
        return eq;
    }

    if (first_zero > 0) {
        const std::int64_t i = (first_zero - 1) / 2;
        eq.interval.low = breaks[static_cast<std::size_t>(i)];
    }
    if (last_zero < num_regions - 1) {
        // Right edge of the last zero region: its own breakpoint when the
        // region sits at one, otherwise the breakpoint just above it.
        const std::int64_t i = (last_zero % 2 == 1) ? (last_zero - 1) / 2 : last_zero / 2;
        eq.interval.high = breaks[static_cast<std::size_t>(i)];
    }
    eq.quantity = zero_quantity;

    if (eq.interval.low && eq.interval.high) {
        eq.price = midpoint(*eq.interval.low, *eq.interval.high);
    } else if (eq.interval.low) {
        eq.price = *eq.interval.low + kMoneyEpsilon;
    } else if (eq.interval.high) {
        eq.price = std::max(Money{}, *eq.interval.high - kMoneyEpsilon);
    } else {
        eq.price = Money{};
    }
    return eq;
}

inline void collect_sorted_values(const Market& market, std::vector<Money>& buyer_vals,
                                  std::vector<Money>& seller_vals) {
    for (const Trader& t : market.traders()) {
        const auto m = t.valuation.marginals();
        auto& dst = t.side == Side::Buyer ? buyer_vals : seller_vals;
        dst.insert(dst.end(), m.begin(), m.end());
    }
    std::sort(buyer_vals.begin(), buyer_vals.end());
    std::sort(seller_vals.begin(), seller_vals.end());
}

}  // namespace detail

inline Equilibrium equilibrium_price(const Market& market) {
    std::vector<Money> buyer_vals;
    std::vector<Money> seller_vals;
    detail::collect_sorted_values(market, buyer_vals, seller_vals);
    return detail::equilibrium_from_sorted(buyer_vals, seller_vals);
}

/// The best materially-balanced trade and its size.
struct OptimalTrade {
    std::int64_t k = 0;   // units traded at the optimum
    Money max_gft{};      // total gain those trades produce
    PriceInterval equilibrium_interval;
    std::vector<std::pair<std::string, std::int64_t>> efficient_buyers;   // (trader id, unit index)
    std::vector<std::pair<std::string, std::int64_t>> efficient_sellers;
};

/// Maximum gain-from-trade without the per-unit lists: match the highest
/// buyer marginals with the lowest seller marginals while each pair still
/// gains. Equivalent to clearing the whole market at any equilibrium price.
/// efficient_buyers / efficient_sellers stay empty; use optimal_trade for
/// them.
inline OptimalTrade optimal_trade_size(const Market& market) {
    std::vector<Money> buyer_vals;
    std::vector<Money> seller_vals;
    detail::collect_sorted_values(market, buyer_vals, seller_vals);

    OptimalTrade best;
    const std::size_t limit = std::min(buyer_vals.size(), seller_vals.size());
    for (std::size_t i = 0; i < limit; ++i) {
        const Money b = buyer_vals[buyer_vals.size() - 1 - i];
        const Money s = seller_vals[i];
        if (!(b > s)) break;
        best.k += 1;
        best.max_gft += b - s;
    }
    best.equilibrium_interval =
        detail::equilibrium_from_sorted(buyer_vals, seller_vals).interval;
    return best;
}

/// optimal_trade_size plus the efficient units themselves, listed in match
/// order (buyers by descending value, sellers by ascending value, ties by
/// the strict total order).
inline OptimalTrade optimal_trade(const Market& market) {
    std::vector<VirtualUnit> buyers = virtual_units(market, Side::Buyer);
    std::vector<VirtualUnit> sellers = virtual_units(market, Side::Seller);
    std::sort(buyers.begin(), buyers.end(),
              [](const VirtualUnit& a, const VirtualUnit& b) { return virtual_unit_less(b, a); });
    std::sort(sellers.begin(), sellers.end(), virtual_unit_less);

    OptimalTrade best;
    const std::size_t limit = std::min(buyers.size(), sellers.size());
    for (std::size_t i = 0; i < limit; ++i) {
        if (!(buyers[i].value > sellers[i].value)) break;
        best.k += 1;
        best.max_gft += buyers[i].value - sellers[i].value;
        best.efficient_buyers.emplace_back(std::string(buyers[i].trader_id), buyers[i].unit_index);
        best.efficient_sellers.emplace_back(std::string(sellers[i].trader_id),
                                            sellers[i].unit_index);
    }
    best.equilibrium_interval = equilibrium_price(market).interval;
    return best;
}

}  // namespace muda

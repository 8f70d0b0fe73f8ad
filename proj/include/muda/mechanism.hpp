#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "muda/clearing.hpp"
#include "muda/money.hpp"
#include "muda/rng.hpp"
#include "muda/valuation.hpp"

namespace muda {

enum class Variant { Lottery, Vickrey };

inline const char* to_string(Variant v) { return v == Variant::Lottery ? "lottery" : "vickrey"; }

enum class SideTag { Left, Right };

inline const char* to_string(SideTag s) { return s == SideTag::Left ? "left" : "right"; }

enum class LongSide { Buyers, Sellers, Balanced };

inline const char* to_string(LongSide s) {
    switch (s) {
        case LongSide::Buyers: return "buyers";
        case LongSide::Sellers: return "sellers";
        default: return "balanced";
    }
}

/// Which half each trader was sent to, and the seed that decided it.
struct SplitAssignment {
    std::uint64_t rng_seed = 0;
    std::map<std::string, SideTag> sides;
};

struct SplitResult {
    Market left;
    Market right;
    SplitAssignment assignment;
};

/// Sends every trader to the left or right half by an independent fair coin.
/// Deterministic given (market, seed); both halves keep the unit cap.
inline SplitResult split_market(const Market& market, std::uint64_t seed) {
    rng::Stream coin(rng::derive_seed(seed, "split"));
    std::vector<Trader> left;
    std::vector<Trader> right;
    SplitAssignment assignment;
    assignment.rng_seed = seed;
    for (const Trader& t : market.traders()) {
        const SideTag tag = coin.coin() ? SideTag::Left : SideTag::Right;
        assignment.sides.emplace(t.id, tag);
        (tag == SideTag::Left ? left : right).push_back(t);
    }
    return {Market(std::move(left), market.max_units()),
            Market(std::move(right), market.max_units()), std::move(assignment)};
}

/// Per-trader result within one half-market.
struct TradeResult {
    Side side = Side::Buyer;
    std::int64_t units = 0;
    Money payment{};  // positive = pays, negative = receives
    Money fee{};      // paid to the market-maker; zero outside Vickrey
    Money gain{};     // gain at the cross price, before the fee
};

/// One half-market's outcome at its posted (cross) price.
struct SideOutcome {
    Money cross_price{};
    LongSide long_side = LongSide::Balanced;
    std::map<std::string, TradeResult> traders;

    Money total_gain() const {
        Money sum{};
        for (const auto& [id, r] : traders) sum += r.gain;
        return sum;
    }
    Money gain_of(Side side) const {
        Money sum{};
        for (const auto& [id, r] : traders) {
            if (r.side == side) sum += r.gain;
        }
        return sum;
    }
    Money total_fees() const {
        Money sum{};
        for (const auto& [id, r] : traders) sum += r.fee;
        return sum;
    }
    Money payments_sum() const {
        Money sum{};
        for (const auto& [id, r] : traders) sum += r.payment;
        return sum;
    }
    std::int64_t units_traded(Side side) const {
        std::int64_t sum = 0;
        for (const auto& [id, r] : traders) {
            if (r.side == side) sum += r.units;
        }
        return sum;
    }
};

namespace detail {

inline void record_trade(SideOutcome& out, const Trader& t, std::int64_t units, Money price) {
    TradeResult& r = out.traders[t.id];
    r.side = t.side;
    r.units = units;
    r.payment = (t.side == Side::Buyer) ? units * price : -(units * price);
    r.gain = gain(t, units, price);
}

}  // namespace detail

/// Posted-price trade with a random serial order on the long side.
///
/// Short-side traders always trade their optimum at the cross price. When
/// supply exceeds demand, buyers pay up front for their demanded units and
/// the sellers, in a uniformly random order, each sell as much as they like
/// until that money runs out; at most one seller ends up partially filled.
/// Excess demand is the mirror image. No fees are charged.
inline SideOutcome resolve_side_lottery(const Market& side, Money cross_price,
                                        std::uint64_t perm_seed) {
    SideOutcome out;
    out.cross_price = cross_price;
    for (const Trader& t : side.traders()) {
        detail::record_trade(out, t, 0, cross_price);
    }

    const std::int64_t total_demand = aggregate_demand(side, cross_price);
    const std::int64_t total_supply = aggregate_supply(side, cross_price);

    if (total_demand == total_supply) {
        out.long_side = LongSide::Balanced;
        for (const Trader& t : side.traders()) {
            const std::int64_t units =
                t.side == Side::Buyer ? demand(t, cross_price) : supply(t, cross_price);
            detail::record_trade(out, t, units, cross_price);
        }
        return out;
    }

    const Side long_side = total_supply > total_demand ? Side::Seller : Side::Buyer;
    out.long_side = long_side == Side::Seller ? LongSide::Sellers : LongSide::Buyers;
    std::int64_t remaining = std::min(total_demand, total_supply);

    std::vector<const Trader*> long_traders;
    for (const Trader& t : side.traders()) {
        if (t.side == long_side) {
            long_traders.push_back(&t);
        } else {
            const std::int64_t units =
                t.side == Side::Buyer ? demand(t, cross_price) : supply(t, cross_price);
            detail::record_trade(out, t, units, cross_price);
        }
    }

    rng::Stream perm(perm_seed);
    perm.shuffle(long_traders);
    for (const Trader* t : long_traders) {
        const std::int64_t wanted =
            t->side == Side::Buyer ? demand(*t, cross_price) : supply(*t, cross_price);
        const std::int64_t units = std::min(wanted, remaining);
        remaining -= units;
        detail::record_trade(out, *t, units, cross_price);
    }
    return out;
}

namespace detail {

/// One willing virtual unit of the long side, reduced to integers so the
/// ranking sort stays cheap on huge markets. `ordinal` is the trader's rank
/// by id, so (value, ordinal, index) orders exactly like the strict total
/// order restricted to one side.
struct RankedUnit {
    std::int64_t value;  // atomic
    std::int32_t ordinal;
    std::int64_t index;

    friend bool operator<(const RankedUnit& a, const RankedUnit& b) {
        if (a.value != b.value) return a.value < b.value;
        if (a.ordinal != b.ordinal) return a.ordinal < b.ordinal;
        return a.index < b.index;
    }
};

/// Winner selection and crowd-out fees for the Vickrey long side.
///
/// `ranked` holds the willing virtual units of the long side, best first
/// (cheapest sellers / highest-value buyers). The first `capacity` of them
/// trade. A trader's fee is the gain of the units that would have traded had
/// all of that trader's willing units been absent: walk the non-selected
/// tail, and for each of the trader's own selected units charge the gain of
/// the next unit belonging to somebody else.
inline void vickrey_long_side(const std::vector<RankedUnit>& ranked, std::int64_t capacity,
                              Money price, SideOutcome& out,
                              const std::vector<const Trader*>& by_ordinal) {
    const std::size_t take =
        std::min<std::size_t>(static_cast<std::size_t>(capacity), ranked.size());
    std::vector<std::int64_t> selected(by_ordinal.size(), 0);
    for (std::size_t i = 0; i < take; ++i) {
        selected[static_cast<std::size_t>(ranked[i].ordinal)] += 1;
    }
    for (std::size_t ord = 0; ord < by_ordinal.size(); ++ord) {
        const std::int64_t units = selected[ord];
        if (units == 0) continue;
        const Trader& trader = *by_ordinal[ord];
        record_trade(out, trader, units, price);

        Money fee{};
        std::int64_t collected = 0;
        for (std::size_t i = take; i < ranked.size() && collected < units; ++i) {
            if (ranked[i].ordinal == static_cast<std::int32_t>(ord)) continue;
            const Money value = Money::from_atomic(ranked[i].value);
            fee += trader.side == Side::Seller ? price - value : value - price;
            ++collected;
        }
        out.traders[trader.id].fee = fee;
    }
}

}  // namespace detail

/// Posted-price trade that resolves the long side like a multi-unit Vickrey
/// auction with the cross price as reserve: the most valuable willing virtual
/// units trade, and each trader pays the market-maker the gain of the units
/// its presence crowded out.
inline SideOutcome resolve_side_vickrey(const Market& side, Money cross_price) {
    SideOutcome out;
    out.cross_price = cross_price;
    for (const Trader& t : side.traders()) {
        detail::record_trade(out, t, 0, cross_price);
    }

    const std::int64_t total_demand = aggregate_demand(side, cross_price);
    const std::int64_t total_supply = aggregate_supply(side, cross_price);

    if (total_demand == total_supply) {
        out.long_side = LongSide::Balanced;
        for (const Trader& t : side.traders()) {
            const std::int64_t units =
                t.side == Side::Buyer ? demand(t, cross_price) : supply(t, cross_price);
            detail::record_trade(out, t, units, cross_price);
        }
        return out;
    }

    const Side long_side = total_supply > total_demand ? Side::Seller : Side::Buyer;
    out.long_side = long_side == Side::Seller ? LongSide::Sellers : LongSide::Buyers;

    std::map<std::string_view, const Trader*> by_id;
    for (const Trader& t : side.traders()) {
        if (t.side == long_side) {
            by_id.emplace(t.id, &t);
        } else {
            const std::int64_t units =
                t.side == Side::Buyer ? demand(t, cross_price) : supply(t, cross_price);
            detail::record_trade(out, t, units, cross_price);
        }
    }
    std::vector<const Trader*> by_ordinal;
    by_ordinal.reserve(by_id.size());
    for (const auto& [id, trader] : by_id) by_ordinal.push_back(trader);

    // Willing units of the long side, ranked best first under the strict
    // total order (ties never stall the ranking).
    std::vector<detail::RankedUnit> ranked;
    for (std::size_t ord = 0; ord < by_ordinal.size(); ++ord) {
        const auto marginals = by_ordinal[ord]->valuation.marginals();
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(marginals.size()); ++i) {
            const Money v = marginals[static_cast<std::size_t>(i)];
            const bool willing = long_side == Side::Seller ? v < cross_price : v > cross_price;
            if (willing) ranked.push_back({v.atomic(), static_cast<std::int32_t>(ord), i});
        }
    }
    if (long_side == Side::Seller) {
        std::sort(ranked.begin(), ranked.end());
    } else {
        std::sort(ranked.begin(), ranked.end(),
                  [](const detail::RankedUnit& a, const detail::RankedUnit& b) { return b < a; });
    }

    detail::vickrey_long_side(ranked, std::min(total_demand, total_supply), cross_price, out,
                              by_ordinal);
    return out;
}

/// Full mechanism outcome: the split, both half-market results, gain totals
/// and the whole-market optimum they are measured against.
struct MudaOutcome {
    Variant variant = Variant::Lottery;
    std::uint64_t seed = 0;
    SplitAssignment split;
    Money left_price{};   // equilibrium price of the left half (posted on the right)
    Money right_price{};  // equilibrium price of the right half (posted on the left)
    SideOutcome left;
    SideOutcome right;
    Money total_gft{};
    Money agents_gft{};
    Money market_maker_revenue{};
    OptimalTrade benchmark;
};

namespace detail {

inline MudaOutcome resolve_split(Variant variant, std::uint64_t seed, const SplitResult& split,
                                 Money left_price, Money right_price,
                                 const OptimalTrade& benchmark) {
    MudaOutcome outcome;
    outcome.variant = variant;
    outcome.seed = seed;
    outcome.split = split.assignment;
    outcome.left_price = left_price;
    outcome.right_price = right_price;

    if (variant == Variant::Lottery) {
        outcome.left =
            resolve_side_lottery(split.left, right_price, rng::derive_seed(seed, "perm", 0));
        outcome.right =
            resolve_side_lottery(split.right, left_price, rng::derive_seed(seed, "perm", 1));
    } else {
        outcome.left = resolve_side_vickrey(split.left, right_price);
        outcome.right = resolve_side_vickrey(split.right, left_price);
    }

    outcome.total_gft = outcome.left.total_gain() + outcome.right.total_gain();
    outcome.market_maker_revenue = outcome.left.total_fees() + outcome.right.total_fees();
    outcome.agents_gft = outcome.total_gft - outcome.market_maker_revenue;
    outcome.benchmark = benchmark;
    return outcome;
}

}  // namespace detail

/// Runs the full mechanism: split the market in half at random, compute each
/// half's equilibrium price, let each half trade at the other half's price,
/// and resolve the long sides per the chosen variant. Pure function of
/// (market, variant, seed). The overload taking a benchmark skips the
/// whole-market optimum recomputation.
inline MudaOutcome run_muda(const Market& market, Variant variant, std::uint64_t seed,
                            const OptimalTrade& benchmark) {
    const SplitResult split = split_market(market, seed);
    const Money left_price = equilibrium_price(split.left).price;
    const Money right_price = equilibrium_price(split.right).price;
    return detail::resolve_split(variant, seed, split, left_price, right_price, benchmark);
}

inline MudaOutcome run_muda(const Market& market, Variant variant, std::uint64_t seed) {
    return run_muda(market, variant, seed, optimal_trade(market));
}

/// Both variants on the identical split and prices (the paired-seed form the
/// experiments use). Each element equals the corresponding run_muda result.
inline std::pair<MudaOutcome, MudaOutcome> run_muda_both(const Market& market, std::uint64_t seed,
                                                         const OptimalTrade& benchmark) {
    const SplitResult split = split_market(market, seed);
    const Money left_price = equilibrium_price(split.left).price;
    const Money right_price = equilibrium_price(split.right).price;
    return {detail::resolve_split(Variant::Lottery, seed, split, left_price, right_price,
                                  benchmark),
            detail::resolve_split(Variant::Vickrey, seed, split, left_price, right_price,
                                  benchmark)};
}

}  // namespace muda

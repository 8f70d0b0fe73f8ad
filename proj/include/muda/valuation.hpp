#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "muda/errors.hpp"
#include "muda/money.hpp"

namespace muda {

enum class Side { Buyer, Seller };

inline const char* to_string(Side s) { return s == Side::Buyer ? "buyer" : "seller"; }

/// Multi-unit valuation with decreasing marginal returns.
///
/// Stored as the sequence of marginal values, sorted non-increasing; the
/// cumulative value of owning t units is the sum of the first t marginals.
/// Each marginal acts as one single-unit virtual trader.
class Valuation {
public:
    /// Builds from marginal values. Input is sorted into non-increasing
    /// order, so any multiset of marginals yields a valid valuation.
    explicit Valuation(std::vector<Money> marginals) : marginals_(std::move(marginals)) {
        if (marginals_.empty()) {
            throw EmptyValuation("valuation needs at least one unit");
        }
        std::sort(marginals_.begin(), marginals_.end(), std::greater<>());
        build_prefix();
    }

    /// Builds from cumulative values v(1)..v(L), with v(0) = 0 implied.
    /// Rejects sequences whose marginals increase anywhere.
    static Valuation from_cumulative(const std::vector<Money>& values) {
        if (values.empty()) {
            throw EmptyValuation("cumulative value sequence is empty");
        }
        std::vector<Money> marginals;
        marginals.reserve(values.size());
        Money prev{};
        for (const Money v : values) {
            marginals.push_back(v - prev);
            prev = v;
        }
        for (std::size_t i = 1; i < marginals.size(); ++i) {
            if (marginals[i] > marginals[i - 1]) {
                throw DmrViolation("marginal value increases at unit " + std::to_string(i + 1));
            }
        }
        return Valuation(std::move(marginals));
    }

    std::span<const Money> marginals() const { return marginals_; }

    /// Number of units this valuation covers (L).
    std::int64_t units() const { return static_cast<std::int64_t>(marginals_.size()); }

    /// Cumulative value of owning t units; v(0) = 0.
    Money cumulative(std::int64_t t) const {
        check_units(t);
        return prefix_[static_cast<std::size_t>(t)];
    }

    /// Sum of the t largest marginals (equals cumulative(t)).
    Money sum_top(std::int64_t t) const { return cumulative(t); }

    /// Sum of the t smallest marginals: what a seller gives up by parting
    /// with t units.
    Money sum_bottom(std::int64_t t) const {
        check_units(t);
        return prefix_.back() - prefix_[marginals_.size() - static_cast<std::size_t>(t)];
    }

    /// Count of marginals strictly above the price.
    std::int64_t count_above(Money price) const {
        auto it = std::lower_bound(marginals_.begin(), marginals_.end(), price, std::greater<>());
        return it - marginals_.begin();
    }

    /// Count of marginals strictly below the price.
    std::int64_t count_below(Money price) const {
        auto it = std::upper_bound(marginals_.begin(), marginals_.end(), price, std::greater<>());
        return marginals_.end() - it;
    }

    friend bool operator==(const Valuation&, const Valuation&) = default;

private:
    void check_units(std::int64_t t) const {
        if (t < 0 || t > units()) {
            throw UnitsOutOfRange("unit count " + std::to_string(t) + " outside [0, " +
                                  std::to_string(units()) + "]");
        }
    }

    void build_prefix() {
        prefix_.resize(marginals_.size() + 1);
        prefix_[0] = Money{};
        for (std::size_t i = 0; i < marginals_.size(); ++i) {
            prefix_[i + 1] = prefix_[i] + marginals_[i];
        }
    }

    std::vector<Money> marginals_;
    std::vector<Money> prefix_;
};

struct Trader {
    std::string id;
    Side side;
    Valuation valuation;

    /// Sellers start out holding exactly as many units as they value.
    std::int64_t endowment() const { return valuation.units(); }
};

/// Units a buyer wants at the given price: every marginal strictly above it.
/// A marginal exactly equal to the price is indifferent and counts as not
/// demanded. Under decreasing marginal returns this count maximizes the
/// buyer's gain over all feasible unit counts.
inline std::int64_t demand(const Trader& trader, Money price) {
    if (trader.side != Side::Buyer) {
        throw Error("demand() requires a buyer, got seller '" + trader.id + "'");
    }
    return trader.valuation.count_above(price);
}

/// Units a seller wants to sell at the given price: every marginal strictly
/// below it. Mirror of demand().
inline std::int64_t supply(const Trader& trader, Money price) {
    if (trader.side != Side::Seller) {
        throw Error("supply() requires a seller, got buyer '" + trader.id + "'");
    }
    return trader.valuation.count_below(price);
}

/// Gain from trading `units` at `price`: buyers get value minus payment,
/// sellers get revenue minus the value of the units they part with (their
/// `units` cheapest ones).
inline Money gain(const Trader& trader, std::int64_t units, Money price) {
    if (trader.side == Side::Buyer) {
        return trader.valuation.cumulative(units) - units * price;
    }
    return units * price - trader.valuation.sum_bottom(units);
}

/// A single-good market: traders plus the global per-trader unit cap.
class Market {
public:
    Market(std::vector<Trader> traders, std::int64_t max_units)
        : traders_(std::move(traders)), max_units_(max_units) {
        if (max_units_ <= 0) {
            throw InvalidMarket("max_units must be positive");
        }
        std::unordered_set<std::string_view> seen;
        for (const Trader& t : traders_) {
            if (!seen.insert(t.id).second) {
                throw InvalidMarket("duplicate trader id '" + t.id + "'");
            }
            if (t.valuation.units() > max_units_) {
                throw InvalidMarket("trader '" + t.id + "' values " +
                                    std::to_string(t.valuation.units()) +
                                    " units, above the cap of " + std::to_string(max_units_));
            }
        }
    }

    std::span<const Trader> traders() const { return traders_; }
    std::int64_t max_units() const { return max_units_; }
    bool empty() const { return traders_.empty(); }

    const Trader* find(std::string_view id) const {
        for (const Trader& t : traders_) {
            if (t.id == id) return &t;
        }
        return nullptr;
    }

    /// Copy of this market with one trader's valuation replaced; the fuzzer
    /// uses this to splice in misreports.
    Market with_valuation(std::string_view id, Valuation reported) const {
        std::vector<Trader> traders(traders_.begin(), traders_.end());
        for (Trader& t : traders) {
            if (t.id == id) {
                t.valuation = std::move(reported);
                return Market(std::move(traders), max_units_);
            }
        }
        throw Error("no trader with id '" + std::string(id) + "'");
    }

private:
    std::vector<Trader> traders_;
    std::int64_t max_units_;
};

}  // namespace muda

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "muda/clearing.hpp"
#include "muda/errors.hpp"
#include "muda/mechanism.hpp"
#include "muda/money.hpp"
#include "muda/rng.hpp"
#include "muda/valuation.hpp"

namespace muda {

/// Parameters of the synthetic uniform-valuation market generator.
///
/// Each of `num_traders` traders draws `group_count` values uniformly from
/// [center - amplitude, center + amplitude] (on the atomic grid) and holds
/// each value as the marginal value of `group_size` consecutive units, so a
/// trader owns group_count * group_size marginal units. Sides are assigned
/// by a fair coin.
struct UniformSpec {
    std::int64_t num_traders = 0;
    std::int64_t group_count = 1;
    std::int64_t group_size = 1;
    Money center{};
    Money amplitude{};
    std::int64_t max_units = 1;
    std::int64_t repetitions = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_traders < 0) throw InvalidSpec("num_traders must be non-negative");
        if (group_count < 1) throw InvalidSpec("group_count must be positive");
        if (group_size < 1) throw InvalidSpec("group_size must be positive");
        if (max_units < 1) throw InvalidSpec("max_units must be positive");
        if (group_count * group_size > max_units) {
            throw InvalidSpec("group_count * group_size exceeds max_units");
        }
        if (amplitude < Money{}) throw InvalidSpec("amplitude must be non-negative");
        if (!(amplitude < center)) throw InvalidSpec("amplitude must be below center");
        if (repetitions < 1) throw InvalidSpec("repetitions must be positive");
    }
};

/// Draws one market from the spec. Trader ids are t0, t1, ...; deterministic
/// in (spec, spec.seed).
inline Market generate_uniform_market(const UniformSpec& spec) {
    spec.validate();
    rng::Stream stream(rng::derive_seed(spec.seed, "uniform"));
    const std::int64_t lo = (spec.center - spec.amplitude).atomic();
    const std::int64_t hi = (spec.center + spec.amplitude).atomic();

    std::vector<Trader> traders;
    traders.reserve(static_cast<std::size_t>(spec.num_traders));
    for (std::int64_t i = 0; i < spec.num_traders; ++i) {
        const Side side = stream.coin() ? Side::Buyer : Side::Seller;
        std::vector<Money> marginals;
        marginals.reserve(static_cast<std::size_t>(spec.group_count * spec.group_size));
        for (std::int64_t g = 0; g < spec.group_count; ++g) {
            const Money value = Money::from_atomic(stream.range(lo, hi));
            for (std::int64_t r = 0; r < spec.group_size; ++r) marginals.push_back(value);
        }
        traders.push_back({"t" + std::to_string(i), side, Valuation(std::move(marginals))});
    }
    return Market(std::move(traders), spec.max_units);
}

/// One order-book row: (symbol, date, order_date, side, price, quantity).
struct OrderRecord {
    std::string symbol;
    std::string date;
    std::string order_date;
    Side side;
    Money price{};
    std::int64_t quantity = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

inline std::string strip(std::string text) {
    while (!text.empty() && (text.back() == '\r' || text.back() == ' ' || text.back() == '\t')) {
        text.pop_back();
    }
    std::size_t start = 0;
    while (start < text.size() && (text[start] == ' ' || text[start] == '\t')) ++start;
    return text.substr(start);
}

}  // namespace detail

inline constexpr const char* kOrderbookHeader = "symbol,date,order_date,side,price,quantity";

/// Reads order records from CSV. The header line is required; side is BUY or
/// SELL (any case). Throws ParseError (with the line number) on malformed
/// rows and NonPositiveQuantity on quantity <= 0.
inline std::vector<OrderRecord> parse_orderbook_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty order-book file");
    ++line_no;
    if (detail::strip(line) != kOrderbookHeader) {
        throw ParseError("line 1: expected header \"" + std::string(kOrderbookHeader) + "\"");
    }

    std::vector<OrderRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "line " + std::to_string(line_no);
        if (detail::strip(line).empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(detail::strip(line));
        if (fields.size() != 6) {
            throw ParseError(where + ": expected 6 fields, got " + std::to_string(fields.size()));
        }

        OrderRecord record;
        record.symbol = detail::strip(fields[0]);
        record.date = detail::strip(fields[1]);
        record.order_date = detail::strip(fields[2]);
        if (record.symbol.empty()) throw ParseError(where + ": empty symbol");

        std::string side_text = detail::strip(fields[3]);
        std::transform(side_text.begin(), side_text.end(), side_text.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        if (side_text == "BUY") {
            record.side = Side::Buyer;
        } else if (side_text == "SELL") {
            record.side = Side::Seller;
        } else {
            throw ParseError(where + ": side must be BUY or SELL");
        }

        try {
            std::size_t used = 0;
            const std::string price_text = detail::strip(fields[4]);
            const double price = std::stod(price_text, &used);
            if (used != price_text.size()) throw ParseError("trailing characters");
            record.price = Money::from_double(price);
        } catch (const std::exception& e) {
            throw ParseError(where + ": bad price: " + e.what());
        }
        if (!(record.price > Money{})) throw ParseError(where + ": price must be positive");

        try {
            std::size_t used = 0;
            const std::string qty_text = detail::strip(fields[5]);
            record.quantity = std::stoll(qty_text, &used);
            if (used != qty_text.size()) throw ParseError("trailing characters");
        } catch (const ParseError&) {
            throw ParseError(where + ": bad quantity");
        } catch (const std::exception&) {
            throw ParseError(where + ": bad quantity");
        }
        if (record.quantity <= 0) {
            throw NonPositiveQuantity(where + ": quantity must be positive");
        }
        records.push_back(std::move(record));
    }
    return records;
}

using TraderPool = std::vector<Trader>;

/// Merges records into traders: rows sharing (symbol, date, order_date, side)
/// are one trader whose marginals are the row prices, each repeated
/// `quantity` times, sorted descending (DMR by construction). Returns one
/// pool per symbol holding all of its traders across dates. Insensitive to
/// row order.
inline std::map<std::string, TraderPool> build_pools(const std::vector<OrderRecord>& records) {
    using Key = std::tuple<std::string, std::string, std::string, int>;
    std::map<Key, std::vector<std::pair<Money, std::int64_t>>> groups;
    for (const OrderRecord& r : records) {
        groups[{r.symbol, r.date, r.order_date, r.side == Side::Buyer ? 0 : 1}].push_back(
            {r.price, r.quantity});
    }

    std::map<std::string, TraderPool> pools;
    for (const auto& [key, orders] : groups) {
        const auto& [symbol, date, order_date, side_code] = key;
        const Side side = side_code == 0 ? Side::Buyer : Side::Seller;
        std::vector<Money> marginals;
        for (const auto& [price, quantity] : orders) {
            for (std::int64_t i = 0; i < quantity; ++i) marginals.push_back(price);
        }
        const std::string id =
            date + "|" + order_date + "|" + (side == Side::Buyer ? "B" : "S");
        pools[symbol].push_back({id, side, Valuation(std::move(marginals))});
    }
    return pools;
}

inline std::map<std::string, TraderPool> ingest_orderbook(std::istream& in) {
    return build_pools(parse_orderbook_csv(in));
}

/// Samples `n` distinct traders from the pool (pool order preserved).
inline Market sample_market(const TraderPool& pool, std::int64_t n, rng::Stream& stream) {
    if (n < 1 || static_cast<std::size_t>(n) > pool.size()) {
        throw InvalidSpec("sample size must be between 1 and the pool size");
    }
    std::vector<std::size_t> indices(pool.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) +
            static_cast<std::size_t>(stream.below(indices.size() - static_cast<std::size_t>(i)));
        std::swap(indices[static_cast<std::size_t>(i)], indices[j]);
    }
    indices.resize(static_cast<std::size_t>(n));
    std::sort(indices.begin(), indices.end());

    std::vector<Trader> traders;
    std::int64_t max_units = 1;
    for (std::size_t i : indices) {
        traders.push_back(pool[i]);
        max_units = std::max(max_units, pool[i].valuation.units());
    }
    return Market(std::move(traders), max_units);
}

/// Parameters of the synthetic order-book fixture writer.
struct FixtureSpec {
    std::vector<std::string> symbols = {"AAA", "BBB"};
    std::int64_t traders_per_symbol = 40;
    std::uint64_t seed = 0;
};

/// Writes a synthetic order-book CSV with the empirical record format:
/// around ten orders per merged trader, quantities in [100, 99000] (round
/// lots of 100, spread over three decades the way real order sizes skew
/// small), prices on eighth ticks around a per-symbol level.
inline void write_synthetic_orderbook(std::ostream& out, const FixtureSpec& spec) {
    if (spec.symbols.empty()) throw InvalidSpec("fixture needs at least one symbol");
    if (spec.traders_per_symbol < 1) throw InvalidSpec("traders_per_symbol must be positive");
    rng::Stream stream(rng::derive_seed(spec.seed, "fixture"));
    static const char* kDates[] = {"1991-01-07", "1991-01-08", "1991-01-09", "1991-01-10",
                                   "1991-01-11"};

    out << kOrderbookHeader << "\n";
    std::int64_t symbol_index = 0;
    for (const std::string& symbol : spec.symbols) {
        const Money base = Money::units(200 + 25 * symbol_index);
        ++symbol_index;
        for (std::int64_t t = 0; t < spec.traders_per_symbol; ++t) {
            const char* date = kDates[t % 5];
            const std::int64_t second = 9 * 3600 + 30 * 60 + t;
            char order_date[16];
            std::snprintf(order_date, sizeof order_date, "%02d:%02d:%02d",
                          static_cast<int>(second / 3600), static_cast<int>(second / 60 % 60),
                          static_cast<int>(second % 60));
            const char* side = stream.coin() ? "BUY" : "SELL";
            const std::int64_t orders = 5 + static_cast<std::int64_t>(stream.below(11));
            for (std::int64_t o = 0; o < orders; ++o) {
                const std::int64_t tick = stream.range(-400, 400);
                const Money price = Money::from_atomic(base.atomic() + tick * 1250);
                std::int64_t lots = 1 + static_cast<std::int64_t>(stream.below(9));
                for (std::uint64_t d = stream.below(3); d > 0; --d) lots *= 10;
                const std::int64_t quantity = 100 * lots;
                out << symbol << ',' << date << ',' << order_date << ',' << side << ','
                    << price.str() << ',' << quantity << "\n";
            }
        }
    }
}

/// One sweep point of a competitive-ratio experiment.
struct ExperimentRow {
    std::int64_t x = 0;
    double mean_lottery = 0;
    double sd_lottery = 0;
    double mean_vickrey_total = 0;
    double sd_vickrey_total = 0;
    double mean_vickrey_agents = 0;
    double sd_vickrey_agents = 0;
    std::int64_t reps = 0;
    std::int64_t skipped_zero_gft = 0;
};

namespace detail {

struct RatioSample {
    double lottery = 0;
    double vickrey_total = 0;
    double vickrey_agents = 0;
    bool skipped = false;
};

/// Runs both variants with a paired seed (identical split) and reports each
/// GFT as a fraction of the market optimum. Markets with no positive optimum
/// are marked skipped.
inline RatioSample evaluate_market(const Market& market, std::uint64_t mech_seed) {
    const OptimalTrade best = optimal_trade_size(market);
    if (!(best.max_gft > Money{})) return {0, 0, 0, true};
    const auto [lottery, vickrey] = run_muda_both(market, mech_seed, best);
    const double denom = best.max_gft.to_double();
    return {lottery.total_gft.to_double() / denom, vickrey.total_gft.to_double() / denom,
            vickrey.agents_gft.to_double() / denom, false};
}

/// Runs `jobs` independent tasks across a small worker pool. Results must be
/// written to preallocated slots keyed by job index, so scheduling cannot
/// change the outcome.
template <typename Fn>
inline void parallel_for(std::int64_t jobs, Fn&& fn) {
    if (jobs <= 0) return;
    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        static_cast<unsigned>(std::min<std::int64_t>(jobs, static_cast<std::int64_t>(hardware)));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < jobs; ++i) fn(i);
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= jobs) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Sequentially folds per-repetition samples into a row; slot order is
/// fixed, so the row is independent of how the samples were produced.
inline ExperimentRow reduce_row(std::int64_t x, const std::vector<RatioSample>& slots) {
    ExperimentRow row;
    row.x = x;
    std::vector<double> lottery, vickrey_total, vickrey_agents;
    for (const RatioSample& s : slots) {
        if (s.skipped) {
            ++row.skipped_zero_gft;
            continue;
        }
        lottery.push_back(s.lottery);
        vickrey_total.push_back(s.vickrey_total);
        vickrey_agents.push_back(s.vickrey_agents);
    }
    row.reps = static_cast<std::int64_t>(lottery.size());

    const auto mean = [](const std::vector<double>& xs) {
        if (xs.empty()) return 0.0;
        double sum = 0;
        for (double v : xs) sum += v;
        return sum / static_cast<double>(xs.size());
    };
    const auto sd = [&](const std::vector<double>& xs, double mu) {
        if (xs.size() < 2) return 0.0;
        double sum = 0;
        for (double v : xs) sum += (v - mu) * (v - mu);
        return std::sqrt(sum / static_cast<double>(xs.size() - 1));
    };
    row.mean_lottery = mean(lottery);
    row.sd_lottery = sd(lottery, row.mean_lottery);
    row.mean_vickrey_total = mean(vickrey_total);
    row.sd_vickrey_total = sd(vickrey_total, row.mean_vickrey_total);
    row.mean_vickrey_agents = mean(vickrey_agents);
    row.sd_vickrey_agents = sd(vickrey_agents, row.mean_vickrey_agents);
    return row;
}

}  // namespace detail

/// Sweeps the trader count: one row per n in n_list, spec.repetitions
/// repetitions each. Per repetition the market comes from an independently
/// derived generator seed and both variants run on a paired mechanism seed.
inline std::vector<ExperimentRow> run_uniform_experiment(const UniformSpec& base,
                                                         const std::vector<std::int64_t>& n_list) {
    std::vector<ExperimentRow> rows;
    for (const std::int64_t n : n_list) {
        UniformSpec spec = base;
        spec.num_traders = n;
        spec.validate();
        std::vector<detail::RatioSample> slots(static_cast<std::size_t>(spec.repetitions));
        detail::parallel_for(spec.repetitions, [&](std::int64_t rep) {
            const std::uint64_t rep_seed =
                rng::derive_seed(base.seed, "rep", static_cast<std::uint64_t>(n),
                                 static_cast<std::uint64_t>(rep));
            UniformSpec draw = spec;
            draw.seed = rng::derive_seed(rep_seed, "gen");
            const Market market = generate_uniform_market(draw);
            slots[static_cast<std::size_t>(rep)] =
                detail::evaluate_market(market, rng::derive_seed(rep_seed, "mech"));
        });
        rows.push_back(detail::reduce_row(n, slots));
    }
    return rows;
}

/// Sweeps per-trader units M with the expected units per side held at
/// `total_units`: each row uses n = 2 * total_units / M traders holding M
/// marginal units each (group size from the base spec).
inline std::vector<ExperimentRow> run_concentration_experiment(
    const UniformSpec& base, const std::vector<std::int64_t>& m_list, std::int64_t total_units) {
    if (total_units < 1) throw InvalidSpec("total_units must be positive");
    std::vector<ExperimentRow> rows;
    for (const std::int64_t units : m_list) {
        if (units < 1 || units % base.group_size != 0) {
            throw InvalidSpec("per-trader units must be a positive multiple of group_size");
        }
        if ((2 * total_units) % units != 0 || 2 * total_units / units < 1) {
            throw InvalidSpec("per-trader units must divide 2 * total_units");
        }
        UniformSpec spec = base;
        spec.max_units = units;
        spec.group_count = units / base.group_size;
        spec.num_traders = 2 * total_units / units;
        spec.validate();
        std::vector<detail::RatioSample> slots(static_cast<std::size_t>(spec.repetitions));
        detail::parallel_for(spec.repetitions, [&](std::int64_t rep) {
            const std::uint64_t rep_seed =
                rng::derive_seed(base.seed, "rep", static_cast<std::uint64_t>(units),
                                 static_cast<std::uint64_t>(rep));
            UniformSpec draw = spec;
            draw.seed = rng::derive_seed(rep_seed, "gen");
            const Market market = generate_uniform_market(draw);
            slots[static_cast<std::size_t>(rep)] =
                detail::evaluate_market(market, rng::derive_seed(rep_seed, "mech"));
        });
        rows.push_back(detail::reduce_row(units, slots));
    }
    return rows;
}

/// Sweeps the sample size over empirical pools: per repetition and symbol,
/// samples min(n, pool size) traders from that symbol's pool and evaluates
/// both variants; all (repetition, symbol) samples feed one row per n.
inline std::vector<ExperimentRow> run_orderbook_experiment(
    const std::map<std::string, TraderPool>& pools, const std::vector<std::int64_t>& n_list,
    std::int64_t repetitions, std::uint64_t seed) {
    if (repetitions < 1) throw InvalidSpec("repetitions must be positive");
    if (pools.empty()) throw InvalidSpec("no symbols in the order-book pool");
    std::vector<const TraderPool*> pool_list;
    for (const auto& [symbol, pool] : pools) pool_list.push_back(&pool);
    const std::int64_t num_pools = static_cast<std::int64_t>(pool_list.size());

    std::vector<ExperimentRow> rows;
    for (const std::int64_t n : n_list) {
        if (n < 1) throw InvalidSpec("sample size must be positive");
        const std::int64_t jobs = repetitions * num_pools;
        std::vector<detail::RatioSample> slots(static_cast<std::size_t>(jobs));
        detail::parallel_for(jobs, [&](std::int64_t job) {
            const TraderPool& pool = *pool_list[static_cast<std::size_t>(job % num_pools)];
            const std::uint64_t rep_seed = rng::derive_seed(
                seed, "rep", static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(job));
            rng::Stream sampler(rng::derive_seed(rep_seed, "gen"));
            const std::int64_t take =
                std::min<std::int64_t>(n, static_cast<std::int64_t>(pool.size()));
            const Market market = sample_market(pool, take, sampler);
            slots[static_cast<std::size_t>(job)] =
                detail::evaluate_market(market, rng::derive_seed(rep_seed, "mech"));
        });
        rows.push_back(detail::reduce_row(n, slots));
    }
    return rows;
}

inline std::string format_fixed(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

/// Writes rows as CSV, preceded by `# key=value` comment lines echoing the
/// effective configuration. Deterministic formatting (six decimals).
inline void write_experiment_csv(std::ostream& out,
                                 const std::vector<std::pair<std::string, std::string>>& config,
                                 const std::vector<ExperimentRow>& rows) {
    for (const auto& [key, value] : config) out << "# " << key << "=" << value << "\n";
    out << "x,mean_lottery,sd_lottery,mean_vickrey_total,sd_vickrey_total,"
           "mean_vickrey_agents,sd_vickrey_agents,reps,skipped_zero_gft\n";
    for (const ExperimentRow& row : rows) {
        out << row.x << ',' << format_fixed(row.mean_lottery) << ',' << format_fixed(row.sd_lottery)
            << ',' << format_fixed(row.mean_vickrey_total) << ','
            << format_fixed(row.sd_vickrey_total) << ',' << format_fixed(row.mean_vickrey_agents)
            << ',' << format_fixed(row.sd_vickrey_agents) << ',' << row.reps << ','
            << row.skipped_zero_gft << "\n";
    }
}

/// One profitable misreport found by the fuzzer.
struct FuzzViolation {
    Variant variant = Variant::Lottery;
    std::int64_t deviation_index = 0;
    Money truthful_gain{};
    Money deviating_gain{};
    std::vector<Money> reported;
};

struct FuzzReport {
    std::string trader_id;
    std::int64_t deviations = 0;
    Money truthful_gain_lottery{};
    Money truthful_gain_vickrey{};
    std::vector<FuzzViolation> violations;
};

namespace detail {

/// Net gain of one trader under its TRUE valuation: value received minus
/// money paid (payments and fees), regardless of what was reported.
inline Money net_gain_under(const MudaOutcome& outcome, const Trader& truth) {
    const SideOutcome& half =
        outcome.split.sides.at(truth.id) == SideTag::Left ? outcome.left : outcome.right;
    const TradeResult& r = half.traders.at(truth.id);
    if (truth.side == Side::Buyer) {
        const std::int64_t valued = std::min(r.units, truth.valuation.units());
        return truth.valuation.sum_top(valued) - r.payment - r.fee;
    }
    return -r.payment - r.fee - truth.valuation.sum_bottom(r.units);
}

/// Random DMR misreport of `truth`. Sellers never report more units than
/// they hold; buyers may pad up to the market cap (extra units are worthless
/// under the true valuation).
inline std::vector<Money> random_misreport(const Trader& truth, std::int64_t max_units,
                                           rng::Stream& stream) {
    const auto marginals = truth.valuation.marginals();
    const std::int64_t length = truth.valuation.units();
    std::vector<Money> reported(marginals.begin(), marginals.end());
    Money top = reported.front();
    if (top < Money::units(1)) top = Money::units(1);

    std::uint64_t kind = stream.below(6);
    if (kind == 4 && (truth.side == Side::Seller || length >= max_units)) kind = 3;
    switch (kind) {
        case 0: {  // rescale all marginals by a factor in [0, 2]
            const std::int64_t numerator = static_cast<std::int64_t>(stream.below(401));
            for (Money& v : reported) v = Money::from_atomic(v.atomic() * numerator / 200);
            break;
        }
        case 1: {  // shift all marginals by a constant
            const std::int64_t span = top.atomic() / 2 + 1;
            const std::int64_t delta = stream.range(-span, span);
            for (Money& v : reported) {
                v = std::max(Money{}, Money::from_atomic(v.atomic() + delta));
            }
            break;
        }
        case 2: {  // independent per-unit jitter
            const std::int64_t span = top.atomic() / 4 + 1;
            for (Money& v : reported) {
                v = std::max(Money{}, Money::from_atomic(v.atomic() + stream.range(-span, span)));
            }
            break;
        }
        case 3: {  // truncate to a prefix
            const std::int64_t keep = 1 + static_cast<std::int64_t>(
                                              stream.below(static_cast<std::uint64_t>(length)));
            reported.resize(static_cast<std::size_t>(keep));
            break;
        }
        case 4: {  // pad a buyer with extra cheap units
            const std::int64_t room = max_units - length;
            const std::int64_t extra =
                1 + static_cast<std::int64_t>(stream.below(static_cast<std::uint64_t>(room)));
            const std::int64_t floor_atomic = reported.back().atomic();
            for (std::int64_t i = 0; i < extra; ++i) {
                reported.push_back(
                    Money::from_atomic(stream.range(0, std::max<std::int64_t>(0, floor_atomic))));
            }
            break;
        }
        default: {  // withdraw from the market
            if (truth.side == Side::Buyer) {
                reported.assign(1, Money{});
            } else {
                reported.assign(1, top + top + Money::units(1000));
            }
            break;
        }
    }
    std::sort(reported.begin(), reported.end(), std::greater<Money>());
    return reported;
}

}  // namespace detail

/// Searches for profitable misreports of one trader under fixed mechanism
/// randomness. Both variants run for every deviation; gains are always
/// evaluated under the true valuation. An empty violation list is the
/// truthfulness guarantee holding on this instance.
inline FuzzReport fuzz_dsic(const Market& market, const std::string& trader_id,
                            std::int64_t num_deviations, std::uint64_t seed) {
    const Trader* truth = market.find(trader_id);
    if (truth == nullptr) throw InvalidMarket("no trader with id " + trader_id);

    FuzzReport report;
    report.trader_id = trader_id;
    report.deviations = num_deviations;

    const std::uint64_t mech_seed = rng::derive_seed(seed, "mech");
    const MudaOutcome truthful_lottery = run_muda(market, Variant::Lottery, mech_seed);
    const MudaOutcome truthful_vickrey = run_muda(market, Variant::Vickrey, mech_seed);
    report.truthful_gain_lottery = detail::net_gain_under(truthful_lottery, *truth);
    report.truthful_gain_vickrey = detail::net_gain_under(truthful_vickrey, *truth);

    rng::Stream deviations(rng::derive_seed(seed, "dev"));
    for (std::int64_t i = 0; i < num_deviations; ++i) {
        const std::vector<Money> reported =
            detail::random_misreport(*truth, market.max_units(), deviations);
        const Market deviated = market.with_valuation(trader_id, Valuation(reported));

        for (const Variant variant : {Variant::Lottery, Variant::Vickrey}) {
            const MudaOutcome outcome = run_muda(deviated, variant, mech_seed);
            const Money gained = detail::net_gain_under(outcome, *truth);
            const Money baseline = variant == Variant::Lottery ? report.truthful_gain_lottery
                                                               : report.truthful_gain_vickrey;
            if (gained > baseline) {
                report.violations.push_back({variant, i, baseline, gained, reported});
            }
        }
    }
    return report;
}

}  // namespace muda

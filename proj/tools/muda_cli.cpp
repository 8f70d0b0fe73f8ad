#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "muda/experiments.hpp"
#include "muda/json_io.hpp"
#include "muda/mechanism.hpp"

namespace {

void write_text(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw muda::Error("cannot write " + out_path);
    out << text;
}

muda::Variant parse_variant(const std::string& name) {
    return name == "vickrey" ? muda::Variant::Vickrey : muda::Variant::Lottery;
}

struct RunArgs {
    std::string market_path;
    std::string variant = "lottery";
    std::uint64_t seed = 0;
    std::string out;
    bool side_only = false;
    double price = 0;
    bool price_set = false;
};

int cmd_run(const RunArgs& args) {
    const muda::Market market = muda::load_market(args.market_path);
    const muda::Variant variant = parse_variant(args.variant);

    if (args.side_only) {
        if (!args.price_set) throw muda::Error("--side-only requires --price");
        const muda::Money price = muda::Money::from_double(args.price);
        const muda::SideOutcome outcome =
            variant == muda::Variant::Lottery
                ? muda::resolve_side_lottery(market, price,
                                             muda::rng::derive_seed(args.seed, "perm", 0))
                : muda::resolve_side_vickrey(market, price);
        muda::json doc = muda::to_json(outcome);
        doc["mode"] = "side-only";
        doc["variant"] = muda::to_string(variant);
        doc["seed"] = args.seed;
        doc["buyer_gain"] = outcome.gain_of(muda::Side::Buyer).to_double();
        doc["seller_gain"] = outcome.gain_of(muda::Side::Seller).to_double();
        doc["total_fees"] = outcome.total_fees().to_double();
        doc["units_bought"] = outcome.units_traded(muda::Side::Buyer);
        doc["units_sold"] = outcome.units_traded(muda::Side::Seller);
        write_text(args.out, doc.dump(2) + "\n");
        return 0;
    }

    const muda::MudaOutcome outcome = muda::run_muda(market, variant, args.seed);
    write_text(args.out, muda::to_json(outcome).dump(2) + "\n");
    return 0;
}

struct OptimalArgs {
    std::string market_path;
    std::string out;
};

int cmd_optimal(const OptimalArgs& args) {
    const muda::Market market = muda::load_market(args.market_path);
    write_text(args.out, muda::to_json(muda::optimal_trade(market)).dump(2) + "\n");
    return 0;
}

struct UniformArgs {
    std::vector<std::int64_t> n_list = {10, 50, 100};
    std::int64_t group_size = 1;
    std::int64_t max_units = 10;
    double center = 500;
    double amplitude = 250;
    std::int64_t reps = 20;
    std::uint64_t seed = 0;
    std::string out;
    std::vector<std::int64_t> m_list;
    std::int64_t total_units = 100000;
};

std::string join(const std::vector<std::int64_t>& values) {
    std::ostringstream s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) s << ';';
        s << values[i];
    }
    return s.str();
}

int cmd_experiment_uniform(const UniformArgs& args) {
    muda::UniformSpec base;
    base.group_size = args.group_size;
    base.center = muda::Money::from_double(args.center);
    base.amplitude = muda::Money::from_double(args.amplitude);
    base.repetitions = args.reps;
    base.seed = args.seed;

    std::vector<std::pair<std::string, std::string>> config = {
        {"mode", args.m_list.empty() ? "uniform" : "concentration"},
        {"group_size", std::to_string(base.group_size)},
        {"center", base.center.str()},
        {"amplitude", base.amplitude.str()},
        {"reps", std::to_string(base.repetitions)},
        {"seed", std::to_string(base.seed)},
    };

    std::vector<muda::ExperimentRow> rows;
    if (args.m_list.empty()) {
        if (args.max_units % args.group_size != 0) {
            throw muda::InvalidSpec("--M must be a multiple of --m");
        }
        base.max_units = args.max_units;
        base.group_count = args.max_units / args.group_size;
        config.push_back({"group_count", std::to_string(base.group_count)});
        config.push_back({"max_units", std::to_string(base.max_units)});
        config.push_back({"n_list", join(args.n_list)});
        rows = muda::run_uniform_experiment(base, args.n_list);
    } else {
        config.push_back({"M_list", join(args.m_list)});
        config.push_back({"total_units", std::to_string(args.total_units)});
        rows = muda::run_concentration_experiment(base, args.m_list, args.total_units);
    }

    std::ostringstream csv;
    muda::write_experiment_csv(csv, config, rows);
    write_text(args.out, csv.str());
    return 0;
}

struct OrderbookArgs {
    std::string input;
    std::vector<std::int64_t> n_list = {5, 10};
    std::int64_t reps = 5;
    std::uint64_t seed = 0;
    std::string out;
    std::string make_fixture;
    std::int64_t fixture_symbols = 2;
    std::int64_t fixture_traders = 40;
};

int cmd_experiment_orderbook(const OrderbookArgs& args) {
    if (!args.make_fixture.empty()) {
        muda::FixtureSpec spec;
        spec.symbols.clear();
        for (std::int64_t i = 0; i < args.fixture_symbols; ++i) {
            spec.symbols.push_back("SYM" + std::to_string(i));
        }
        spec.traders_per_symbol = args.fixture_traders;
        spec.seed = args.seed;
        std::ofstream out(args.make_fixture);
        if (!out) throw muda::Error("cannot write " + args.make_fixture);
        muda::write_synthetic_orderbook(out, spec);
        std::cout << "wrote fixture " << args.make_fixture << " (seed " << args.seed << ")\n";
        return 0;
    }

    if (args.input.empty()) throw muda::Error("an order-book CSV (or --make-fixture) is required");
    std::ifstream in(args.input);
    if (!in) throw muda::Error("cannot open " + args.input);
    const auto pools = muda::ingest_orderbook(in);

    std::vector<std::pair<std::string, std::string>> config = {
        {"mode", "orderbook"},
        {"input", args.input},
        {"symbols", std::to_string(pools.size())},
        {"n_list", join(args.n_list)},
        {"reps", std::to_string(args.reps)},
        {"seed", std::to_string(args.seed)},
    };
    const auto rows = muda::run_orderbook_experiment(pools, args.n_list, args.reps, args.seed);

    std::ostringstream csv;
    muda::write_experiment_csv(csv, config, rows);
    write_text(args.out, csv.str());
    return 0;
}

struct FuzzArgs {
    std::string market_path;
    std::string trader;
    std::int64_t deviations = 200;
    std::uint64_t seed = 0;
};

int cmd_fuzz(const FuzzArgs& args) {
    const muda::Market market = muda::load_market(args.market_path);
    std::vector<std::string> targets;
    if (!args.trader.empty()) {
        targets.push_back(args.trader);
    } else {
        for (const muda::Trader& t : market.traders()) targets.push_back(t.id);
    }

    std::cout << "seed: " << args.seed << "\n";
    std::int64_t total_violations = 0;
    for (const std::string& id : targets) {
        const muda::FuzzReport report = muda::fuzz_dsic(market, id, args.deviations, args.seed);
        std::cout << "trader " << id << ": truthful lottery=" << report.truthful_gain_lottery
                  << " vickrey=" << report.truthful_gain_vickrey
                  << " violations=" << report.violations.size() << "\n";
        for (const muda::FuzzViolation& v : report.violations) {
            std::cout << "  variant=" << muda::to_string(v.variant)
                      << " deviation=" << v.deviation_index << " truthful=" << v.truthful_gain
                      << " deviating=" << v.deviating_gain << "\n";
        }
        total_violations += static_cast<std::int64_t>(report.violations.size());
    }
    std::cout << "total violations: " << total_violations << "\n";
    return total_violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-unit double auction: mechanism runs, optima, experiments, fuzzing"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Run the mechanism on a market file");
    run->add_option("market", run_args.market_path, "Market JSON file")->required();
    run->add_option("--variant", run_args.variant, "Mechanism variant")
        ->check(CLI::IsMember({"lottery", "vickrey"}))
        ->capture_default_str();
    run->add_option("--seed", run_args.seed, "Randomness seed")->capture_default_str();
    run->add_option("--out", run_args.out, "Write output here instead of stdout");
    run->add_flag("--side-only", run_args.side_only,
                  "Treat the whole file as one half-market and trade at --price");
    run->add_option("--price", run_args.price, "Posted price for --side-only")
        ->each([&](const std::string&) { run_args.price_set = true; });

    OptimalArgs optimal_args;
    CLI::App* optimal = app.add_subcommand("optimal", "Compute the optimal trade of a market file");
    optimal->add_option("market", optimal_args.market_path, "Market JSON file")->required();
    optimal->add_option("--out", optimal_args.out, "Write output here instead of stdout");

    UniformArgs uniform_args;
    CLI::App* uniform = app.add_subcommand(
        "experiment-uniform", "Competitive-ratio sweep over synthetic uniform markets");
    uniform->add_option("--n-list", uniform_args.n_list, "Trader counts to sweep")
        ->delimiter(',')
        ->capture_default_str();
    uniform->add_option("--m", uniform_args.group_size, "Units per equal-valued group")
        ->capture_default_str();
    uniform->add_option("--M", uniform_args.max_units, "Units per trader (and market cap)")
        ->capture_default_str();
    uniform->add_option("--V", uniform_args.center, "Value distribution center")
        ->capture_default_str();
    uniform->add_option("--A", uniform_args.amplitude, "Value distribution amplitude")
        ->capture_default_str();
    uniform->add_option("--reps", uniform_args.reps, "Repetitions per sweep point")
        ->capture_default_str();
    uniform->add_option("--seed", uniform_args.seed, "Randomness seed")->capture_default_str();
    uniform->add_option("--out", uniform_args.out, "Write CSV here instead of stdout");
    uniform->add_option("--M-list", uniform_args.m_list,
                        "Sweep per-trader units instead of trader counts")
        ->delimiter(',');
    uniform->add_option("--total-units", uniform_args.total_units,
                        "Expected units per side under --M-list")
        ->capture_default_str();

    OrderbookArgs orderbook_args;
    CLI::App* orderbook = app.add_subcommand(
        "experiment-orderbook", "Competitive-ratio sweep over an empirical order-book pool");
    orderbook->add_option("input", orderbook_args.input, "Order-book CSV file");
    orderbook->add_option("--n-list", orderbook_args.n_list, "Sample sizes to sweep")
        ->delimiter(',')
        ->capture_default_str();
    orderbook->add_option("--reps", orderbook_args.reps, "Repetitions per sweep point")
        ->capture_default_str();
    orderbook->add_option("--seed", orderbook_args.seed, "Randomness seed")->capture_default_str();
    orderbook->add_option("--out", orderbook_args.out, "Write CSV here instead of stdout");
    orderbook->add_option("--make-fixture", orderbook_args.make_fixture,
                          "Write a synthetic order-book CSV here and exit");
    orderbook->add_option("--fixture-symbols", orderbook_args.fixture_symbols,
                          "Symbols in the fixture")
        ->capture_default_str();
    orderbook->add_option("--fixture-traders", orderbook_args.fixture_traders,
                          "Merged traders per fixture symbol")
        ->capture_default_str();

    FuzzArgs fuzz_args;
    CLI::App* fuzz =
        app.add_subcommand("fuzz", "Search for profitable misreports under fixed randomness");
    fuzz->add_option("market", fuzz_args.market_path, "Market JSON file")->required();
    fuzz->add_option("--trader", fuzz_args.trader, "Focal trader id (default: all traders)");
    fuzz->add_option("--deviations", fuzz_args.deviations, "Misreports per trader")
        ->capture_default_str();
    fuzz->add_option("--seed", fuzz_args.seed, "Randomness seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (optimal->parsed()) return cmd_optimal(optimal_args);
        if (uniform->parsed()) return cmd_experiment_uniform(uniform_args);
        if (orderbook->parsed()) return cmd_experiment_orderbook(orderbook_args);
        if (fuzz->parsed()) return cmd_fuzz(fuzz_args);
    } catch (const muda::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

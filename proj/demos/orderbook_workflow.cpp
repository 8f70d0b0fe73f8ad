// Generates a synthetic order-book CSV, merges it into per-symbol trader
// pools, and sweeps the sample size with both mechanism variants.
#include <iostream>
#include <sstream>

#include <muda/experiments.hpp>

using namespace muda;

int main() {
    FixtureSpec fixture;
    fixture.symbols = {"AAA", "BBB"};
    fixture.traders_per_symbol = 24;
    fixture.seed = 42;

    std::stringstream csv;
    write_synthetic_orderbook(csv, fixture);

    const std::map<std::string, TraderPool> pools = ingest_orderbook(csv);
    for (const auto& [symbol, pool] : pools) {
        std::cout << "# pool " << symbol << ": " << pool.size() << " traders\n";
    }

    const std::vector<ExperimentRow> rows = run_orderbook_experiment(pools, {4, 8, 16}, 10, 1);
    write_experiment_csv(std::cout,
                         {{"mode", "orderbook"}, {"symbols", "AAA;BBB"}, {"reps", "10"}},
                         rows);
    return 0;
}

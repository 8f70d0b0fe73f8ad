// Builds an eight-trader market, runs both mechanism variants on the same
// coin flips, and prints every trade next to the full-information optimum.
#include <cstdio>
#include <vector>

#include <muda/clearing.hpp>
#include <muda/mechanism.hpp>
#include <muda/money.hpp>
#include <muda/valuation.hpp>

using namespace muda;

namespace {

Valuation units(std::initializer_list<int> values) {
    std::vector<Money> marginals;
    for (const int v : values) marginals.push_back(Money::units(v));
    return Valuation(std::move(marginals));
}

Market make_market() {
    std::vector<Trader> traders;
    traders.push_back({"ann", Side::Buyer, units({100, 90, 80, 60})});
    traders.push_back({"ben", Side::Buyer, units({95, 70, 50})});
    traders.push_back({"cat", Side::Buyer, units({85, 55})});
    traders.push_back({"dan", Side::Buyer, units({75, 65, 35})});
    traders.push_back({"eve", Side::Seller, units({70, 60, 40, 20, 10})});
    traders.push_back({"fox", Side::Seller, units({65, 45, 35, 25})});
    traders.push_back({"gus", Side::Seller, units({55, 30, 15})});
    traders.push_back({"hal", Side::Seller, units({50, 22})});
    return Market(std::move(traders), 5);
}

void print_side(const char* label, const SideOutcome& side) {
    std::printf("  %s half, posted price %s, long side %s\n", label,
                side.cross_price.str().c_str(), to_string(side.long_side));
    for (const auto& [id, result] : side.traders) {
        std::printf("    %-4s %s %lld, payment %8s, fee %6s, gain %7s\n", id.c_str(),
                    result.side == Side::Buyer ? "buys " : "sells",
                    static_cast<long long>(result.units), result.payment.str().c_str(),
                    result.fee.str().c_str(), result.gain.str().c_str());
    }
}

void print_outcome(const MudaOutcome& outcome) {
    std::printf("%s variant, seed %llu\n", to_string(outcome.variant),
                static_cast<unsigned long long>(outcome.seed));
    print_side("left", outcome.left);
    print_side("right", outcome.right);
    std::printf("  gains %s total, %s to agents, %s to the market maker (optimum %s)\n\n",
                outcome.total_gft.str().c_str(), outcome.agents_gft.str().c_str(),
                outcome.market_maker_revenue.str().c_str(),
                outcome.benchmark.max_gft.str().c_str());
}

}  // namespace

int main() {
    const Market market = make_market();
    const OptimalTrade optimum = optimal_trade(market);
    std::printf("full-information optimum: %lld units, gains %s\n\n",
                static_cast<long long>(optimum.k), optimum.max_gft.str().c_str());

    const auto [lottery, vickrey] = run_muda_both(market, 30, optimum);
    print_outcome(lottery);
    print_outcome(vickrey);
    return 0;
}

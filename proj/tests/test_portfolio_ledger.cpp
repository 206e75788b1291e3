#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "liqrep/error.hpp"
#include "liqrep/portfolio_ledger.hpp"
#include "liqrep/variance_swap.hpp"

using namespace liqrep;

namespace {

ModelParams params(double lambda) {
    ModelParams p;
    p.impact_fraction = lambda;
    p.correlation = decompose_correlation(correlation_matrix(-0.5, -0.3, 0.2));
    return p;
}

ModelParams frozen(double lambda) {
    ModelParams p = params(lambda);
    p.u_vol = {0.0, 1.0};
    p.v_vol = {0.0, 1.0};
    p.u_rate = p.v_rate = 0.0;
    return p;
}

Strategy random_strategy(std::size_t n, std::size_t nodes, std::uint64_t seed, bool swaps) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::bernoulli_distribution trade(0.3);
    Strategy s = Strategy::zeros(n, nodes);
    s.initial_cash = 17.0;
    s.x_pre = 0.5;
    s.chi1_pre = swaps ? -1.0 : 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double x = s.x_pre, c1 = s.chi1_pre, c2 = 0.0;
        for (std::size_t k = 0; k < nodes; ++k) {
            if (trade(rng)) x = pos(rng);
            if (swaps && trade(rng)) c1 = 100 * pos(rng);
            if (swaps && trade(rng)) c2 = 100 * pos(rng);
            s.X(p, k) = x;
            s.chi1(p, k) = c1;
            s.chi2(p, k) = c2;
        }
    }
    return s;
}

SwapPricePaths prices(const PathBundle& b, const ModelParams& p) {
    return {swap_price_path(b, p, {1.25, 0.04}), swap_price_path(b, p, {1.5, 0.04})};
}

}  // namespace

TEST(Ledger, NoTradesKeepsCash) {
    const auto b = simulate_paths(params(0.5), TimeGrid{1.0, 8}, 5, 1);
    Strategy s = Strategy::zeros(5, 9);
    s.initial_cash = 3.0;
    const auto r = ledger_report(s, b, 0.5, {}, {});
    for (double y : r.Y.data()) EXPECT_EQ(y, 3.0);
    for (double z : r.decomposed.Z.data()) EXPECT_EQ(z, 0.0);
}

TEST(Ledger, RoundTripFullImpactIsFree) {
    const auto p = frozen(1.0);
    const auto b = simulate_paths(p, TimeGrid{1.0, 4}, 1, 1);
    Strategy s = Strategy::zeros(1, 5);
    s.X(0, 1) = 1.0;  // buy at t1, sell at t2
    const auto r = ledger_report(s, b, 1.0, {}, {});
    // the stock still diffuses; only the price move between the trades remains
    EXPECT_NEAR(r.Y(0, 4) - (b.S(0, 2) - b.S(0, 1)), 0.0, 1e-12);
    EXPECT_LT(r.max_discrepancy(), 1e-12);
}

TEST(Ledger, RoundTripNoImpactCostsTwoM) {
    const auto p = frozen(0.0);
    const auto b = simulate_paths(p, TimeGrid{1.0, 4}, 1, 1);
    Strategy s = Strategy::zeros(1, 5);
    s.X(0, 1) = 1.0;
    const auto r = ledger_report(s, b, 0.0, {}, {});
    const double m = b.M(0, 0);
    EXPECT_NEAR(r.Y(0, 4) - (b.S(0, 2) - b.S(0, 1)), -2.0 * m, 1e-12);
    EXPECT_NEAR(r.decomposed.quad_cost(0, 4), -2.0 * m, 1e-15);
}

TEST(Ledger, ConstantHoldingWithoutIlliquidity) {
    ModelParams p = params(0.5);
    p.illiquidity = 0.0;
    const auto b = simulate_paths(p, TimeGrid{1.0, 16}, 10, 2);
    Strategy s = Strategy::zeros(10, 17);
    const double c = 2.5;
    for (std::size_t q = 0; q < 10; ++q)
        for (std::size_t k = 0; k < 16; ++k) s.X(q, k) = c;
    const auto r = ledger_report(s, b, 0.5, {}, {});
    for (std::size_t q = 0; q < 10; ++q) {
        EXPECT_NEAR(r.Y(q, 16), c * (b.S(q, 16) - b.S(q, 0)), 1e-10);
        EXPECT_EQ(r.decomposed.impact_term(q, 16), 0.0);
        EXPECT_EQ(r.decomposed.quad_cost(q, 16), 0.0);
    }
}

TEST(Ledger, ZeroLambdaDropsImpactTerm) {
    const auto b = simulate_paths(params(0.0), TimeGrid{1.0, 32}, 20, 3);
    const auto s = random_strategy(20, 33, 4, false);
    const auto r = ledger_report(s, b, 0.0, {}, {});
    for (double v : r.decomposed.impact_term.data()) EXPECT_EQ(v, 0.0);
    EXPECT_LT(r.max_discrepancy(), 1e-9);
}

TEST(Ledger, DirectEqualsDecomposed) {
    for (double lambda : {0.0, 0.3, 1.0}) {
        const auto p = params(lambda);
        const auto b = simulate_paths(p, TimeGrid{1.0, 64}, 50, 5);
        const auto s = random_strategy(50, 65, 6, true);
        SwapLiquidity sw{2e-4, 5e-4, 0.4, 0.9};
        const auto r = ledger_report(s, b, lambda, sw, prices(b, p));
        EXPECT_LT(r.max_discrepancy(), 1e-9) << lambda;
    }
}

TEST(Ledger, SwapTradesNeedPrices) {
    const auto b = simulate_paths(params(0.5), TimeGrid{1.0, 8}, 3, 1);
    const auto s = random_strategy(3, 9, 1, true);
    try {
        ledger_report(s, b, 0.5, {}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
    }
}

TEST(Ledger, SignProperties) {
    const auto p = params(0.4);
    const auto b = simulate_paths(p, TimeGrid{1.0, 32}, 200, 7);
    const auto s = random_strategy(200, 33, 8, false);
    const auto d = cash_decomposed(s, b, 0.4, {}, {});
    for (std::size_t q = 0; q < 200; ++q) {
        EXPECT_LE(d.quad_cost(q, 32), 0.0);
        bool decreasing = true;
        for (std::size_t k = 1; k <= 32; ++k) decreasing &= b.M(q, k) <= b.M(q, k - 1);
        if (decreasing) EXPECT_GE(d.impact_term(q, 32), 0.0);
    }
}

TEST(Ledger, QuadraticCostVanishesUnderRefinement) {
    // sin(2 pi t) position profile; cost scales like dt
    const auto p = params(0.2);
    double prev = 0.0;
    for (std::size_t n : {64u, 128u, 256u}) {
        const auto b = simulate_paths(p, TimeGrid{1.0, n}, 200, 9);
        Strategy s = Strategy::zeros(200, n + 1);
        for (std::size_t q = 0; q < 200; ++q)
            for (std::size_t k = 0; k <= n; ++k) s.X(q, k) = std::sin(2 * M_PI * b.grid.t(k));
        const auto d = cash_decomposed(s, b, 0.2, {}, {});
        double mean = 0;
        for (std::size_t q = 0; q < 200; ++q) mean += d.quad_cost(q, n) / 200;
        if (prev != 0.0) EXPECT_NEAR(prev / mean, 2.0, 0.25);
        prev = mean;
    }
}

TEST(Liquidation, Values) {
    EXPECT_EQ(liquidation_value(0, 100, 0.05, 1), 0.0);
    EXPECT_DOUBLE_EQ(liquidation_value(10, 100, 0.05, 1), 995.0);
    // block: sell X at the quote, pay the spread X^2 M
    const double x = 10, q = 100, m = 0.05, lambda = 0.3;
    EXPECT_DOUBLE_EQ(block_liquidation_value(x, q, m, lambda), -execution_cost(q, m, -x));
    EXPECT_NEAR(block_liquidation_value(x, q, m, lambda) - liquidation_value(x, q, m, lambda),
                -(1 - lambda) * m * x * x, 1e-12);
}

TEST(Liquidation, BlockTradeMatchesLedger) {
    // closing by a jump at the last node realizes the block value
    const auto p = params(0.3);
    const auto b = simulate_paths(p, TimeGrid{1.0, 8}, 5, 1);
    Strategy s = Strategy::zeros(5, 9);
    for (std::size_t q = 0; q < 5; ++q)
        for (std::size_t k = 0; k < 8; ++k) s.X(q, k) = 4.0;
    const auto r = ledger_report(s, b, 0.3, {}, {});
    Strategy held = s;
    for (std::size_t q = 0; q < 5; ++q) held.X(q, 8) = 4.0;
    const auto quotes = impacted_quote_path(b, held, 0.3);
    const auto y_held = cash_direct(held, quotes, b, {}, {});
    for (std::size_t q = 0; q < 5; ++q)
        EXPECT_NEAR(r.Y(q, 8) - y_held(q, 8),
                    block_liquidation_value(4.0, quotes.pre(q, 8), b.M(q, 8), 0.3), 1e-9);
}

TEST(Admissible, Definition) {
    std::vector<double> zero(10, 0.0);
    EXPECT_TRUE(check_admissible(zero, 0.0));
    std::vector<double> dip{0.0, -0.5, -1.2, 0.3};
    EXPECT_FALSE(check_admissible(dip, 1.0));
    EXPECT_TRUE(check_admissible(dip, 1.2));
}

TEST(Admissible, BuyAndHold) {
    ModelParams p = params(0.0);
    p.illiquidity = 0.0;
    const auto b = simulate_paths(p, TimeGrid{1.0, 32}, 500, 10);
    Strategy s = Strategy::zeros(500, 33);
    for (std::size_t q = 0; q < 500; ++q)
        for (std::size_t k = 0; k < 33; ++k) s.X(q, k) = 1.0;
    const auto d = cash_decomposed(s, b, 0.0, {}, {});
    const auto ok = check_admissible(d.Z, p.s0);
    for (std::size_t q = 0; q < 500; ++q) {
        EXPECT_TRUE(ok[q]);
        EXPECT_NEAR(d.Z(q, 32), b.S(q, 32) - p.s0, 1e-10);
    }
}

TEST(Arbitrage, ZeroStrategyExactlyZero) {
    const auto p = params(0.5);
    const TimeGrid g{1.0, 16};
    const auto r = arbitrage_harness({std::vector<double>(17, 0.0)}, p, g, 1000, 1);
    EXPECT_EQ(r[0].mean, 0.0);
    EXPECT_EQ(r[0].std_error, 0.0);
    EXPECT_FALSE(r[0].violates);
}

TEST(Arbitrage, RequiresSubmartingale) {
    ModelParams p = params(0.5);
    p.u_rate = -0.5;
    try {
        arbitrage_harness({std::vector<double>(5, 0.0)}, p, TimeGrid{1.0, 4}, 10, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotSubmartingaleParams);
    }
}

TEST(Arbitrage, RoundTripsDoNotProfit) {
    ModelParams p = params(0.5);
    p.u_rate = 0.5;
    p.u_shift = 0.5;
    std::vector<std::vector<double>> fam;
    for (int f = 0; f < 4; ++f) {
        std::vector<double> prof(33, 0.0);
        for (std::size_t k = 2 + f; k < 20 + f; ++k) prof[k] = (f % 2 ? -1.0 : 1.0);
        fam.push_back(prof);
    }
    const auto r = arbitrage_harness(fam, p, TimeGrid{1.0, 32}, 10000, 3);
    for (const auto& x : r) {
        EXPECT_FALSE(x.violates);
        EXPECT_EQ(x.admissible_fraction, 1.0);
    }
}

TEST(Arbitrage, BuyAndHoldGainsAreMartingale) {
    ModelParams p = params(0.0);
    p.illiquidity = 0.0;
    p.u_shift = 0.1;
    std::vector<double> prof(33, 1.0);
    prof.back() = 0.0;
    const auto r = arbitrage_harness({prof}, p, TimeGrid{1.0, 32}, 10000, 4);
    EXPECT_LT(std::abs(r[0].mean), 3.0 * r[0].std_error);
}

TEST(Arbitrage, StopLossMatchesLedgerGain) {
    const auto p = params(0.5);
    const auto b = simulate_paths(p, TimeGrid{1.0, 32}, 300, 11);
    std::vector<double> prof(33, -1.0);
    prof.back() = 0.0;
    const double stop = 2.0;
    const auto s = apply_stop_loss(prof, b, 0.5, stop);
    const auto d = cash_decomposed(s, b, 0.5, {}, {});
    std::size_t stopped = 0;
    for (std::size_t q = 0; q < 300; ++q) {
        std::size_t first = 33;
        for (std::size_t k = 0; k < 33; ++k)
            if (s.X(q, k) != prof[k]) {
                first = k;
                break;
            }
        if (first < 32) {
            ++stopped;
            // gain before the liquidation trade broke the stop
            const double pre = d.Z(q, first - 1) + s.X(q, first - 1) * (b.S(q, first) - b.S(q, first - 1)) -
                               0.5 * (b.M(q, first) - b.M(q, first - 1));
            EXPECT_LT(pre, -stop);
            for (std::size_t k = first; k < 33; ++k) EXPECT_EQ(s.X(q, k), 0.0);
        }
    }
    EXPECT_GT(stopped, 0u);
}

TEST(Export, LedgerCsvHeader) {
    const auto b = simulate_paths(params(0.5), TimeGrid{1.0, 2}, 1, 1);
    const Strategy s = Strategy::zeros(1, 3);
    std::ostringstream os;
    write_ledger_csv(os, b, s, ledger_report(s, b, 0.5, {}, {}));
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
              "path,step,t,X,chi1,chi2,Y,gains,impact_term,quad_cost,liq_value");
}

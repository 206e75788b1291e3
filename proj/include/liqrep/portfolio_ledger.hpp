#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "liqrep/market_model.hpp"
#include "liqrep/order_book.hpp"
#include "liqrep/strategy.hpp"

namespace liqrep {

/// Constant supply-curve slopes and impact fractions of the two swaps.
struct SwapLiquidity {
    double depth1 = 1e-4;
    double depth2 = 1e-4;
    double lambda1 = 0.5;
    double lambda2 = 0.5;

    void validate() const;
};

/// Unaffected swap prices G1, G2 on the bundle grid. Empty when the strategy
/// never trades swaps.
struct SwapPricePaths {
    PathMatrix G1, G2;
    bool empty() const { return G1.empty(); }
};

/// Cash account from the trade-sum form: every trade at node k pays
/// dX (pre-quote + depth * dX).
PathMatrix cash_direct(const Strategy& strategy, const ImpactedQuotePath& quotes,
                       const PathBundle& bundle, const SwapLiquidity& swaps,
                       const SwapPricePaths& swap_prices);

/// Running left-point sums of the decomposed form, cumulative from node 0.
/// Stock and swap legs are kept apart.
struct DecomposedLedger {
    PathMatrix gains, impact_term, quad_cost;
    PathMatrix swap_gains, swap_impact, swap_quad;
    PathMatrix liq_value;  // sum over legs of X (post-quote - lambda * depth * X)
    PathMatrix Y;          // cash implied by the decomposition
    PathMatrix Z;          // total decomposed gain

    double gain(std::size_t p, std::size_t k) const { return Z(p, k); }
};

DecomposedLedger cash_decomposed(const Strategy& strategy, const PathBundle& bundle, double lambda,
                                 const SwapLiquidity& swaps, const SwapPricePaths& swap_prices);

struct LedgerReport {
    PathMatrix Y;  // direct
    DecomposedLedger decomposed;
    std::vector<double> discrepancy;  // per path, max over nodes, relative to max(1, |a|, |b|)

    double max_discrepancy() const;
};

LedgerReport ledger_report(const Strategy& strategy, const PathBundle& bundle, double lambda,
                           const SwapLiquidity& swaps, const SwapPricePaths& swap_prices);

/// Value of closing X by continuous finite-variation unwinding.
inline double liquidation_value(double x, double quote_post, double m, double lambda) {
    return x * (quote_post - lambda * m * x);
}

/// Value of closing X with one immediate block trade at the quote.
inline double block_liquidation_value(double x, double quote, double m, double lambda) {
    return liquidation_value(x, quote, m, lambda) - (1.0 - lambda) * m * x * x;
}

/// True iff the running gain never falls below -a.
bool check_admissible(std::span<const double> gains, double a);
std::vector<char> check_admissible(const PathMatrix& gains, double a);

struct ArbitrageOptions {
    double stop_loss = 50.0;      // liquidate once the gain drops below -stop_loss
    double admissible_bound = 100.0;
    unsigned threads = 1;
};

struct ArbitrageResult {
    double mean = 0.0;
    double std_error = 0.0;
    bool violates = false;       // mean - 3 stderr > 0
    double admissible_fraction = 0.0;
    std::size_t stopped_paths = 0;
};

/// Each profile lists target stock holdings per node (size n_steps + 1, last entry 0).
/// Throws NotSubmartingaleParams unless the depth process is a submartingale.
std::vector<ArbitrageResult> arbitrage_harness(const std::vector<std::vector<double>>& profiles,
                                               const ModelParams& params, const TimeGrid& grid,
                                               std::size_t n_paths, std::uint64_t seed,
                                               const ArbitrageOptions& options = {});

/// Same, on an existing bundle.
std::vector<ArbitrageResult> arbitrage_harness(const std::vector<std::vector<double>>& profiles,
                                               const ModelParams& params, const PathBundle& bundle,
                                               const ArbitrageOptions& options = {});

/// Stop-loss rule applied pathwise to a deterministic profile.
Strategy apply_stop_loss(const std::vector<double>& profile, const PathBundle& bundle,
                         double lambda, double stop_loss);

/// Columns: path, step, t, X, chi1, chi2, Y, gains, impact_term, quad_cost, liq_value.
/// Swap terms are folded into gains / impact_term / quad_cost. At most
/// max_paths paths are written.
void write_ledger_csv(std::ostream& os, const PathBundle& bundle, const Strategy& strategy,
                      const LedgerReport& report, std::size_t max_paths = SIZE_MAX);

}  // namespace liqrep

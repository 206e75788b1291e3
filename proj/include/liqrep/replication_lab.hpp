#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "liqrep/bsde_engine.hpp"
#include "liqrep/market_model.hpp"

namespace liqrep {

/// Frictionless solution: lambda = 0 driver, terminal h^N(S_T), hedge read off
/// with the illiquidity switched off.
struct HatSolution {
    BsdeSolution solution;
    PathMatrix X;           // Zhat_1 / (sigma1 Sigma S)
    PathMatrix chi1, chi2;  // empty when alpha == gamma
    std::uint64_t fingerprint = 0;

    double y0() const { return solution.y0; }
    double y0_stderr() const { return solution.y0_stderr; }
};

HatSolution hat_solution(const PathBundle& bundle, const ModelParams& params, const Payoff& h,
                         const BsdeConfig& config);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Mean and standard error of a per-path sample.
Estimate estimate(const std::vector<double>& sample);

/// H'(0) = lambda E[sum mu(U) Xhat^2 dt] - 2 lambda E[h'(S_T) 1{S_T <= N} sum Xhat dM].
/// Per-path terms are returned through `per_path` when non-null.
/// Throws MissingDerivative when h has no derivative.
Estimate h_prime_zero(const PathBundle& bundle, const HatSolution& hat, const Payoff& h,
                      const ModelParams& params, const BsdeConfig& config,
                      std::vector<double>* per_path = nullptr);

/// Per path (S0_{T+} - S~_T^x)^2, with S0_{T+} from the quotes impacted by X^x.
std::vector<double> impact_error_samples(const PathBundle& bundle, const HatSolution& hat,
                                         const PathMatrix& X_x, double x, double lambda);
Estimate impact_error(const PathBundle& bundle, const HatSolution& hat, const PathMatrix& X_x,
                      double x, double lambda);

struct ReplicationRow {
    double x = 0.0;
    Estimate Y0;
    Estimate H0;
    Estimate gap;         // H0(x) - Yhat0 from paired per-path differences
    Estimate impact_err;  // E|S0_{T+} - S~_T^x|^2
    Estimate delta_l2;    // mean over alive nodes of (X^x / x - Xhat)^2
    bool smallness_holds = false;
    std::size_t bound_violations = 0;
    std::size_t stopped_paths = 0;
};

struct ReplicationReport {
    std::vector<ReplicationRow> rows;
    Estimate H0_limit;          // Yhat0
    Estimate hprime_analytic;
    Estimate hprime_fd;         // a from the fit gap(x) = a x + b x^2
    Estimate hprime_difference; // paired fd - analytic
    double gap_loglog_slope = 0.0;
    double linear_bound_K = 0.0;  // fit |gap| <= K x through the origin
    double impact_loglog_slope = 0.0;
    std::size_t fd_points = 3;
    double stop_level = 0.0;
    double payoff_cap = 0.0;

    void write_csv(std::ostream& os) const;
    std::string to_json() const;
};

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs every x on one bundle (common random numbers).
/// Throws InconsistentSeeds when hat was computed on another bundle.
ReplicationReport replication_cost_curve(const PathBundle& bundle, const HatSolution& hat,
                                         const ModelParams& params, const Payoff& h,
                                         const std::vector<double>& xs, const BsdeConfig& config,
                                         std::size_t fd_points = 3);

ReplicationReport replication_cost_curve(const ModelParams& params, const TimeGrid& grid,
                                         const Payoff& h, const std::vector<double>& xs,
                                         std::size_t n_paths, std::uint64_t seed,
                                         const BsdeConfig& config, std::size_t fd_points = 3);

/// Plain Monte Carlo mean of h(S_T) on freshly streamed paths (no stored bundle).
Estimate plain_mc_payoff(const ModelParams& params, const TimeGrid& grid, const Payoff& h,
                         std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

}  // namespace liqrep

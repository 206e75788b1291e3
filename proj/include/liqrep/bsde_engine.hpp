#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "liqrep/market_model.hpp"
#include "liqrep/path_matrix.hpp"
#include "liqrep/strategy.hpp"

namespace liqrep {

struct BsdeConfig {
    double stop_level = 100.0;  // L
    double payoff_cap = 1000.0; // N
    int basis_degree = 2;
    int picard_iters = 5;
    double picard_tol = 1e-8;
    std::size_t min_paths = 0;  // extra guard on top of the basis size
    double ridge = 1e-8;
    unsigned threads = 1;

    void validate() const;
};

/// Lipschitz payoff with optional derivative (right derivative at kinks).
struct Payoff {
    std::string name;
    std::function<double(double)> h;
    std::function<double(double)> dh;  // may be empty
    double lipschitz = 0.0;
};

Payoff payoff_identity();
Payoff payoff_constant(double c);
/// min(max(y - strike, 0), cap)
Payoff payoff_clipped_call(double strike, double cap);

/// h^N(y) = h(y) for |y| <= N and h(N) otherwise, taken literally (also for y < -N).
struct TruncatedPayoff {
    Payoff base;
    double level = 0.0;
    double bound = 0.0;  // max |h| on [-N, N]

    double operator()(double y) const;
};

TruncatedPayoff truncate_payoff(const Payoff& h, double N);

/// First node where S <= 1/L, Sigma >= L or Sigma <= 1/L; n_steps when never.
std::vector<std::size_t> stopping_index(const PathBundle& bundle, double L);

/// S_T - 2 lambda x sum_i Xhat_{i-1} dM_i per path.
std::vector<double> impact_adjusted_terminal(const PathBundle& bundle, double x, double lambda,
                                             const PathMatrix& hat_X);

/// x h^N(S~_T^x) per path. Throws MissingHatHedge when hat_X is empty.
std::vector<double> terminal_condition(const PathBundle& bundle, const TruncatedPayoff& payoff,
                                       double x, double lambda, const PathMatrix& hat_X);

/// Driver lambda Lambda Z1^2 ingredients. Lambda is zero on stopped nodes.
struct DriverState {
    PathMatrix Lambda;
    double lambda = 0.0;
    double x = 1.0;
    double payoff_bound = 0.0;  // C_N, for the smallness diagnostic
};

DriverState make_driver(const PathBundle& bundle, const ModelParams& params,
                        const std::vector<std::size_t>& tau, double x, double payoff_bound);

struct StepDiagnostics {
    std::size_t step = 0;
    std::size_t alive = 0;
    std::size_t basis = 0;
    double condition = 0.0;
    std::vector<double> picard_deltas;
};

struct BsdeSolution {
    PathMatrix Y;
    PathMatrix Z1, Z2, Z3;  // Z at node k drives the step k -> k+1; zero after stopping
    std::vector<std::size_t> tau;
    double y0 = 0.0;
    double y0_stderr = 0.0;
    /// H_p plus the driver accumulated along the alive part of path p; their
    /// mean is y0.
    std::vector<double> contributions;
    bool degenerate_run = false;
    std::vector<StepDiagnostics> steps;

    // smallness condition lambda 2 C C_N |x| < 1/2 and the resulting bound |Y| <= |x| C_N
    double lambda_sup = 0.0;
    bool smallness_holds = false;
    std::size_t bound_violations = 0;
    bool picard_contracting = true;
};

/// Backward regression with per-step Picard on the quadratic driver.
/// Throws RegressionRankDeficient or PicardDiverged.
BsdeSolution solve_quadratic_bsde(const PathBundle& bundle, const DriverState& driver,
                                  const std::vector<double>& terminal,
                                  const std::vector<std::size_t>& tau, const BsdeConfig& config);

struct HedgeProcess {
    PathMatrix X, chi1, chi2;
    std::size_t swap_block_zero_nodes = 0;  // no swap loading at all; chi set to 0
    std::size_t degenerate_nodes = 0;       // Phi(U) or Theta(V) vanished; chi set to 0

    /// Strategy view, holdings closed at the final node.
    Strategy as_strategy() const;
};

/// Node-wise hedge inversion; zero after stopping and at the final node.
HedgeProcess hedge_from_solution(const BsdeSolution& solution, const PathBundle& bundle,
                                 const ModelParams& params);

/// Only the stock position Z1 / (sigma1 Sigma S); cheap, needs no swap matrix.
PathMatrix stock_hedge_from_solution(const BsdeSolution& solution, const PathBundle& bundle,
                                     const ModelParams& params);

/// Columns: step, alive, basis, condition, picard_iterations, last_delta.
void write_bsde_diagnostics_csv(std::ostream& os, const BsdeSolution& solution);

}  // namespace liqrep

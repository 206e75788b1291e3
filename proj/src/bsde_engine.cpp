#include "liqrep/bsde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "liqrep/error.hpp"
#include "liqrep/regression.hpp"
#include "liqrep/variance_swap.hpp"

namespace liqrep {

void BsdeConfig::validate() const {
    if (!(stop_level > 1.0)) throw Error(ErrorCode::InvalidParams, "stop level L must exceed 1");
    if (!(payoff_cap > 0.0)) throw Error(ErrorCode::InvalidParams, "payoff cap N must be positive");
    if (basis_degree < 1 || basis_degree > 6)
        throw Error(ErrorCode::InvalidParams, "basis degree must lie in [1,6]");
    if (picard_iters < 1) throw Error(ErrorCode::InvalidParams, "picard_iters must be at least 1");
    if (!(picard_tol >= 0.0)) throw Error(ErrorCode::InvalidParams, "picard_tol must be non-negative");
    if (!(ridge >= 0.0)) throw Error(ErrorCode::InvalidParams, "ridge must be non-negative");
}

Payoff payoff_identity() {
    return {"identity", [](double y) { return y; }, [](double) { return 1.0; }, 1.0};
}

Payoff payoff_constant(double c) {
    return {"constant", [c](double) { return c; }, [](double) { return 0.0; }, 0.0};
}

Payoff payoff_clipped_call(double strike, double cap) {
    return {"clipped_call",
            [strike, cap](double y) { return std::min(std::max(y - strike, 0.0), cap); },
            [strike, cap](double y) { return (y >= strike && y < strike + cap) ? 1.0 : 0.0; },
            1.0};
}

double TruncatedPayoff::operator()(double y) const {
    return std::abs(y) <= level ? base.h(y) : base.h(level);
}

TruncatedPayoff truncate_payoff(const Payoff& h, double N) {
    TruncatedPayoff t{h, N, 0.0};
    // sup |h| on [-N, N]; exact for piecewise-monotone payoffs whose kinks sit on the scan
    const int n = 20000;
    double m = std::max(std::abs(h.h(-N)), std::abs(h.h(N)));
    for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(h.h(-N + 2.0 * N * i / n)));
    t.bound = m;
    return t;
}

std::vector<std::size_t> stopping_index(const PathBundle& b, double L) {
    std::vector<std::size_t> tau(b.n_paths, b.grid.n_steps);
    const double inv = 1.0 / L;
    for (std::size_t p = 0; p < b.n_paths; ++p)
        for (std::size_t k = 0; k <= b.grid.n_steps; ++k) {
            const double sig = b.Sigma(p, k);
            if (b.S(p, k) <= inv || sig >= L || sig <= inv) {
                tau[p] = k;
                break;
            }
        }
    return tau;
}

std::vector<double> impact_adjusted_terminal(const PathBundle& b, double x, double lambda,
                                             const PathMatrix& hat_X) {
    if (hat_X.empty()) throw Error(ErrorCode::MissingHatHedge, "terminal condition needs the hat hedge");
    if (!hat_X.same_shape(b.S)) throw Error(ErrorCode::GridMismatch, "hat hedge grid differs from bundle");
    const std::size_t n = b.grid.n_steps;
    std::vector<double> out(b.n_paths);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double acc = 0.0;
        for (std::size_t i = 1; i <= n; ++i) acc += hat_X(p, i - 1) * (b.M(p, i) - b.M(p, i - 1));
        out[p] = b.S(p, n) - 2.0 * lambda * x * acc;
    }
    return out;
}

std::vector<double> terminal_condition(const PathBundle& b, const TruncatedPayoff& payoff, double x,
                                       double lambda, const PathMatrix& hat_X) {
    std::vector<double> s = impact_adjusted_terminal(b, x, lambda, hat_X);
    for (double& v : s) v = x * payoff(v);
    return s;
}

DriverState make_driver(const PathBundle& b, const ModelParams& params,
                        const std::vector<std::size_t>& tau, double x, double payoff_bound) {
    DriverState d;
    d.Lambda = PathMatrix(b.n_paths, b.grid.nodes());
    d.lambda = params.impact_fraction;
    d.x = x;
    d.payoff_bound = payoff_bound;
    for (std::size_t p = 0; p < b.n_paths; ++p)
        for (std::size_t k = 0; k < tau[p]; ++k)
            d.Lambda(p, k) = lambda_coeff(b.U(p, k), b.V(p, k), b.S(p, k), params);
    return d;
}

namespace {

double mean_and_stderr(const std::vector<double>& v, double& se) {
    const double n = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    const double m = s / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return m;
}

}  // namespace

BsdeSolution solve_quadratic_bsde(const PathBundle& b, const DriverState& driver,
                                  const std::vector<double>& terminal,
                                  const std::vector<std::size_t>& tau, const BsdeConfig& config) {
    config.validate();
    const std::size_t n = b.n_paths, steps = b.grid.n_steps, nodes = b.grid.nodes();
    if (terminal.size() != n || tau.size() != n)
        throw Error(ErrorCode::GridMismatch, "terminal values or stopping indices do not match the bundle");
    for (double h : terminal)
        if (!std::isfinite(h)) throw Error(ErrorCode::InvalidParams, "terminal value is not finite");
    if (!driver.Lambda.same_shape(b.S)) throw Error(ErrorCode::GridMismatch, "driver grid differs");

    BsdeSolution sol;
    sol.Y = PathMatrix(n, nodes);
    sol.Z1 = PathMatrix(n, nodes);
    sol.Z2 = PathMatrix(n, nodes);
    sol.Z3 = PathMatrix(n, nodes);
    sol.tau = tau;
    sol.contributions = terminal;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t k = std::min(tau[p], steps); k < nodes; ++k) sol.Y(p, k) = terminal[p];

    if (std::all_of(tau.begin(), tau.end(), [](std::size_t t) { return t == 0; })) {
        sol.degenerate_run = true;
        sol.y0 = mean_and_stderr(terminal, sol.y0_stderr);
        return sol;
    }

    const double dt = b.grid.dt();
    const double lam = driver.lambda;
    std::vector<std::uint32_t> rows;
    std::vector<double> next, py, y_prev, y_new, target, fitted, z[3];

    for (std::size_t kk = steps; kk-- > 0;) {
        const std::size_t k = kk;
        rows.clear();
        for (std::size_t p = 0; p < n; ++p)
            if (tau[p] > k) rows.push_back(static_cast<std::uint32_t>(p));
        if (rows.empty()) continue;
        if (rows.size() < config.min_paths)
            throw Error(ErrorCode::RegressionRankDeficient,
                        "node " + std::to_string(k) + " keeps only " + std::to_string(rows.size()) +
                            " alive paths");

        const NodeRegression reg(b, k, rows, config.basis_degree, config.ridge, config.threads);
        const std::size_t m = rows.size();
        next.resize(m);
        for (std::size_t i = 0; i < m; ++i) next[i] = sol.Y(rows[i], k + 1);
        reg.project(next, py);
        y_prev = py;
        target.resize(m);
        y_new.resize(m);
        for (auto& zj : z) zj.assign(m, 0.0);

        StepDiagnostics diag{k, m, reg.basis_size(), reg.condition_number(), {}};
        int growth = 0;
        for (int it = 0; it < config.picard_iters; ++it) {
            for (int j = 0; j < 3; ++j) {
                for (std::size_t i = 0; i < m; ++i)
                    target[i] = (next[i] - y_prev[i]) * b.noise.db(rows[i], k, j);
                reg.project(target, fitted);
                for (std::size_t i = 0; i < m; ++i) z[j][i] = fitted[i] / dt;
            }
            double delta = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                y_new[i] = py[i] + lam * driver.Lambda(rows[i], k) * z[0][i] * z[0][i] * dt;
                delta = std::max(delta, std::abs(y_new[i] - y_prev[i]));
            }
            std::swap(y_prev, y_new);
            if (!diag.picard_deltas.empty() && delta > diag.picard_deltas.back())
                ++growth;
            else
                growth = 0;
            diag.picard_deltas.push_back(delta);
            if (delta <= config.picard_tol) break;
            if (growth >= 3)
                throw Error(ErrorCode::PicardDiverged,
                            "Picard deltas grew three times in a row at node " + std::to_string(k));
        }
        const auto& d = diag.picard_deltas;
        if (d.size() >= 3 && d[1] > 0.0 && !(d[2] < d[1])) sol.picard_contracting = false;

        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t p = rows[i];
            sol.Y(p, k) = y_prev[i];
            sol.Z1(p, k) = z[0][i];
            sol.Z2(p, k) = z[1][i];
            sol.Z3(p, k) = z[2][i];
            sol.contributions[p] += lam * driver.Lambda(p, k) * z[0][i] * z[0][i] * dt;
        }
        sol.steps.push_back(std::move(diag));
    }
    std::reverse(sol.steps.begin(), sol.steps.end());

    double se = 0.0;
    mean_and_stderr(sol.contributions, se);
    sol.y0_stderr = se;
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) s += sol.Y(p, 0);
    sol.y0 = s / static_cast<double>(n);

    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t k = 0; k < tau[p]; ++k)
            sol.lambda_sup = std::max(sol.lambda_sup, std::abs(driver.Lambda(p, k)));
    const double cn = driver.payoff_bound;
    sol.smallness_holds = lam * 2.0 * sol.lambda_sup * cn * std::abs(driver.x) < 0.5;
    if (cn > 0.0) {
        const double bound = std::abs(driver.x) * cn;
        for (double y : sol.Y.data())
            if (std::abs(y) > bound * (1.0 + 1e-9) + 1e-12) ++sol.bound_violations;
    }
    return sol;
}

Strategy HedgeProcess::as_strategy() const {
    Strategy s;
    s.X = X;
    s.chi1 = chi1;
    s.chi2 = chi2;
    s.close_at_end();
    return s;
}

PathMatrix stock_hedge_from_solution(const BsdeSolution& sol, const PathBundle& b,
                                     const ModelParams& params) {
    PathMatrix X(b.n_paths, b.grid.nodes());
    const double s1 = params.correlation.sigma(0);
    for (std::size_t p = 0; p < b.n_paths; ++p)
        for (std::size_t k = 0; k < std::min(sol.tau[p], b.grid.n_steps); ++k) {
            const double denom = s1 * b.Sigma(p, k) * b.S(p, k);
            if (!(denom >= 1e-14)) throw Error(ErrorCode::DegenerateState, "sigma1 Sigma S is below 1e-14");
            X(p, k) = sol.Z1(p, k) / denom;
        }
    return X;
}

HedgeProcess hedge_from_solution(const BsdeSolution& sol, const PathBundle& b,
                                 const ModelParams& params) {
    HedgeProcess h{PathMatrix(b.n_paths, b.grid.nodes()), PathMatrix(b.n_paths, b.grid.nodes()),
                   PathMatrix(b.n_paths, b.grid.nodes())};
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        for (std::size_t k = 0; k < std::min(sol.tau[p], b.grid.n_steps); ++k) {
            const MarketState st{b.grid.t(k), b.U(p, k), b.V(p, k), b.RV(p, k), b.S(p, k)};
            const PsiMatrix psi = psi_matrix(st, params, b.grid.maturity1, b.grid.maturity2);
            const Vec3 Z{sol.Z1(p, k), sol.Z2(p, k), sol.Z3(p, k)};
            Hedge x;
            try {
                x = invert_hedge(Z, psi, st, params);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::SingularSystem || psi.status != PsiStatus::DegenerateState)
                    throw;
                x.X = Z[0] / psi.psi[2][0];
                ++h.degenerate_nodes;
            }
            if (x.swap_block_zero) ++h.swap_block_zero_nodes;
            h.X(p, k) = x.X;
            h.chi1(p, k) = x.chi1;
            h.chi2(p, k) = x.chi2;
        }
    }
    return h;
}

void write_bsde_diagnostics_csv(std::ostream& os, const BsdeSolution& sol) {
    os << "step,alive,basis,condition,picard_iterations,last_delta\n";
    for (const auto& s : sol.steps)
        os << s.step << ',' << s.alive << ',' << s.basis << ',' << format_double(s.condition) << ','
           << s.picard_deltas.size() << ','
           << format_double(s.picard_deltas.empty() ? 0.0 : s.picard_deltas.back()) << '\n';
}

}  // namespace liqrep

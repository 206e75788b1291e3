#include "liqrep/replication_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"

#include "liqrep/error.hpp"
#include "liqrep/order_book.hpp"
#include "liqrep/parallel.hpp"
#include "liqrep/variance_swap.hpp"

namespace liqrep {

Estimate estimate(const std::vector<double>& v) {
    if (v.empty()) return {};
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

HatSolution hat_solution(const PathBundle& b, const ModelParams& params, const Payoff& h,
                         const BsdeConfig& config) {
    config.validate();
    ModelParams frictionless = params;
    frictionless.illiquidity = 0.0;
    frictionless.impact_fraction = 0.0;

    const auto tau = stopping_index(b, config.stop_level);
    const TruncatedPayoff hN = truncate_payoff(h, config.payoff_cap);
    // lambda = 0 leaves S~ = S_T, so any placeholder hedge will do
    const PathMatrix none(b.n_paths, b.grid.nodes());
    const auto terminal = terminal_condition(b, hN, 1.0, 0.0, none);
    const DriverState driver = make_driver(b, frictionless, tau, 1.0, hN.bound);

    HatSolution hat;
    hat.solution = solve_quadratic_bsde(b, driver, terminal, tau, config);
    hat.X = stock_hedge_from_solution(hat.solution, b, frictionless);
    if (params.u_rate != params.v_rate) {
        HedgeProcess full = hedge_from_solution(hat.solution, b, frictionless);
        hat.chi1 = std::move(full.chi1);
        hat.chi2 = std::move(full.chi2);
    }
    hat.fingerprint = b.fingerprint();
    return hat;
}

Estimate h_prime_zero(const PathBundle& b, const HatSolution& hat, const Payoff& h,
                      const ModelParams& params, const BsdeConfig& config,
                      std::vector<double>* per_path) {
    if (!h.dh) throw Error(ErrorCode::MissingDerivative, "payoff '" + h.name + "' has no derivative");
    if (hat.fingerprint != b.fingerprint())
        throw Error(ErrorCode::InconsistentSeeds, "hat solution was computed on another bundle");
    const double lam = params.impact_fraction, dt = b.grid.dt();
    const std::size_t n = b.grid.n_steps;
    const auto& tau = hat.solution.tau;
    std::vector<double> term(b.n_paths);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double cost = 0.0, imp = 0.0;
        for (std::size_t k = 0; k < std::min(tau[p], n); ++k) {
            const double x = hat.X(p, k);
            cost += mu_coeff(b.U(p, k), params) * x * x * dt;
        }
        for (std::size_t i = 1; i <= n; ++i) imp += hat.X(p, i - 1) * (b.M(p, i) - b.M(p, i - 1));
        const double sT = b.S(p, n);
        const double slope = std::abs(sT) <= config.payoff_cap ? h.dh(sT) : 0.0;
        term[p] = lam * cost - 2.0 * lam * slope * imp;
    }
    const Estimate e = estimate(term);
    if (per_path) *per_path = std::move(term);
    return e;
}

std::vector<double> impact_error_samples(const PathBundle& b, const HatSolution& hat,
                                         const PathMatrix& X_x, double x, double lambda) {
    if (hat.fingerprint != b.fingerprint())
        throw Error(ErrorCode::InconsistentSeeds, "hat solution was computed on another bundle");
    Strategy s;
    s.X = X_x;
    s.close_at_end();
    const ImpactedQuotePath q = impacted_quote_path(b, s, lambda);
    const auto tilde = impact_adjusted_terminal(b, x, lambda, hat.X);
    std::vector<double> err(b.n_paths);
    const std::size_t n = b.grid.n_steps;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        const double d = q.post(p, n) - tilde[p];
        err[p] = d * d;
    }
    return err;
}

Estimate impact_error(const PathBundle& b, const HatSolution& hat, const PathMatrix& X_x, double x,
                      double lambda) {
    return estimate(impact_error_samples(b, hat, X_x, x, lambda));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return NAN;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(std::abs(x[i]));
        my += std::log(std::abs(y[i]));
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(std::abs(x[i])) - mx;
        sxy += dx * (std::log(std::abs(y[i])) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ReplicationReport replication_cost_curve(const PathBundle& b, const HatSolution& hat,
                                         const ModelParams& params, const Payoff& h,
                                         const std::vector<double>& xs_in, const BsdeConfig& config,
                                         std::size_t fd_points) {
    config.validate();
    if (hat.fingerprint != b.fingerprint())
        throw Error(ErrorCode::InconsistentSeeds, "hat solution was computed on another bundle");
    if (xs_in.empty()) throw Error(ErrorCode::InvalidParams, "need at least one position size x");
    for (double x : xs_in)
        if (!(x > 0.0)) throw Error(ErrorCode::InvalidParams, "position sizes x must be positive");
    std::vector<double> xs = xs_in;
    std::sort(xs.begin(), xs.end(), std::greater<>());
    if (fd_points < 2 || fd_points > xs.size())
        throw Error(ErrorCode::InvalidParams, "fd_points must lie in [2, number of x values]");

    const double lam = params.impact_fraction;
    const std::size_t n = b.n_paths, steps = b.grid.n_steps;
    const auto& tau = hat.solution.tau;
    const TruncatedPayoff hN = truncate_payoff(h, config.payoff_cap);

    ReplicationReport rep;
    rep.H0_limit = {hat.y0(), hat.y0_stderr()};
    rep.fd_points = fd_points;
    rep.stop_level = config.stop_level;
    rep.payoff_cap = config.payoff_cap;

    std::vector<std::vector<double>> gaps;  // per-path, for the fd rows
    for (double x : xs) {
        const auto terminal = terminal_condition(b, hN, x, lam, hat.X);
        const DriverState driver = make_driver(b, params, tau, x, hN.bound);
        const BsdeSolution sol = solve_quadratic_bsde(b, driver, terminal, tau, config);
        const PathMatrix X = stock_hedge_from_solution(sol, b, params);

        ReplicationRow row;
        row.x = x;
        row.Y0 = {sol.y0, sol.y0_stderr};
        row.H0 = {sol.y0 / x, sol.y0_stderr / x};
        std::vector<double> gap(n), dl2(n);
        for (std::size_t p = 0; p < n; ++p) {
            gap[p] = sol.contributions[p] / x - hat.solution.contributions[p];
            double acc = 0.0;
            for (std::size_t k = 0; k < std::min(tau[p], steps); ++k) {
                const double d = X(p, k) / x - hat.X(p, k);
                acc += d * d;
            }
            dl2[p] = acc / static_cast<double>(steps);
        }
        row.gap = estimate(gap);
        row.delta_l2 = estimate(dl2);
        row.impact_err = impact_error(b, hat, X, x, lam);
        row.smallness_holds = sol.smallness_holds;
        row.bound_violations = sol.bound_violations;
        row.stopped_paths = static_cast<std::size_t>(
            std::count_if(tau.begin(), tau.end(), [&](std::size_t t) { return t < steps; }));
        rep.rows.push_back(row);
        if (gaps.size() < fd_points) gaps.push_back(std::move(gap));
    }

    // gap(x) = a x + b x^2 over the fd rows; a is a fixed linear combination of
    // the gaps, so its standard error comes from the same per-path combination
    double s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < fd_points; ++i) {
        const double x = xs[i];
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }
    const double det = s2 * s4 - s3 * s3;
    std::vector<double> w(fd_points);
    for (std::size_t i = 0; i < fd_points; ++i) {
        const double x = xs[i];
        w[i] = (s4 * x - s3 * x * x) / det;
    }
    std::vector<double> a(n, 0.0);
    for (std::size_t i = 0; i < fd_points; ++i)
        for (std::size_t p = 0; p < n; ++p) a[p] += w[i] * gaps[i][p];
    rep.hprime_fd = estimate(a);

    if (h.dh) {
        std::vector<double> hp;
        rep.hprime_analytic = h_prime_zero(b, hat, h, params, config, &hp);
        for (std::size_t p = 0; p < n; ++p) a[p] -= hp[p];
        rep.hprime_difference = estimate(a);
    }

    std::vector<double> gx, gy, ix, iy;
    double num = 0.0, den = 0.0;
    for (const auto& r : rep.rows) {
        num += r.x * std::abs(r.gap.value);
        den += r.x * r.x;
        if (r.gap.value != 0.0) {
            gx.push_back(r.x);
            gy.push_back(r.gap.value);
        }
        if (r.impact_err.value > 0.0) {
            ix.push_back(r.x);
            iy.push_back(r.impact_err.value);
        }
    }
    rep.linear_bound_K = num / den;
    rep.gap_loglog_slope = loglog_slope(gx, gy);
    rep.impact_loglog_slope = loglog_slope(ix, iy);
    return rep;
}

ReplicationReport replication_cost_curve(const ModelParams& params, const TimeGrid& grid,
                                         const Payoff& h, const std::vector<double>& xs,
                                         std::size_t n_paths, std::uint64_t seed,
                                         const BsdeConfig& config, std::size_t fd_points) {
    const PathBundle b = simulate_paths(params, grid, n_paths, seed, config.threads);
    const HatSolution hat = hat_solution(b, params, h, config);
    return replication_cost_curve(b, hat, params, h, xs, config, fd_points);
}

Estimate plain_mc_payoff(const ModelParams& params, const TimeGrid& grid, const Payoff& h,
                         std::size_t n_paths, std::uint64_t seed, unsigned threads) {
    params.validate();
    grid.validate();
    if (n_paths == 0) throw Error(ErrorCode::ZeroPaths, "plain Monte Carlo needs at least one path");
    const double sq = std::sqrt(grid.dt());
    std::vector<double> sum(chunk_count(n_paths)), sum2(chunk_count(n_paths));
    parallel_chunks(n_paths, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        const PathStepper stepper(params, grid.dt());
        double s = 0.0, ss = 0.0;
        for (std::size_t p = begin; p < end; ++p) {
            PathState st = stepper.initial();
            for (std::size_t k = 0; k < grid.n_steps; ++k) {
                Vec3 z = standard_normals(seed, p, k);
                for (double& v : z) v *= sq;
                stepper.advance(st, multiply(params.correlation.Linv, z));
            }
            const double y = h.h(st.s);
            s += y;
            ss += y * y;
        }
        sum[c] = s;
        sum2[c] = ss;
    });
    const double n = static_cast<double>(n_paths);
    const double m = std::accumulate(sum.begin(), sum.end(), 0.0) / n;
    const double m2 = std::accumulate(sum2.begin(), sum2.end(), 0.0) / n;
    const double var = n > 1 ? std::max(m2 - m * m, 0.0) * n / (n - 1.0) : 0.0;
    return {m, std::sqrt(var / n)};
}

namespace {

nlohmann::json to_json(const Estimate& e) { return {{"value", e.value}, {"stderr", e.std_error}}; }

}  // namespace

void ReplicationReport::write_csv(std::ostream& os) const {
    os << "x,Y0,Y0_stderr,H0,H0_stderr,gap,gap_stderr,impact_err,impact_err_stderr,delta_l2,"
          "delta_l2_stderr,smallness_holds,bound_violations,stopped_paths\n";
    for (const auto& r : rows)
        os << format_double(r.x) << ',' << format_double(r.Y0.value) << ','
           << format_double(r.Y0.std_error) << ',' << format_double(r.H0.value) << ','
           << format_double(r.H0.std_error) << ',' << format_double(r.gap.value) << ','
           << format_double(r.gap.std_error) << ',' << format_double(r.impact_err.value) << ','
           << format_double(r.impact_err.std_error) << ',' << format_double(r.delta_l2.value) << ','
           << format_double(r.delta_l2.std_error) << ',' << (r.smallness_holds ? 1 : 0) << ','
           << r.bound_violations << ',' << r.stopped_paths << '\n';
}

std::string ReplicationReport::to_json() const {
    nlohmann::json j;
    j["H0_limit"] = liqrep::to_json(H0_limit);
    j["Hprime0_analytic"] = liqrep::to_json(hprime_analytic);
    j["Hprime0_fd"] = liqrep::to_json(hprime_fd);
    j["Hprime0_difference"] = liqrep::to_json(hprime_difference);
    j["slope"] = gap_loglog_slope;
    j["linear_bound_K"] = linear_bound_K;
    j["impact_slope"] = impact_loglog_slope;
    j["fd_points"] = fd_points;
    j["stop_level"] = stop_level;
    j["payoff_cap"] = payoff_cap;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"x", r.x},
                       {"Y0", liqrep::to_json(r.Y0)},
                       {"H0", liqrep::to_json(r.H0)},
                       {"gap", liqrep::to_json(r.gap)},
                       {"impact_err", liqrep::to_json(r.impact_err)},
                       {"delta_l2", liqrep::to_json(r.delta_l2)},
                       {"smallness_holds", r.smallness_holds},
                       {"bound_violations", r.bound_violations},
                       {"stopped_paths", r.stopped_paths}});
    j["rows"] = arr;
    return j.dump(2);
}

}  // namespace liqrep

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "liqrep/error.hpp"
#include "liqrep/replication_lab.hpp"

using namespace liqrep;

namespace {

ModelParams params(double lambda = 0.5) {
    ModelParams p;
    p.impact_fraction = lambda;
    p.correlation = decompose_correlation(correlation_matrix(-0.5, -0.3, 0.2));
    return p;
}

const std::vector<double> kXs{8.0, 4.0, 2.0, 1.0};

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no liqrep::Error thrown";
    return ErrorCode::InvalidParams;
}

}  // namespace

TEST(Hat, ConstantPayoff) {
    const ModelParams p = params();
    const auto b = simulate_paths(p, TimeGrid{1.0, 16}, 2000, 1);
    const HatSolution hat = hat_solution(b, p, payoff_constant(4.0), BsdeConfig{});
    for (double y : hat.solution.Y.data()) EXPECT_NEAR(y, 4.0, 1e-9);
    for (double x : hat.X.data()) EXPECT_NEAR(x, 0.0, 1e-9);
    EXPECT_EQ(hat.fingerprint, b.fingerprint());
    EXPECT_FALSE(hat.chi1.empty());
}

TEST(Hat, EqualRatesLeaveSwapHedgeEmpty) {
    ModelParams p = params();
    p.v_rate = p.u_rate;
    const auto b = simulate_paths(p, TimeGrid{1.0, 8}, 500, 2);
    const HatSolution hat = hat_solution(b, p, payoff_clipped_call(100.0, 30.0), BsdeConfig{});
    EXPECT_TRUE(hat.chi1.empty());
    EXPECT_TRUE(hat.chi2.empty());
    EXPECT_FALSE(hat.X.empty());
}

TEST(Hat, MatchesPlainMonteCarlo) {
    const ModelParams p = params();
    const TimeGrid g{1.0, 32};
    const auto h = payoff_clipped_call(100.0, 30.0);
    const auto b = simulate_paths(p, g, 20000, 3);
    const HatSolution hat = hat_solution(b, p, h, BsdeConfig{});
    const Estimate mc = plain_mc_payoff(p, g, h, 20000, 4);
    EXPECT_LT(std::abs(hat.y0() - mc.value), 3.0 * std::hypot(hat.y0_stderr(), mc.std_error));
}

TEST(PlainMc, StreamingReproducesStoredPaths) {
    const ModelParams p = params();
    const TimeGrid g{1.0, 16};
    const auto h = payoff_clipped_call(100.0, 30.0);
    const auto b = simulate_paths(p, g, 5000, 5);
    double s = 0.0;
    for (std::size_t q = 0; q < b.n_paths; ++q) s += h.h(b.S(q, 16));
    const Estimate mc = plain_mc_payoff(p, g, h, 5000, 5, 3);
    EXPECT_NEAR(mc.value, s / 5000.0, 1e-12);
    EXPECT_GT(mc.std_error, 0.0);
}

TEST(Replication, HatFromAnotherBundleIsRejected) {
    const ModelParams p = params();
    const auto h = payoff_clipped_call(100.0, 30.0);
    const auto b1 = simulate_paths(p, TimeGrid{1.0, 8}, 500, 6);
    const auto b2 = simulate_paths(p, TimeGrid{1.0, 8}, 500, 7);
    const HatSolution hat = hat_solution(b1, p, h, BsdeConfig{});
    EXPECT_EQ(code_of([&] { replication_cost_curve(b2, hat, p, h, kXs, BsdeConfig{}); }),
              ErrorCode::InconsistentSeeds);
    EXPECT_EQ(code_of([&] { h_prime_zero(b2, hat, h, p, BsdeConfig{}); }), ErrorCode::InconsistentSeeds);
}

TEST(Replication, MissingDerivative) {
    const ModelParams p = params();
    Payoff h = payoff_clipped_call(100.0, 30.0);
    h.dh = nullptr;
    const auto b = simulate_paths(p, TimeGrid{1.0, 8}, 500, 8);
    const HatSolution hat = hat_solution(b, p, h, BsdeConfig{});
    EXPECT_EQ(code_of([&] { h_prime_zero(b, hat, h, p, BsdeConfig{}); }), ErrorCode::MissingDerivative);
}

TEST(Replication, InvalidInputs) {
    const ModelParams p = params();
    const auto h = payoff_clipped_call(100.0, 30.0);
    const auto b = simulate_paths(p, TimeGrid{1.0, 8}, 500, 9);
    const HatSolution hat = hat_solution(b, p, h, BsdeConfig{});
    EXPECT_EQ(code_of([&] { replication_cost_curve(b, hat, p, h, {}, BsdeConfig{}); }),
              ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([&] { replication_cost_curve(b, hat, p, h, {1.0, 0.0}, BsdeConfig{}, 2); }),
              ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([&] { replication_cost_curve(b, hat, p, h, {1.0, 0.5}, BsdeConfig{}, 3); }),
              ErrorCode::InvalidParams);
}

TEST(Replication, NoLambdaReducesToHat) {
    const ModelParams p = params(0.0);
    const auto h = payoff_clipped_call(100.0, 30.0);
    const auto b = simulate_paths(p, TimeGrid{1.0, 16}, 3000, 10);
    const HatSolution hat = hat_solution(b, p, h, BsdeConfig{});
    const auto rep = replication_cost_curve(b, hat, p, h, kXs, BsdeConfig{});
    for (const auto& r : rep.rows) {
        EXPECT_NEAR(r.gap.value, 0.0, 1e-12);
        EXPECT_NEAR(r.H0.value, hat.y0(), 1e-9);
        EXPECT_EQ(r.impact_err.value, 0.0);
        EXPECT_NEAR(r.delta_l2.value, 0.0, 1e-18);
    }
    EXPECT_EQ(rep.hprime_analytic.value, 0.0);
    EXPECT_EQ(rep.hprime_analytic.std_error, 0.0);
}

TEST(Replication, NoIlliquidityReducesToHat) {
    ModelParams p = params();
    p.illiquidity = 0.0;
    const auto h = payoff_clipped_call(100.0, 30.0);
    const auto b = simulate_paths(p, TimeGrid{1.0, 16}, 3000, 11);
    const HatSolution hat = hat_solution(b, p, h, BsdeConfig{});
    const auto rep = replication_cost_curve(b, hat, p, h, kXs, BsdeConfig{});
    for (const auto& r : rep.rows) {
        EXPECT_NEAR(r.gap.value, 0.0, 1e-12);
        EXPECT_EQ(r.impact_err.value, 0.0);
    }
    EXPECT_EQ(rep.hprime_analytic.value, 0.0);
}

TEST(Replication, SmallRunShowsLinearGapAndCubicImpact) {
    const ModelParams p = params();
    const auto h = payoff_clipped_call(100.0, 30.0);
    const auto rep = replication_cost_curve(p, TimeGrid{1.0, 32}, h, kXs, 6000, 12, BsdeConfig{});
    ASSERT_EQ(rep.rows.size(), 4u);
    for (std::size_t i = 1; i < 4; ++i) {
        EXPECT_LT(std::abs(rep.rows[i].gap.value), std::abs(rep.rows[i - 1].gap.value));
        EXPECT_LT(rep.rows[i].delta_l2.value, rep.rows[i - 1].delta_l2.value);
    }
    EXPECT_GE(rep.gap_loglog_slope, 0.7);
    EXPECT_LE(rep.gap_loglog_slope, 1.3);
    EXPECT_GE(rep.impact_loglog_slope, 2.5);
    EXPECT_LT(std::abs(rep.hprime_difference.value), 3.0 * rep.hprime_difference.std_error + 1e-15);
}

TEST(Replication, ReportIsThreadIndependentAndSerializes) {
    const ModelParams p = params();
    const auto h = payoff_clipped_call(100.0, 30.0);
    BsdeConfig c1, c3;
    c3.threads = 3;
    const auto r1 = replication_cost_curve(p, TimeGrid{1.0, 8}, h, kXs, 5000, 13, c1);
    const auto r3 = replication_cost_curve(p, TimeGrid{1.0, 8}, h, kXs, 5000, 13, c3);
    EXPECT_EQ(r1.to_json(), r3.to_json());

    const auto j = nlohmann::json::parse(r1.to_json());
    for (const char* k : {"H0_limit", "Hprime0_analytic", "Hprime0_fd", "slope", "rows"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["rows"].size(), 4u);

    std::ostringstream os;
    r1.write_csv(os);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("x,Y0,", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}

TEST(Replication, LoglogSlope) {
    EXPECT_NEAR(loglog_slope({1, 2, 4}, {3, 24, 192}), 3.0, 1e-12);
    EXPECT_NEAR(loglog_slope({1, 2, 4}, {-1, -2, -4}), 1.0, 1e-12);
    EXPECT_TRUE(std::isnan(loglog_slope({1}, {1})));
}

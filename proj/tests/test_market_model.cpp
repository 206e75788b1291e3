#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "liqrep/error.hpp"
#include "liqrep/market_model.hpp"

using namespace liqrep;

namespace {

ModelParams base_params() {
    ModelParams p;
    p.correlation = decompose_correlation(correlation_matrix(-0.5, -0.3, 0.2));
    return p;
}

struct Moments {
    double mean, se;
};

Moments moments(const PathMatrix& m, std::size_t k, double shift = 0.0) {
    double s = 0, ss = 0;
    const double n = static_cast<double>(m.paths());
    for (std::size_t p = 0; p < m.paths(); ++p) {
        const double x = m(p, k) - shift;
        s += x;
        ss += x * x;
    }
    const double mean = s / n;
    return {mean, std::sqrt((ss / n - mean * mean) / (n - 1))};
}

}  // namespace

TEST(Simulate, FrozenStateIsConstant) {
    ModelParams p = base_params();
    p.u_vol = {0.0, 1.0};
    p.v_vol = {0.0, 1.0};
    p.u_rate = 0.0;
    p.v_rate = 0.0;
    const auto b = simulate_paths(p, TimeGrid{1.0, 16}, 10, 1);
    for (std::size_t q = 0; q < 10; ++q)
        for (std::size_t k = 0; k < 17; ++k) {
            EXPECT_EQ(b.U(q, k), p.u0);
            EXPECT_EQ(b.V(q, k), p.v0);
            EXPECT_DOUBLE_EQ(b.Sigma(q, k) * b.Sigma(q, k), p.u0 + p.v0);
        }
}

TEST(Simulate, ZeroIlliquidityGivesZeroDepth) {
    ModelParams p = base_params();
    p.illiquidity = 0.0;
    const auto b = simulate_paths(p, TimeGrid{1.0, 16}, 50, 2);
    for (double m : b.M.data()) EXPECT_EQ(m, 0.0);
}

TEST(Simulate, DeterministicGrowthMatchesOde) {
    ModelParams p = base_params();
    p.u_rate = 1.0;
    p.u_shift = 0.0;
    p.u_vol = {0.0, 1.0};
    const std::size_t n = 4096;
    const auto b = simulate_paths(p, TimeGrid{1.0, n}, 1, 3);
    const double exact = p.u0 * std::exp(1.0);
    const double err = std::abs(b.U(0, n) - exact);
    EXPECT_LT(err, 2.0 * exact / n);
    EXPECT_GT(err, 0.0);  // first-order scheme, not exact
}

TEST(Simulate, NodeInvariants) {
    ModelParams p = base_params();
    p.depth_map = DepthMap::square();
    p.u_vol = {1.0, 0.5};  // strong vol so truncation is exercised
    const auto b = simulate_paths(p, TimeGrid{1.0, 32}, 500, 4);
    for (std::size_t q = 0; q < 500; ++q) {
        for (std::size_t k = 0; k < 33; ++k) {
            EXPECT_GE(b.U(q, k), 0.0);
            EXPECT_EQ(b.Sigma(q, k), std::sqrt(b.U(q, k) + b.V(q, k)));
            EXPECT_EQ(b.M(q, k), p.illiquidity * b.U(q, k) * b.U(q, k));
            EXPECT_GT(b.S(q, k), 0.0);
            if (k > 0) EXPECT_GE(b.RV(q, k), b.RV(q, k - 1));
        }
        EXPECT_EQ(b.RV(q, 0), 0.0);
    }
}

TEST(Simulate, ErrorsAndDeterminism) {
    ModelParams p = base_params();
    try {
        simulate_paths(p, TimeGrid{1.0, 4}, 0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroPaths);
    }
    p.impact_fraction = 1.5;
    EXPECT_THROW(simulate_paths(p, TimeGrid{1.0, 4}, 3, 1), Error);
    p = base_params();
    const auto a = simulate_paths(p, TimeGrid{1.0, 8}, 5000, 9, 1);
    const auto c = simulate_paths(p, TimeGrid{1.0, 8}, 5000, 9, 3);
    EXPECT_EQ(a.S.data(), c.S.data());
    EXPECT_EQ(a.M.data(), c.M.data());
    EXPECT_EQ(a.fingerprint(), c.fingerprint());
}

TEST(Simulate, StockIsMartingale) {
    const ModelParams p = base_params();
    const auto b = simulate_paths(p, TimeGrid{1.0, 32}, 100000, 5);
    const auto m = moments(b.S, 32, p.s0);
    EXPECT_LT(std::abs(m.mean), 3.0 * m.se);
}

TEST(Simulate, DepthIsSubmartingale) {
    ModelParams p = base_params();
    ASSERT_TRUE(p.submartingale_flag());
    const auto b = simulate_paths(p, TimeGrid{1.0, 32}, 50000, 6);
    const auto m = moments(b.M, 32, b.M(0, 0));
    EXPECT_GE(m.mean, -3.0 * m.se);
}

TEST(Simulate, WeakConvergenceFirstOrder) {
    // E[RV_T] for dU = gamma(U + eta)dt: exact integral of the mean ODE
    ModelParams p = base_params();
    p.u_rate = 2.0;
    p.u_shift = 0.0;
    p.v_rate = -1.0;
    p.v_shift = 0.0;
    p.u_vol = {0.0, 1.0};
    p.v_vol = {0.0, 1.0};
    const double exact = p.u0 * std::expm1(2.0) / 2.0 + p.v0 * (-std::expm1(-1.0));
    double prev = 0.0;
    for (std::size_t n : {16u, 32u, 64u}) {
        const auto b = simulate_paths(p, TimeGrid{1.0, n}, 1, 1);
        const double err = std::abs(b.RV(0, n) - exact);
        if (prev > 0.0) EXPECT_NEAR(prev / err, 2.0, 0.2);
        prev = err;
    }
}

TEST(Coefficients, MuExamples) {
    ModelParams p = base_params();
    p.illiquidity = 0.01;
    p.u_rate = 2.0;
    p.u_shift = 0.5;
    EXPECT_DOUBLE_EQ(mu_coeff(1.0, p), 0.03);

    p = base_params();
    p.depth_map = DepthMap::square();
    p.u_vol = {1.0, 0.5};
    p.illiquidity = 1.0;
    p.u_rate = 0.0;
    EXPECT_DOUBLE_EQ(mu_coeff(1.0, p), 1.0);
}

TEST(Coefficients, ZetaExamples) {
    ModelParams p = base_params();
    p.illiquidity = 0.0;
    EXPECT_EQ(zeta_coeff(0.3, p), 0.0);
    p.illiquidity = 0.01;
    p.u_vol = {1.0, 0.5};
    EXPECT_NEAR(zeta_coeff(0.04, p), 0.0004, 1e-18);
    p.illiquidity = 1.0;
    p.depth_map = DepthMap::square();
    p.u_vol = {1.0, 1.0};
    EXPECT_DOUBLE_EQ(zeta_coeff(2.0, p), 16.0);
}

TEST(Coefficients, LambdaExamples) {
    ModelParams p = base_params();
    p.correlation = decompose_correlation(correlation_matrix(0, 0, 0));
    p.illiquidity = 0.0;
    EXPECT_EQ(lambda_coeff(0.02, 0.02, 100.0, p), 0.0);

    // mu = eps * gamma (u + eta) = 0.002 with eps = 0.1, gamma = 1, u = 0.02
    p.illiquidity = 0.1;
    p.u_rate = 1.0;
    p.u_shift = 0.0;
    ASSERT_DOUBLE_EQ(mu_coeff(0.02, p), 0.002);
    EXPECT_NEAR(lambda_coeff(0.02, 0.02, 100.0, p), 5e-6, 1e-18);
    EXPECT_DOUBLE_EQ(lambda_coeff(0.02, 0.02, 200.0, p), lambda_coeff(0.02, 0.02, 100.0, p) / 4.0);
    try {
        lambda_coeff(0.0, 0.0, 100.0, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateState);
    }
    EXPECT_THROW(lambda_coeff(0.02, 0.02, 0.0, p), Error);
}

TEST(Coefficients, DriftOfDepthMatchesMu) {
    // one small step from the initial state: E[dM]/dt = mu(U0) up to O(dt)
    ModelParams p = base_params();
    p.depth_map = DepthMap::square();
    p.u_vol = {0.5, 1.0};
    const double dt = 1e-3;
    const auto b = simulate_paths(p, TimeGrid{dt, 1}, 200000, 7);
    const auto m = moments(b.M, 1, b.M(0, 0));
    const double mu = mu_coeff(p.u0, p);
    EXPECT_LT(std::abs(m.mean / dt - mu), 3.0 * m.se / dt);
}

TEST(Coefficients, CustomDepthMap) {
    ModelParams p = base_params();
    p.depth_map = DepthMap::custom([](double u) { return std::exp(u); },
                                   [](double u) { return std::exp(u); },
                                   [](double u) { return std::exp(u); });
    p.u_vol = {1.0, 1.0};
    const double u = 0.3;
    const double expect = p.illiquidity * std::exp(u) * p.u_rate * (u + p.u_shift) +
                          0.5 * p.illiquidity * std::exp(u) * u * u;
    EXPECT_DOUBLE_EQ(mu_coeff(u, p), expect);
    EXPECT_FALSE(p.submartingale_flag());
}

TEST(Params, Validation) {
    ModelParams p = base_params();
    EXPECT_NO_THROW(p.validate());
    p.u_vol = {1.0, 0.7};
    EXPECT_FALSE(p.vol_conditions_hold());
    EXPECT_THROW(p.validate(), Error);
    p = base_params();
    p.illiquidity = -1.0;
    EXPECT_THROW(p.validate(), Error);
    p = base_params();
    p.v0 = 0.0;
    EXPECT_THROW(p.validate(), Error);
}

TEST(Export, CsvLayout) {
    const auto b = simulate_paths(base_params(), TimeGrid{1.0, 2}, 2, 1);
    std::ostringstream os;
    write_paths_csv(os, b);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "path,step,t,S,U,V,Sigma,M,RV");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 7);
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

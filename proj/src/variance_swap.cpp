#include "liqrep/variance_swap.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "liqrep/error.hpp"

namespace liqrep {

double growth_integral(double c, double T, double t) {
    if (std::abs(c) < kSmallRate) return (T - t) + 0.5 * c * (T * T - t * t);
    return std::exp(c * t) * std::expm1(c * (T - t)) / c;
}

double loading_factor(double c, double T, double t) {
    const double tau = T - t;
    if (std::abs(c) < kSmallRate) return tau + 0.5 * c * tau * tau;
    return std::expm1(c * tau) / c;
}

TildeState tilde_state(double t, double u, double v, const ModelParams& params) {
    return {std::exp(-params.u_rate * t) * (u + params.u_shift),
            std::exp(-params.v_rate * t) * (v + params.v_shift)};
}

double swap_price(const MarketState& st, const ModelParams& params, const SwapSpec& spec) {
    if (st.t > spec.maturity)
        throw Error(ErrorCode::MaturityPassed, "swap price requested after maturity");
    const double T = spec.maturity;
    const double tau = T - st.t;
    // U~ A_gamma(T, t) = (U + eta) e^{-gamma t} A_gamma(T, t)
    const double u_part = (st.u + params.u_shift) * loading_factor(params.u_rate, T, st.t) -
                          params.u_shift * tau;
    const double v_part = (st.v + params.v_shift) * loading_factor(params.v_rate, T, st.t) -
                          params.v_shift * tau;
    return st.rv + u_part + v_part - spec.strike;
}

PathMatrix swap_price_path(const PathBundle& b, const ModelParams& params, const SwapSpec& spec) {
    PathMatrix G(b.n_paths, b.grid.nodes());
    for (std::size_t p = 0; p < b.n_paths; ++p)
        for (std::size_t k = 0; k < b.grid.nodes(); ++k)
            G(p, k) = swap_price({b.grid.t(k), b.U(p, k), b.V(p, k), b.RV(p, k), b.S(p, k)},
                                 params, spec);
    return G;
}

double PsiMatrix::scaled_det() const {
    double norms = 1.0;
    for (const auto& row : psi) norms *= std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
    if (norms == 0.0) return 0.0;
    return std::abs(det) / norms;
}

PsiMatrix psi_matrix(const MarketState& st, const ModelParams& params, double T1, double T2) {
    const auto& d = params.correlation;
    const double phi_u = params.u_vol(st.u);
    const double theta_v = params.v_vol(st.v);
    const double sigma_s = std::sqrt(std::max(st.u + st.v, 0.0)) * st.s;
    const double mats[2] = {T1, T2};

    PsiMatrix m;
    for (int i = 0; i < 2; ++i) {
        const double lg = loading_factor(params.u_rate, mats[i], st.t);
        const double la = loading_factor(params.v_rate, mats[i], st.t);
        for (int j = 0; j < 3; ++j) m.psi[i][j] = lg * d.phi(j) * phi_u + la * d.theta(j) * theta_v;
    }
    for (int j = 0; j < 3; ++j) m.psi[2][j] = d.sigma(j) * sigma_s;
    m.det = determinant(m.psi);

    if (params.u_rate == params.v_rate)
        m.status = PsiStatus::SingularConfig;
    else if (!(phi_u > 0.0) || !(theta_v > 0.0) || !(sigma_s > 0.0))
        m.status = PsiStatus::DegenerateState;
    return m;
}

void require_invertible(const PsiMatrix& psi) {
    switch (psi.status) {
        case PsiStatus::SingularConfig:
            throw Error(ErrorCode::SingularConfig,
                        "alpha == gamma makes the two swaps redundant; psi is singular");
        case PsiStatus::DegenerateState:
            throw Error(ErrorCode::DegenerateState, "Phi(U), Theta(V) or Sigma S vanishes");
        case PsiStatus::Ok: break;
    }
}

double psi_determinant_formula(const MarketState& st, const ModelParams& params, double T1,
                               double T2) {
    const auto& d = params.correlation;
    const double l1g = loading_factor(params.u_rate, T1, st.t);
    const double l2g = loading_factor(params.u_rate, T2, st.t);
    const double l1a = loading_factor(params.v_rate, T1, st.t);
    const double l2a = loading_factor(params.v_rate, T2, st.t);
    const double sigma_s = std::sqrt(std::max(st.u + st.v, 0.0)) * st.s;
    return d.sigma(0) * sigma_s * d.phi(1) * d.theta(2) * params.u_vol(st.u) *
           params.v_vol(st.v) * (l1g * l2a - l1a * l2g);
}

double hedge_quadratic_coeff(double u, const ModelParams& params) {
    return params.impact_fraction * depth_vol_coeff(u, params);
}

Vec3 hedge_to_z(const Hedge& h, const PsiMatrix& psi, const MarketState& st,
                const ModelParams& params) {
    const double q = hedge_quadratic_coeff(st.u, params);
    const auto& d = params.correlation;
    Vec3 z{};
    for (int j = 0; j < 3; ++j)
        z[j] = psi.psi[2][j] * h.X - d.phi(j) * q * h.X * h.X + h.chi1 * psi.psi[0][j] +
               h.chi2 * psi.psi[1][j];
    return z;
}

Hedge invert_hedge(const Vec3& Z, const PsiMatrix& psi, const MarketState& st,
                   const ModelParams& params, std::optional<double> x_known) {
    Hedge h;
    if (x_known) {
        h.X = *x_known;
    } else {
        const double s1 = psi.psi[2][0];
        if (!(std::abs(s1) >= 1e-14))
            throw Error(ErrorCode::DegenerateState, "sigma1 Sigma S is below 1e-14");
        h.X = Z[0] / s1;
    }
    const double q = hedge_quadratic_coeff(st.u, params);
    const auto& d = params.correlation;

    // rows j = 2, 3; unknowns (chi1, chi2)
    double a[2][2], r[2];
    for (int j = 1; j < 3; ++j) {
        a[j - 1][0] = psi.psi[0][j];
        a[j - 1][1] = psi.psi[1][j];
        r[j - 1] = Z[j] - psi.psi[2][j] * h.X + d.phi(j) * q * h.X * h.X;
    }
    double scale = 0.0;
    for (auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) {
        h.swap_block_zero = true;
        return h;
    }
    if (std::abs(a[1][0]) > std::abs(a[0][0])) {
        std::swap(a[0], a[1]);
        std::swap(r[0], r[1]);
    }
    const double tol = 1e-13 * scale;
    if (!(std::abs(a[0][0]) > tol))
        throw Error(ErrorCode::SingularSystem, "swap hedge system has a zero column");
    const double f = a[1][0] / a[0][0];
    const double a11 = a[1][1] - f * a[0][1];
    const double r1 = r[1] - f * r[0];
    if (!(std::abs(a11) > tol)) throw Error(ErrorCode::SingularSystem, "swap hedge system is singular");
    h.chi2 = r1 / a11;
    h.chi1 = (r[0] - a[0][1] * h.chi2) / a[0][0];
    return h;
}

}  // namespace liqrep

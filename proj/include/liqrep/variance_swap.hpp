#pragma once

#include <optional>

#include "liqrep/market_model.hpp"
#include "liqrep/stochastic_kernel.hpp"

namespace liqrep {

struct SwapSpec {
    double maturity = 1.25;
    double strike = 0.04;
};

/// Node state feeding the swap formulas.
struct MarketState {
    double t = 0.0;
    double u = 0.0;
    double v = 0.0;
    double rv = 0.0;
    double s = 0.0;
};

inline constexpr double kSmallRate = 1e-10;

/// (e^{cT} - e^{ct}) / c, with the c -> 0 limit T - t.
double growth_integral(double c, double T, double t);
/// e^{-ct} (e^{cT} - e^{ct}) / c = (e^{c(T-t)} - 1) / c: the sensitivity of
/// the remaining expected variance to the current state.
double loading_factor(double c, double T, double t);

struct TildeState {
    double u = 0.0;  // e^{-gamma t}(U + eta)
    double v = 0.0;  // e^{-alpha t}(V + a)
};
TildeState tilde_state(double t, double u, double v, const ModelParams& params);

/// Unaffected price: realized variance so far plus the expected remainder,
/// minus the strike. Throws MaturityPassed for t > T_i.
double swap_price(const MarketState& state, const ModelParams& params, const SwapSpec& spec);

/// Price along every path and node of the bundle.
PathMatrix swap_price_path(const PathBundle& bundle, const ModelParams& params,
                           const SwapSpec& spec);

enum class PsiStatus { Ok, SingularConfig, DegenerateState };

/// Loadings of (G1, G2, S) on the independent drivers (B1, B2, B3). Rows 0, 1
/// are the swaps, row 2 the stock. The swaps never load on B1.
struct PsiMatrix {
    Mat3 psi{};
    double det = 0.0;
    PsiStatus status = PsiStatus::Ok;

    bool invertible() const { return status == PsiStatus::Ok && det != 0.0; }
    /// |det| divided by the product of the row norms.
    double scaled_det() const;
};

/// Never throws; degenerate inputs are reported in `status`.
PsiMatrix psi_matrix(const MarketState& state, const ModelParams& params, double T1, double T2);

/// Throws SingularConfig (alpha == gamma) or DegenerateState.
void require_invertible(const PsiMatrix& psi);

/// Product formula for det psi.
double psi_determinant_formula(const MarketState& state, const ModelParams& params, double T1,
                               double T2);

struct Hedge {
    double X = 0.0;
    double chi1 = 0.0;
    double chi2 = 0.0;
    bool swap_block_zero = false;  // no swap loading at this node, chi set to 0
};

/// Coefficient of -phi_j X^2 in Z_j: the impact lambda times the loading of M on W2.
double hedge_quadratic_coeff(double u, const ModelParams& params);

/// Z_j = sigma_j Sigma S X - phi_j q X^2 + chi1 psi_{1,j} + chi2 psi_{2,j}.
Vec3 hedge_to_z(const Hedge& h, const PsiMatrix& psi, const MarketState& state,
                const ModelParams& params);

/// Inverse of hedge_to_z. X from Z1 (or x_known), then the 2x2 swap system by
/// elimination with partial pivoting. Throws DegenerateState or SingularSystem.
Hedge invert_hedge(const Vec3& Z, const PsiMatrix& psi, const MarketState& state,
                   const ModelParams& params, std::optional<double> x_known = std::nullopt);

}  // namespace liqrep

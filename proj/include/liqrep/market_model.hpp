#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include "liqrep/path_matrix.hpp"
#include "liqrep/stochastic_kernel.hpp"

namespace liqrep {

/// Strictly increasing C^2 map from the U state to market depth (before the
/// illiquidity scale is applied).
class DepthMap {
public:
    enum class Kind { Identity, Square, Custom };

    static DepthMap identity();
    static DepthMap square();
    static DepthMap custom(std::function<double(double)> f, std::function<double(double)> d1,
                           std::function<double(double)> d2);

    Kind kind() const { return kind_; }
    double value(double u) const;
    double first(double u) const;
    double second(double u) const;
    std::string name() const;

private:
    Kind kind_ = Kind::Identity;
    std::function<double(double)> f_, d1_, d2_;
};

/// Diffusion coefficient of the form scale * u^exponent evaluated at max(u, 0).
struct PowerVol {
    double scale = 0.0;
    double exponent = 0.5;

    double operator()(double u) const;
    /// Power in [0, 1/2] or the Lipschitz linear case.
    bool admissible() const;
};

struct ModelParams {
    // dU = u_rate (U + u_shift) dt + u_vol(U) dW2
    double u_rate = 0.5;
    double u_shift = 0.02;
    // dV = v_rate (V + v_shift) dt + v_vol(V) dW3
    double v_rate = -1.0;
    double v_shift = -0.02;
    double illiquidity = 1.0;      // M = illiquidity * depth_map(U)
    double impact_fraction = 0.5;  // share of book displacement that persists
    DepthMap depth_map = DepthMap::identity();
    PowerVol u_vol{0.5, 1.0};
    PowerVol v_vol{0.5, 1.0};
    double s0 = 100.0;
    double u0 = 0.02;
    double v0 = 0.02;
    CorrelationDecomposition correlation = decompose_correlation(correlation_matrix(0.0, 0.0, 0.0));

    /// Throws InvalidParams naming the violated constraint.
    void validate() const;
    bool vol_conditions_hold() const { return u_vol.admissible() && v_vol.admissible(); }
    /// M is a submartingale for the identity depth map with positive drift constants.
    bool submartingale_flag() const;
};

/// Grid processes for many scenarios. U and V hold the positive parts of the
/// full-truncation Euler states, so Sigma^2 = U + V and M = eps * Gamma(U)
/// hold node-exactly.
struct PathBundle {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    PathMatrix S, U, V, Sigma, M, RV;
    NoiseBlock noise;

    /// Identifies the random numbers behind the bundle.
    std::uint64_t fingerprint() const;
};

struct PathState {
    double s = 0.0;
    double u = 0.0;  // raw Euler state, may dip below zero
    double v = 0.0;
    double rv = 0.0;

    double u_pos() const { return u > 0.0 ? u : 0.0; }
    double v_pos() const { return v > 0.0 ? v : 0.0; }
};

/// One full-truncation Euler step for (U, V), exact-log step for S, left-point
/// accumulation of realized variance.
class PathStepper {
public:
    PathStepper(const ModelParams& params, double dt) : params_(params), dt_(dt) {}

    PathState initial() const { return {params_.s0, params_.u0, params_.v0, 0.0}; }
    void advance(PathState& state, const Vec3& dW) const;

private:
    const ModelParams& params_;
    double dt_;
};

/// Throws ZeroPaths or InvalidParams.
PathBundle simulate_paths(const ModelParams& params, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed, unsigned threads = 1);

// Coefficients of the driver, evaluated in the U variable.
double mu_coeff(double u, const ModelParams& params);
double zeta_coeff(double u, const ModelParams& params);
/// Loading of dM on dW2: eps * Gamma'(u) * Phi(u).
double depth_vol_coeff(double u, const ModelParams& params);
/// mu / (sigma1^2 (u + v) s^2); throws DegenerateState for s or u+v below 1e-14.
double lambda_coeff(double u, double v, double s, const ModelParams& params);

struct MarketCoefficients {
    const ModelParams& params;

    double mu(double u) const { return mu_coeff(u, params); }
    double zeta(double u) const { return zeta_coeff(u, params); }
    double Lambda(double u, double v, double s) const { return lambda_coeff(u, v, s, params); }
};

/// Columns: path, step, t, S, U, V, Sigma, M, RV.
void write_paths_csv(std::ostream& os, const PathBundle& bundle);

/// Fixed 17 significant digit formatting used by every CSV writer.
std::string format_double(double x);

}  // namespace liqrep

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "liqrep/path_matrix.hpp"

namespace liqrep {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

Mat3 multiply(const Mat3& a, const Mat3& b);
Mat3 transpose(const Mat3& a);
Vec3 multiply(const Mat3& a, const Vec3& v);
double determinant(const Mat3& a);

/// Correlation matrix R of the model drivers W together with the upper
/// triangular factor L satisfying R^{-1} = L^T L and its inverse.
///
/// Row 0 of L^{-1} holds the stock loadings (sigma), row 1 the U loadings
/// (phi) and row 2 the V loadings (theta). Entries below the diagonal are zero,
/// so phi(0) = theta(0) = theta(1) = 0 by construction.
struct CorrelationDecomposition {
    Mat3 R{};
    Mat3 L{};
    Mat3 Linv{};

    double sigma(int j) const { return Linv[0][j]; }
    double phi(int j) const { return Linv[1][j]; }
    double theta(int j) const { return Linv[2][j]; }
};

inline constexpr double kCholeskyPivotTol = 1e-12;
inline constexpr double kSymmetryTol = 1e-12;

/// Throws NotSymmetric / NotPositiveDefinite.
CorrelationDecomposition decompose_correlation(const Mat3& R);

/// Convenience builder from the three off-diagonal correlations.
Mat3 correlation_matrix(double rho12, double rho13, double rho23);

struct TimeGrid {
    double horizon = 1.0;
    std::size_t n_steps = 64;
    double maturity1 = 1.25;
    double maturity2 = 1.5;

    double dt() const { return horizon / static_cast<double>(n_steps); }
    double t(std::size_t k) const { return horizon * static_cast<double>(k) / static_cast<double>(n_steps); }
    std::size_t nodes() const { return n_steps + 1; }

    /// Throws InvalidParams when T <= 0, n_steps == 0, or maturities are not
    /// distinct and beyond the horizon.
    void validate() const;
};

// Counter-based Gaussian generator: the draw for (seed, path, step, lane) is a
// pure function of those four integers.
std::uint64_t mix64(std::uint64_t z);
Vec3 standard_normals(std::uint64_t seed, std::uint64_t path, std::uint64_t step);

/// Independent increments dB (variance dt per component) and the correlated
/// increments dW = L^{-1} dB, indexed by (path, step).
struct NoiseBlock {
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> dB;  // (path * n_steps + step) * 3 + component
    std::vector<double> dW;

    Vec3 db(std::size_t p, std::size_t k) const {
        const double* q = dB.data() + (p * n_steps + k) * 3;
        return {q[0], q[1], q[2]};
    }
    Vec3 dw(std::size_t p, std::size_t k) const {
        const double* q = dW.data() + (p * n_steps + k) * 3;
        return {q[0], q[1], q[2]};
    }
    double db(std::size_t p, std::size_t k, int j) const { return dB[(p * n_steps + k) * 3 + j]; }
};

/// Throws ZeroPaths when n_paths == 0.
NoiseBlock draw_noise(const TimeGrid& grid, const CorrelationDecomposition& decomp,
                      std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

}  // namespace liqrep

#include "liqrep/stochastic_kernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "liqrep/error.hpp"
#include "liqrep/parallel.hpp"

namespace liqrep {

Mat3 multiply(const Mat3& a, const Mat3& b) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

Mat3 transpose(const Mat3& a) {
    Mat3 t{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
    return t;
}

Vec3 multiply(const Mat3& a, const Vec3& v) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i) out[i] = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    return out;
}

double determinant(const Mat3& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

Mat3 correlation_matrix(double rho12, double rho13, double rho23) {
    return Mat3{{{1.0, rho12, rho13}, {rho12, 1.0, rho23}, {rho13, rho23, 1.0}}};
}

namespace {

double checked_pivot(double radicand, int index) {
    if (!(radicand > kCholeskyPivotTol)) {
        std::ostringstream msg;
        msg << "correlation matrix pivot " << index << " is " << radicand;
        throw Error(ErrorCode::NotPositiveDefinite, msg.str());
    }
    return std::sqrt(radicand);
}

Mat3 invert_upper(const Mat3& u) {
    Mat3 inv{};
    for (int i = 0; i < 3; ++i) inv[i][i] = 1.0 / u[i][i];
    inv[0][1] = -u[0][1] * inv[1][1] * inv[0][0];
    inv[1][2] = -u[1][2] * inv[2][2] * inv[1][1];
    inv[0][2] = -(u[0][1] * inv[1][2] + u[0][2] * inv[2][2]) * inv[0][0];
    return inv;
}

}  // namespace

CorrelationDecomposition decompose_correlation(const Mat3& R) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(R[i][i] - 1.0) > kSymmetryTol)
            throw Error(ErrorCode::InvalidParams, "correlation matrix must have unit diagonal");
        for (int j = i + 1; j < 3; ++j) {
            if (std::abs(R[i][j] - R[j][i]) > kSymmetryTol)
                throw Error(ErrorCode::NotSymmetric, "correlation matrix is not symmetric");
        }
    }

    // R = U U^T with U upper triangular; U is L^{-1}.
    Mat3 u{};
    u[2][2] = checked_pivot(R[2][2], 2);
    u[1][2] = R[1][2] / u[2][2];
    u[0][2] = R[0][2] / u[2][2];
    u[1][1] = checked_pivot(R[1][1] - u[1][2] * u[1][2], 1);
    u[0][1] = (R[0][1] - u[0][2] * u[1][2]) / u[1][1];
    u[0][0] = checked_pivot(R[0][0] - u[0][1] * u[0][1] - u[0][2] * u[0][2], 0);

    CorrelationDecomposition d;
    d.R = R;
    d.Linv = u;
    d.L = invert_upper(u);
    return d;
}

void TimeGrid::validate() const {
    if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidParams, "grid horizon must be positive");
    if (n_steps < 1) throw Error(ErrorCode::InvalidParams, "grid needs at least one step");
    if (!(maturity1 > horizon) || !(maturity2 > horizon))
        throw Error(ErrorCode::InvalidParams, "swap maturities must exceed the horizon");
    if (maturity1 == maturity2)
        throw Error(ErrorCode::InvalidParams, "swap maturities must differ");
}

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

inline double to_unit_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Vec3 standard_normals(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    const std::uint64_t key = mix64(mix64(seed) ^ mix64(path + 0x632be59bd9b4e019ULL));
    const std::uint64_t base = mix64(key ^ (step * 0xd1342543de82ef95ULL));
    const double u0 = to_unit_open(mix64(base + 1));
    const double u1 = to_unit_open(mix64(base + 2));
    const double u2 = to_unit_open(mix64(base + 3));
    const double u3 = to_unit_open(mix64(base + 4));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double r0 = std::sqrt(-2.0 * std::log(u0));
    const double r1 = std::sqrt(-2.0 * std::log(u2));
    return {r0 * std::cos(two_pi * u1), r0 * std::sin(two_pi * u1), r1 * std::cos(two_pi * u3)};
}

NoiseBlock draw_noise(const TimeGrid& grid, const CorrelationDecomposition& decomp,
                      std::size_t n_paths, std::uint64_t seed, unsigned threads) {
    if (n_paths == 0) throw Error(ErrorCode::ZeroPaths, "noise block needs at least one path");
    if (grid.n_steps == 0) throw Error(ErrorCode::InvalidParams, "grid needs at least one step");
    NoiseBlock block;
    block.n_paths = n_paths;
    block.n_steps = grid.n_steps;
    block.seed = seed;
    block.dB.resize(n_paths * grid.n_steps * 3);
    block.dW.resize(n_paths * grid.n_steps * 3);
    const double sq = std::sqrt(grid.dt());
    parallel_chunks(n_paths, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t k = 0; k < grid.n_steps; ++k) {
                Vec3 z = standard_normals(seed, p, k);
                for (double& v : z) v *= sq;
                const Vec3 w = multiply(decomp.Linv, z);
                const std::size_t off = (p * grid.n_steps + k) * 3;
                for (int j = 0; j < 3; ++j) {
                    block.dB[off + j] = z[j];
                    block.dW[off + j] = w[j];
                }
            }
        }
    });
    return block;
}

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::ZeroPaths: return "ZeroPaths";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::DegenerateState: return "DegenerateState";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::MaturityPassed: return "MaturityPassed";
        case ErrorCode::SingularConfig: return "SingularConfig";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::MissingHatHedge: return "MissingHatHedge";
        case ErrorCode::RegressionRankDeficient: return "RegressionRankDeficient";
        case ErrorCode::PicardDiverged: return "PicardDiverged";
        case ErrorCode::NotSubmartingaleParams: return "NotSubmartingaleParams";
        case ErrorCode::MissingDerivative: return "MissingDerivative";
        case ErrorCode::InconsistentSeeds: return "InconsistentSeeds";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

}  // namespace liqrep

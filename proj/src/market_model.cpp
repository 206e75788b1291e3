#include "liqrep/market_model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <ostream>

#include "liqrep/error.hpp"
#include "liqrep/parallel.hpp"

namespace liqrep {

DepthMap DepthMap::identity() { return DepthMap{}; }

DepthMap DepthMap::square() {
    DepthMap m;
    m.kind_ = Kind::Square;
    return m;
}

DepthMap DepthMap::custom(std::function<double(double)> f, std::function<double(double)> d1,
                          std::function<double(double)> d2) {
    DepthMap m;
    m.kind_ = Kind::Custom;
    m.f_ = std::move(f);
    m.d1_ = std::move(d1);
    m.d2_ = std::move(d2);
    return m;
}

double DepthMap::value(double u) const {
    switch (kind_) {
        case Kind::Identity: return u;
        case Kind::Square: return u * u;
        case Kind::Custom: return f_(u);
    }
    return u;
}

double DepthMap::first(double u) const {
    switch (kind_) {
        case Kind::Identity: return 1.0;
        case Kind::Square: return 2.0 * u;
        case Kind::Custom: return d1_(u);
    }
    return 1.0;
}

double DepthMap::second(double u) const {
    switch (kind_) {
        case Kind::Identity: return 0.0;
        case Kind::Square: return 2.0;
        case Kind::Custom: return d2_(u);
    }
    return 0.0;
}

std::string DepthMap::name() const {
    switch (kind_) {
        case Kind::Identity: return "identity";
        case Kind::Square: return "square";
        case Kind::Custom: return "custom";
    }
    return "identity";
}

double PowerVol::operator()(double u) const {
    if (scale == 0.0) return 0.0;
    const double x = u > 0.0 ? u : 0.0;
    if (exponent == 0.0) return scale;
    if (exponent == 1.0) return scale * x;
    if (exponent == 0.5) return scale * std::sqrt(x);
    return scale * std::pow(x, exponent);
}

bool PowerVol::admissible() const {
    return scale >= 0.0 && ((exponent >= 0.0 && exponent <= 0.5) || exponent == 1.0);
}

void ModelParams::validate() const {
    auto fail = [](const char* msg) { throw Error(ErrorCode::InvalidParams, msg); };
    if (!(impact_fraction >= 0.0 && impact_fraction <= 1.0))
        fail("lambda_impact must lie in [0,1]");
    if (!(illiquidity >= 0.0)) fail("epsilon must be non-negative");
    if (!(s0 > 0.0)) fail("s0 must be positive");
    if (!(u0 > 0.0)) fail("u0 must be positive");
    if (!(v0 > 0.0)) fail("v0 must be positive");
    if (!std::isfinite(u_rate) || !std::isfinite(u_shift) || !std::isfinite(v_rate) ||
        !std::isfinite(v_shift))
        fail("drift constants must be finite");
    if (!vol_conditions_hold())
        fail("u_vol and v_vol must be powers in [0,1/2] or Lipschitz (power 1) with scale >= 0");
    if (!(correlation.sigma(0) > 0.0)) fail("sigma1 must be positive");
}

bool ModelParams::submartingale_flag() const {
    return depth_map.kind() == DepthMap::Kind::Identity && u_rate > 0.0 && u_shift > 0.0;
}

std::uint64_t PathBundle::fingerprint() const {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ n_paths);
    h = mix64(h ^ grid.n_steps);
    std::uint64_t bits = 0;
    const double horizon = grid.horizon;
    static_assert(sizeof(bits) == sizeof(horizon));
    std::memcpy(&bits, &horizon, sizeof(bits));
    return mix64(h ^ bits);
}

void PathStepper::advance(PathState& st, const Vec3& dW) const {
    const double up = st.u_pos();
    const double vp = st.v_pos();
    const double var = up + vp;
    const double vol = std::sqrt(var);
    st.rv += var * dt_;
    st.s *= std::exp(vol * dW[0] - 0.5 * var * dt_);
    st.u += params_.u_rate * (up + params_.u_shift) * dt_ + params_.u_vol(up) * dW[1];
    st.v += params_.v_rate * (vp + params_.v_shift) * dt_ + params_.v_vol(vp) * dW[2];
}

PathBundle simulate_paths(const ModelParams& params, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed, unsigned threads) {
    if (n_paths == 0) throw Error(ErrorCode::ZeroPaths, "simulation needs at least one path");
    params.validate();
    if (!(grid.horizon > 0.0) || grid.n_steps == 0)
        throw Error(ErrorCode::InvalidParams, "invalid time grid");

    PathBundle b;
    b.grid = grid;
    b.n_paths = n_paths;
    b.seed = seed;
    b.noise = draw_noise(grid, params.correlation, n_paths, seed, threads);
    const std::size_t nodes = grid.nodes();
    b.S = PathMatrix(n_paths, nodes);
    b.U = PathMatrix(n_paths, nodes);
    b.V = PathMatrix(n_paths, nodes);
    b.Sigma = PathMatrix(n_paths, nodes);
    b.M = PathMatrix(n_paths, nodes);
    b.RV = PathMatrix(n_paths, nodes);

    const PathStepper stepper(params, grid.dt());
    parallel_chunks(n_paths, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            PathState st = stepper.initial();
            for (std::size_t k = 0;; ++k) {
                const double up = st.u_pos();
                const double vp = st.v_pos();
                b.S(p, k) = st.s;
                b.U(p, k) = up;
                b.V(p, k) = vp;
                b.Sigma(p, k) = std::sqrt(up + vp);
                b.M(p, k) = params.illiquidity * params.depth_map.value(up);
                b.RV(p, k) = st.rv;
                if (k == grid.n_steps) break;
                stepper.advance(st, b.noise.dw(p, k));
            }
        }
    });
    return b;
}

double mu_coeff(double u, const ModelParams& params) {
    const auto& g = params.depth_map;
    const double phi = params.u_vol(u);
    return params.illiquidity * g.first(u) * params.u_rate * (u + params.u_shift) +
           0.5 * params.illiquidity * g.second(u) * phi * phi;
}

double zeta_coeff(double u, const ModelParams& params) {
    const double phi = params.u_vol(u);
    return params.illiquidity * phi * phi * params.depth_map.first(u);
}

double depth_vol_coeff(double u, const ModelParams& params) {
    return params.illiquidity * params.depth_map.first(u) * params.u_vol(u);
}

double lambda_coeff(double u, double v, double s, const ModelParams& params) {
    const double var = u + v;
    if (!(s >= 1e-14) || !(var >= 1e-14))
        throw Error(ErrorCode::DegenerateState, "Lambda needs S and Sigma^2 above 1e-14");
    const double s1 = params.correlation.sigma(0);
    return mu_coeff(u, params) / (s1 * s1 * var * s * s);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_paths_csv(std::ostream& os, const PathBundle& b) {
    os << "path,step,t,S,U,V,Sigma,M,RV\n";
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        for (std::size_t k = 0; k < b.grid.nodes(); ++k) {
            os << p << ',' << k << ',' << format_double(b.grid.t(k)) << ','
               << format_double(b.S(p, k)) << ',' << format_double(b.U(p, k)) << ','
               << format_double(b.V(p, k)) << ',' << format_double(b.Sigma(p, k)) << ','
               << format_double(b.M(p, k)) << ',' << format_double(b.RV(p, k)) << '\n';
        }
    }
}

}  // namespace liqrep

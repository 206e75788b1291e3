#include "liqrep/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>

#include "liqrep/error.hpp"
#include "liqrep/parallel.hpp"

namespace liqrep {

std::size_t monomial_count(int vars, int degree) {
    // C(vars + degree, degree)
    std::size_t c = 1;
    for (int i = 1; i <= degree; ++i) c = c * static_cast<std::size_t>(vars + i) / static_cast<std::size_t>(i);
    return c;
}

namespace {

// exponent tuples of total degree <= d over `vars` variables, graded order
std::vector<std::array<int, 3>> monomials(int vars, int d) {
    std::vector<std::array<int, 3>> out;
    for (int total = 0; total <= d; ++total) {
        for (int a = total; a >= 0; --a) {
            for (int b = total - a; b >= 0; --b) {
                const int c = total - a - b;
                if ((vars < 2 && b > 0) || (vars < 3 && c > 0)) continue;
                out.push_back({a, b, c});
            }
        }
    }
    return out;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

NodeRegression::NodeRegression(const PathBundle& b, std::size_t node,
                               const std::vector<std::uint32_t>& rows, int degree, double ridge,
                               unsigned threads)
    : n_(rows.size()), threads_(threads) {
    const PathMatrix* raw[3] = {&b.S, &b.U, &b.V};

    // standardize over the subset; keep features that actually vary
    std::array<double, 3> mean{}, sd{};
    std::vector<int> active;
    for (int f = 0; f < 3; ++f) {
        double s = 0.0, ss = 0.0;
        for (std::uint32_t p : rows) s += (*raw[f])(p, node);
        mean[f] = n_ ? s / static_cast<double>(n_) : 0.0;
        for (std::uint32_t p : rows) {
            const double d = (*raw[f])(p, node) - mean[f];
            ss += d * d;
        }
        sd[f] = n_ ? std::sqrt(ss / static_cast<double>(n_)) : 0.0;
        if (sd[f] > 1e-12 * (1.0 + std::abs(mean[f]))) active.push_back(f);
    }
    const auto mono = monomials(static_cast<int>(active.size()), degree);
    p_ = mono.size();
    if (n_ < p_)
        throw Error(ErrorCode::RegressionRankDeficient,
                    "node " + std::to_string(node) + " has " + std::to_string(n_) +
                        " paths for " + std::to_string(p_) + " basis functions");

    design_.resize(n_ * p_);
    parallel_chunks(n_, threads_, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::array<std::array<double, 8>, 3> pw{};
            for (std::size_t a = 0; a < active.size(); ++a) {
                const int f = active[a];
                const double z = ((*raw[f])(rows[i], node) - mean[f]) / sd[f];
                pw[a][0] = 1.0;
                for (int e = 1; e <= degree && e < 8; ++e) pw[a][e] = pw[a][e - 1] * z;
            }
            for (std::size_t j = 0; j < p_; ++j) {
                double v = 1.0;
                for (std::size_t a = 0; a < active.size(); ++a) v *= pw[a][mono[j][a]];
                design_[i * p_ + j] = v;
            }
        }
    });

    const std::size_t nc = chunk_count(n_);
    std::vector<Eigen::MatrixXd> partial(nc, Eigen::MatrixXd::Zero(p_, p_));
    parallel_chunks(n_, threads_, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Eigen::Map<const RowMatrix> block(design_.data() + begin * p_, end - begin, p_);
        partial[c].noalias() = block.transpose() * block;
    });
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p_, p_);
    for (const auto& g : partial) gram += g;

    // ridge on everything but the intercept keeps the fitted mean exact
    const double shift = ridge * gram.trace() / static_cast<double>(p_);
    for (std::size_t j = 1; j < p_; ++j) gram(j, j) += shift;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    condition_ = lo > 0.0 ? hi / lo : INFINITY;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::RegressionRankDeficient,
                    "normal equations at node " + std::to_string(node) + " are not positive definite");
    Eigen::MatrixXd L = llt.matrixL();
    chol_.assign(L.data(), L.data() + p_ * p_);
}

void NodeRegression::project(const std::vector<double>& target, std::vector<double>& fitted) const {
    const std::size_t nc = chunk_count(n_);
    std::vector<Eigen::VectorXd> partial(nc, Eigen::VectorXd::Zero(p_));
    parallel_chunks(n_, threads_, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Eigen::Map<const RowMatrix> block(design_.data() + begin * p_, end - begin, p_);
        Eigen::Map<const Eigen::VectorXd> y(target.data() + begin, end - begin);
        partial[c].noalias() = block.transpose() * y;
    });
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p_);
    for (const auto& v : partial) rhs += v;

    Eigen::Map<const Eigen::MatrixXd> L(chol_.data(), p_, p_);
    const Eigen::VectorXd beta =
        L.transpose().triangularView<Eigen::Upper>().solve(L.triangularView<Eigen::Lower>().solve(rhs));

    fitted.resize(n_);
    parallel_chunks(n_, threads_, [&](std::size_t, std::size_t begin, std::size_t end) {
        Eigen::Map<const RowMatrix> block(design_.data() + begin * p_, end - begin, p_);
        Eigen::Map<Eigen::VectorXd> out(fitted.data() + begin, end - begin);
        out.noalias() = block * beta;
    });
}

}  // namespace liqrep

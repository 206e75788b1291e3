#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "liqrep/market_model.hpp"

namespace liqrep {

/// Number of monomials of total degree <= degree in `vars` variables.
std::size_t monomial_count(int vars, int degree);

/// Least-squares projection onto polynomials in standardized (S, U, V) at one
/// node, restricted to a subset of paths. Features with negligible spread over
/// the subset are dropped, so a node where every path sits at the same state
/// uses the constant alone.
///
/// Sums over paths are accumulated in fixed chunks and reduced in chunk order,
/// so projections do not depend on the thread count.
class NodeRegression {
public:
    NodeRegression(const PathBundle& bundle, std::size_t node, const std::vector<std::uint32_t>& rows,
                   int degree, double ridge, unsigned threads = 1);

    std::size_t basis_size() const { return p_; }
    std::size_t rows() const { return n_; }
    double condition_number() const { return condition_; }

    /// fitted[i] = projection of target[i], i indexing `rows`.
    void project(const std::vector<double>& target, std::vector<double>& fitted) const;

private:
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    unsigned threads_ = 1;
    std::vector<double> design_;  // n_ x p_, row-major
    std::vector<double> chol_;    // p_ x p_ lower factor of the regularized Gram matrix
    double condition_ = 1.0;
};

}  // namespace liqrep

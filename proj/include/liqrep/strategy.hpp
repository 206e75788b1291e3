#pragma once

#include <cstddef>

#include "liqrep/path_matrix.hpp"

namespace liqrep {

/// Grid positions in the stock (X) and the two variance swaps (chi1, chi2).
/// Entry (p, k) is the holding right after the trade at node k; the *_pre
/// fields are the holdings carried into node 0.
struct Strategy {
    PathMatrix X, chi1, chi2;
    double x_pre = 0.0;
    double chi1_pre = 0.0;
    double chi2_pre = 0.0;
    double initial_cash = 0.0;

    static Strategy zeros(std::size_t n_paths, std::size_t nodes);

    std::size_t paths() const { return X.paths(); }
    std::size_t nodes() const { return X.nodes(); }
    /// No stock carried in and no stock left after the last node.
    bool closed() const;
    /// Set the last node of every holding to zero.
    void close_at_end();
};

}  // namespace liqrep

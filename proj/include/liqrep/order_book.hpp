#pragma once

#include <iosfwd>

#include "liqrep/market_model.hpp"
#include "liqrep/path_matrix.hpp"
#include "liqrep/strategy.hpp"

namespace liqrep {

// Linear supply curve S(x) = S + M x.
inline double unaffected_price(double s, double m, double x) { return s + m * x; }

/// Cash paid for x shares walking the book: x * S(x).
inline double execution_cost(double s, double m, double x) { return s * x + m * x * x; }

/// Quote after a trade of dx: only the fraction lambda of the displacement 2 M dx
/// persists; the density is untouched.
inline double apply_impact(double quote, double m, double lambda, double dx) {
    return quote + 2.0 * lambda * m * dx;
}

struct BookState {
    double quote = 0.0;
    double depth = 0.0;

    /// 1 / (2M); throws DegenerateState when M <= 0.
    double density() const;
};

/// pre(p, k): quote seen by the trade at node k. post(p, k): quote after it.
struct ImpactedQuotePath {
    PathMatrix pre;
    PathMatrix post;
};

/// Generic form for any traded leg with unaffected price `price` and depth `depth`.
/// Throws GridMismatch when shapes differ.
ImpactedQuotePath impacted_quotes(const PathMatrix& price, const PathMatrix& depth, double lambda,
                                  const PathMatrix& positions, double pos_pre);

/// Stock quotes under the strategy's X.
ImpactedQuotePath impacted_quote_path(const PathBundle& bundle, const Strategy& strategy,
                                      double lambda);

/// Columns: path, step, t, S, S0_pre, S0_post, X.
void write_quotes_csv(std::ostream& os, const PathBundle& bundle, const ImpactedQuotePath& q,
                      const PathMatrix& X);

}  // namespace liqrep

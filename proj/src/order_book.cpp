#include "liqrep/order_book.hpp"

#include <ostream>

#include "liqrep/error.hpp"

namespace liqrep {

Strategy Strategy::zeros(std::size_t n_paths, std::size_t nodes) {
    Strategy s;
    s.X = PathMatrix(n_paths, nodes);
    s.chi1 = PathMatrix(n_paths, nodes);
    s.chi2 = PathMatrix(n_paths, nodes);
    return s;
}

bool Strategy::closed() const {
    if (x_pre != 0.0) return false;
    const std::size_t last = nodes() - 1;
    for (std::size_t p = 0; p < paths(); ++p)
        if (X(p, last) != 0.0) return false;
    return true;
}

void Strategy::close_at_end() {
    const std::size_t last = nodes() - 1;
    for (std::size_t p = 0; p < paths(); ++p) {
        X(p, last) = 0.0;
        if (!chi1.empty()) chi1(p, last) = 0.0;
        if (!chi2.empty()) chi2(p, last) = 0.0;
    }
}

double BookState::density() const {
    if (!(depth > 0.0)) throw Error(ErrorCode::DegenerateState, "book density needs M > 0");
    return 1.0 / (2.0 * depth);
}

ImpactedQuotePath impacted_quotes(const PathMatrix& price, const PathMatrix& depth, double lambda,
                                  const PathMatrix& positions, double pos_pre) {
    if (!price.same_shape(depth) || !price.same_shape(positions))
        throw Error(ErrorCode::GridMismatch, "quote inputs live on different grids");
    ImpactedQuotePath q{PathMatrix(price.paths(), price.nodes()),
                        PathMatrix(price.paths(), price.nodes())};
    for (std::size_t p = 0; p < price.paths(); ++p) {
        double impact = 0.0;
        double prev_x = pos_pre;
        double prev_m = depth(p, 0);
        for (std::size_t k = 0; k < price.nodes(); ++k) {
            const double dx = positions(p, k) - prev_x;
            const double m = depth(p, k);
            q.pre(p, k) = price(p, k) + impact;
            // M_{k-1} dX_k plus the covariation term dM_k dX_k
            impact += 2.0 * lambda * (prev_m * dx + (m - prev_m) * dx);
            q.post(p, k) = price(p, k) + impact;
            prev_x = positions(p, k);
            prev_m = m;
        }
    }
    return q;
}

ImpactedQuotePath impacted_quote_path(const PathBundle& bundle, const Strategy& strategy,
                                      double lambda) {
    return impacted_quotes(bundle.S, bundle.M, lambda, strategy.X, strategy.x_pre);
}

void write_quotes_csv(std::ostream& os, const PathBundle& b, const ImpactedQuotePath& q,
                      const PathMatrix& X) {
    os << "path,step,t,S,S0_pre,S0_post,X\n";
    for (std::size_t p = 0; p < b.n_paths; ++p)
        for (std::size_t k = 0; k < b.grid.nodes(); ++k)
            os << p << ',' << k << ',' << format_double(b.grid.t(k)) << ','
               << format_double(b.S(p, k)) << ',' << format_double(q.pre(p, k)) << ','
               << format_double(q.post(p, k)) << ',' << format_double(X(p, k)) << '\n';
}

}  // namespace liqrep

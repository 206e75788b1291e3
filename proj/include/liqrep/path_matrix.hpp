#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace liqrep {

// Row-major (path, node) storage for grid processes.
class PathMatrix {
public:
    PathMatrix() = default;
    PathMatrix(std::size_t paths, std::size_t nodes, double fill = 0.0)
        : paths_(paths), nodes_(nodes), data_(paths * nodes, fill) {}

    std::size_t paths() const noexcept { return paths_; }
    std::size_t nodes() const noexcept { return nodes_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t p, std::size_t k) noexcept { return data_[p * nodes_ + k]; }
    double operator()(std::size_t p, std::size_t k) const noexcept { return data_[p * nodes_ + k]; }

    std::span<double> row(std::size_t p) noexcept { return {data_.data() + p * nodes_, nodes_}; }
    std::span<const double> row(std::size_t p) const noexcept {
        return {data_.data() + p * nodes_, nodes_};
    }

    const std::vector<double>& data() const noexcept { return data_; }

    bool same_shape(const PathMatrix& other) const noexcept {
        return paths_ == other.paths_ && nodes_ == other.nodes_;
    }

private:
    std::size_t paths_ = 0;
    std::size_t nodes_ = 0;
    std::vector<double> data_;
};

}  // namespace liqrep

#pragma once

#include "lsl/types.hpp"

#include <array>

namespace lsl {

using Point = std::array<double, 2>;

// Tensor-product node grid on [0, Lx] (1D) or [0, Lx] x [0, Ly] (2D) with
// trapezoidal quadrature weights. Node (ix, iy) has flat index ix + nx * iy.
class Grid {
public:
    static Grid line(double length, int nodes);
    static Grid rectangle(double length_x, double length_y, int nodes_x, int nodes_y);

    int dimension() const noexcept { return dimension_; }
    const std::array<double, 2>& extents() const noexcept { return extents_; }
    const std::array<int, 2>& nodes() const noexcept { return nodes_; }
    int nx() const noexcept { return nodes_[0]; }
    int ny() const noexcept { return nodes_[1]; }
    Eigen::Index size() const noexcept { return weights_.size(); }

    double spacing(int axis) const;
    const Vector& weights() const noexcept { return weights_; }

    Eigen::Index index(int ix, int iy = 0) const noexcept {
        return static_cast<Eigen::Index>(ix) + static_cast<Eigen::Index>(nodes_[0]) * iy;
    }
    Point coordinate(Eigen::Index flat) const;
    bool contains(const Point& p) const noexcept;

    double measure() const noexcept;

    bool operator==(const Grid& other) const;

private:
    Grid(int dimension, std::array<double, 2> extents, std::array<int, 2> nodes);

    int dimension_;
    std::array<double, 2> extents_;
    std::array<int, 2> nodes_;
    Vector weights_;
};

}  // namespace lsl

#include "lsl/grid.hpp"

#include <string>

namespace lsl {

namespace {

Vector trapezoid_weights(double length, int n) {
    if (n == 1) return Vector::Constant(1, length > 0.0 ? length : 1.0);
    const double h = length / (n - 1);
    Vector w = Vector::Constant(n, h);
    w(0) = w(n - 1) = 0.5 * h;
    return w;
}

}  // namespace

Grid::Grid(int dimension, std::array<double, 2> extents, std::array<int, 2> nodes)
    : dimension_(dimension), extents_(extents), nodes_(nodes) {
    for (int a = 0; a < dimension_; ++a) {
        if (nodes_[a] < 1) throw InvalidArgument("grid", "node count must be positive");
        if (nodes_[a] > 1 && !(extents_[a] > 0.0)) {
            throw InvalidArgument("grid", "extent must be positive");
        }
    }
    const Vector wx = trapezoid_weights(extents_[0], nodes_[0]);
    if (dimension_ == 1) {
        weights_ = wx;
        return;
    }
    const Vector wy = trapezoid_weights(extents_[1], nodes_[1]);
    weights_.resize(static_cast<Eigen::Index>(nodes_[0]) * nodes_[1]);
    for (int iy = 0; iy < nodes_[1]; ++iy) {
        for (int ix = 0; ix < nodes_[0]; ++ix) weights_(index(ix, iy)) = wx(ix) * wy(iy);
    }
}

Grid Grid::line(double length, int nodes) { return Grid(1, {length, 0.0}, {nodes, 1}); }

Grid Grid::rectangle(double length_x, double length_y, int nodes_x, int nodes_y) {
    return Grid(2, {length_x, length_y}, {nodes_x, nodes_y});
}

double Grid::spacing(int axis) const {
    if (axis >= dimension_) return 0.0;
    return nodes_[axis] > 1 ? extents_[axis] / (nodes_[axis] - 1) : extents_[axis];
}

Point Grid::coordinate(Eigen::Index flat) const {
    const int ix = static_cast<int>(flat % nodes_[0]);
    const int iy = static_cast<int>(flat / nodes_[0]);
    return {ix * spacing(0), dimension_ == 2 ? iy * spacing(1) : 0.0};
}

bool Grid::contains(const Point& p) const noexcept {
    const double tol = 1e-12;
    for (int a = 0; a < dimension_; ++a) {
        const double scale = std::max(extents_[a], 1.0);
        if (p[a] < -tol * scale || p[a] > extents_[a] + tol * scale) return false;
    }
    return dimension_ == 2 || p[1] == 0.0;
}

double Grid::measure() const noexcept {
    return dimension_ == 1 ? extents_[0] : extents_[0] * extents_[1];
}

bool Grid::operator==(const Grid& other) const {
    return dimension_ == other.dimension_ && extents_ == other.extents_ && nodes_ == other.nodes_;
}

}  // namespace lsl

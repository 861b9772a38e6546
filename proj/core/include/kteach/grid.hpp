#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kteach/kernel.hpp"

namespace kteach {

/// A fixed coordinate lattice over the input space.
///
/// 1-D grids are a strictly increasing axis; 2-D grids are the tensor lattice
/// of two axes enumerated row-major (y outer, x inner), which fixes a total
/// order used for deterministic tie-breaking.
class Grid {
public:
    static std::shared_ptr<const Grid> linspace_1d(double lo, double hi, std::size_t n);

    /// Pixel lattice of a width x height image, scaled to [0,1]^2.
    /// Index = row * width + col, row along y.
    static std::shared_ptr<const Grid> pixel_lattice(std::size_t width, std::size_t height);

    static std::shared_ptr<const Grid> from_axes(std::vector<double> xs, std::vector<double> ys);

    int dim() const { return ys_.empty() ? 1 : 2; }
    std::size_t size() const { return ys_.empty() ? xs_.size() : xs_.size() * ys_.size(); }
    std::size_t width() const { return xs_.size(); }
    std::size_t height() const { return ys_.empty() ? 1 : ys_.size(); }

    const std::vector<double>& x_axis() const { return xs_; }
    const std::vector<double>& y_axis() const { return ys_; }

    Point point(std::size_t i) const {
        if (ys_.empty()) return Point::d1(xs_[i]);
        return Point::d2(xs_[i % xs_.size()], ys_[i / xs_.size()]);
    }

    /// Exact-match lookup; nullopt if p is not a grid point.
    std::optional<std::size_t> index_of(const Point& p) const;

    /// Nearest grid point (axis-wise nearest, then composed) after clamping
    /// to the bounding box.
    std::size_t nearest_index(const Point& p) const;

    double min_x() const { return xs_.front(); }
    double max_x() const { return xs_.back(); }
    double min_y() const { return ys_.empty() ? 0.0 : ys_.front(); }
    double max_y() const { return ys_.empty() ? 0.0 : ys_.back(); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.xs_ == b.xs_ && a.ys_ == b.ys_;
    }

private:
    Grid(std::vector<double> xs, std::vector<double> ys);

    std::vector<double> xs_;
    std::vector<double> ys_;  // empty for 1-D grids
};

using GridPtr = std::shared_ptr<const Grid>;

/// True when the two grids describe the same coordinates (pointer or value).
inline bool same_grid(const GridPtr& a, const GridPtr& b) {
    return a == b || (a && b && *a == *b);
}

}  // namespace kteach

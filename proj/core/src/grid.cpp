#include "kteach/grid.hpp"

#include <algorithm>
#include <cmath>

namespace kteach {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) throw std::invalid_argument("Grid: axis needs at least one point");
    if (!(lo <= hi)) throw std::invalid_argument("Grid: axis bounds out of order");
    if (n == 1) return {lo};
    std::vector<double> v(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) v[k] = lo + step * static_cast<double>(k);
    v.back() = hi;
    return v;
}

void check_axis(const std::vector<double>& a, const char* name) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!std::isfinite(a[k])) throw std::invalid_argument(std::string("Grid: non-finite ") + name + " coordinate");
        if (k > 0 && !(a[k] > a[k - 1])) {
            throw std::invalid_argument(std::string("Grid: ") + name + " axis must be strictly increasing");
        }
    }
}

// Nearest entry of a sorted axis to v (v already clamped to [front, back]).
std::size_t nearest_on_axis(const std::vector<double>& a, double v) {
    auto it = std::lower_bound(a.begin(), a.end(), v);
    if (it == a.begin()) return 0;
    if (it == a.end()) return a.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - a.begin());
    const std::size_t lo = hi - 1;
    return (v - a[lo] <= a[hi] - v) ? lo : hi;
}

}  // namespace

Grid::Grid(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.empty()) throw std::invalid_argument("Grid: empty x axis");
    check_axis(xs_, "x");
    if (!ys_.empty()) check_axis(ys_, "y");
}

std::shared_ptr<const Grid> Grid::linspace_1d(double lo, double hi, std::size_t n) {
    if (n >= 2 && !(lo < hi)) throw std::invalid_argument("Grid: 1-D span must be non-degenerate");
    return std::shared_ptr<const Grid>(new Grid(linspace(lo, hi, n), {}));
}

std::shared_ptr<const Grid> Grid::pixel_lattice(std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) throw std::invalid_argument("Grid: zero-sized pixel lattice");
    auto axis = [](std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k) {
            v[k] = (n == 1) ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
        }
        return v;
    };
    return std::shared_ptr<const Grid>(new Grid(axis(width), axis(height)));
}

std::shared_ptr<const Grid> Grid::from_axes(std::vector<double> xs, std::vector<double> ys) {
    return std::shared_ptr<const Grid>(new Grid(std::move(xs), std::move(ys)));
}

std::optional<std::size_t> Grid::index_of(const Point& p) const {
    if (p.dim != dim()) return std::nullopt;
    if (p.x < xs_.front() || p.x > xs_.back()) return std::nullopt;
    const std::size_t ix = nearest_on_axis(xs_, p.x);
    if (xs_[ix] != p.x) return std::nullopt;
    if (ys_.empty()) return ix;
    if (p.y < ys_.front() || p.y > ys_.back()) return std::nullopt;
    const std::size_t iy = nearest_on_axis(ys_, p.y);
    if (ys_[iy] != p.y) return std::nullopt;
    return iy * xs_.size() + ix;
}

std::size_t Grid::nearest_index(const Point& p) const {
    if (p.dim != dim()) throw std::invalid_argument("Grid::nearest_index: dimension mismatch");
    const double cx = std::clamp(p.x, xs_.front(), xs_.back());
    const std::size_t ix = nearest_on_axis(xs_, cx);
    if (ys_.empty()) return ix;
    const double cy = std::clamp(p.y, ys_.front(), ys_.back());
    const std::size_t iy = nearest_on_axis(ys_, cy);
    return iy * xs_.size() + ix;
}

}  // namespace kteach

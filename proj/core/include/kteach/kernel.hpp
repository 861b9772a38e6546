#pragma once

#include <cmath>
#include <stdexcept>

namespace kteach {

/// A point in the input space. Only 1-D and 2-D inputs occur in practice
/// (axis coordinates and pixel lattices), so the representation is fixed-size.
struct Point {
    double x = 0.0;
    double y = 0.0;
    int dim = 1;

    static Point d1(double x) { return Point{x, 0.0, 1}; }
    static Point d2(double x, double y) { return Point{x, y, 2}; }

    friend bool operator==(const Point& a, const Point& b) {
        return a.dim == b.dim && a.x == b.x && (a.dim == 1 || a.y == b.y);
    }
};

inline double squared_distance(const Point& a, const Point& b) {
    if (a.dim != b.dim) {
        throw std::invalid_argument("squared_distance: point dimensions differ");
    }
    const double dx = a.x - b.x;
    if (a.dim == 1) return dx * dx;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

/// Isotropic RBF kernel K(x,x') = exp(-||(x-x')/divisor||^2).
/// kernel_bound is the uniform upper bound M_K on K; 1 for this family.
class KernelSpec {
public:
    explicit KernelSpec(double bandwidth_divisor = 2.0, double kernel_bound = 1.0)
        : divisor_(bandwidth_divisor), bound_(kernel_bound) {
        if (!(divisor_ > 0.0) || !std::isfinite(divisor_)) {
            throw std::invalid_argument("KernelSpec: bandwidth_divisor must be positive");
        }
        if (!(bound_ > 0.0) || !std::isfinite(bound_)) {
            throw std::invalid_argument("KernelSpec: kernel_bound must be positive");
        }
    }

    double bandwidth_divisor() const { return divisor_; }
    double kernel_bound() const { return bound_; }

private:
    double divisor_;
    double bound_;
};

/// K(x,x2) = exp(-||(x-x2)/divisor||^2). Symmetric, in (0,1], equals 1 iff x == x2.
inline double kernel_eval(const KernelSpec& spec, const Point& a, const Point& b) {
    const double d2 = squared_distance(a, b);
    const double s = spec.bandwidth_divisor();
    return std::exp(-d2 / (s * s));
}

}  // namespace kteach

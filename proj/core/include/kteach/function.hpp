#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kteach/grid.hpp"
#include "kteach/kernel.hpp"

namespace kteach {

/// One learner's scalar-valued function, stored as its values on a fixed grid.
/// Kernel updates are materialized onto the grid, so memory stays constant
/// no matter how many teaching iterations have been applied.
class SampledFunction {
public:
    SampledFunction(GridPtr grid, std::vector<double> values);

    /// Convenience: sample fn(point) on every grid point.
    template <typename Fn>
    static SampledFunction sample(const GridPtr& grid, Fn&& fn) {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->point(i));
        return SampledFunction(grid, std::move(v));
    }

    static SampledFunction zeros(const GridPtr& grid) {
        return SampledFunction(grid, std::vector<double>(grid->size(), 0.0));
    }

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double value(std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }

    /// Value at a grid point; throws if p is off the grid.
    double value_at(const Point& p) const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Ordered collection of d scalar functions; component order is the learner index.
class VectorValuedFunction {
public:
    explicit VectorValuedFunction(std::vector<SampledFunction> components);

    std::size_t d() const { return components_.size(); }
    const SampledFunction& component(std::size_t i) const { return components_[i]; }
    const std::vector<SampledFunction>& components() const { return components_; }

    /// Total number of samples across components.
    std::size_t total_points() const;

    /// True when every component lives on one common grid.
    bool shares_grid() const;

private:
    std::vector<SampledFunction> components_;
};

/// One kernel section scaled by a coefficient: coefficient * K(center, .)
/// attributed to a single learner.
struct KernelAtom {
    std::size_t learner_index = 0;
    Point center;
    double coefficient = 1.0;
};

/// E_x[f] = sum_i f_i(x_i); evaluation is grid-point only.
double eval_functional(const VectorValuedFunction& vf, std::span<const Point> xs);

/// Gradient of the evaluation functional: one unit-coefficient kernel section
/// per learner, centered at that learner's evaluation point.
std::vector<KernelAtom> eval_functional_gradient(std::span<const Point> xs);

/// f'(z) = f(z) - step * coefficient * K(center, z) on every grid point z.
SampledFunction apply_atom(const SampledFunction& f, const KernelAtom& atom,
                           const KernelSpec& spec, double step);

/// Empirical disagreement: sqrt(sum of squared differences over all grid
/// points and components) divided by the total point count.
double disagreement(const VectorValuedFunction& vf, const VectorValuedFunction& target);

/// Same quantity without the 1/(dn) normalization (plain l2 of the residual).
double residual_l2(const VectorValuedFunction& vf, const VectorValuedFunction& target);

/// Squared residual summed over all grid points of component i.
double component_sq_residual(const SampledFunction& f, const SampledFunction& target);

void require_matching_layout(const VectorValuedFunction& vf,
                             const VectorValuedFunction& target, const char* where);

}  // namespace kteach

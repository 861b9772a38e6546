#include "kteach/function.hpp"

#include <cmath>
#include <stdexcept>

namespace kteach {

SampledFunction::SampledFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("SampledFunction: null grid");
    if (values_.size() != grid_->size()) {
        throw std::invalid_argument("SampledFunction: value count does not match grid size");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("SampledFunction: non-finite value");
    }
}

double SampledFunction::value_at(const Point& p) const {
    const auto idx = grid_->index_of(p);
    if (!idx) throw std::invalid_argument("SampledFunction: point is not on the grid");
    return values_[*idx];
}

VectorValuedFunction::VectorValuedFunction(std::vector<SampledFunction> components)
    : components_(std::move(components)) {
    if (components_.empty()) {
        throw std::invalid_argument("VectorValuedFunction: needs at least one component");
    }
}

std::size_t VectorValuedFunction::total_points() const {
    std::size_t n = 0;
    for (const auto& c : components_) n += c.size();
    return n;
}

bool VectorValuedFunction::shares_grid() const {
    for (std::size_t i = 1; i < components_.size(); ++i) {
        if (!same_grid(components_[0].grid(), components_[i].grid())) return false;
    }
    return true;
}

double eval_functional(const VectorValuedFunction& vf, std::span<const Point> xs) {
    if (xs.size() != vf.d()) {
        throw std::invalid_argument("eval_functional: need one point per learner");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < vf.d(); ++i) sum += vf.component(i).value_at(xs[i]);
    return sum;
}

std::vector<KernelAtom> eval_functional_gradient(std::span<const Point> xs) {
    std::vector<KernelAtom> atoms;
    atoms.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        atoms.push_back(KernelAtom{i, xs[i], 1.0});
    }
    return atoms;
}

SampledFunction apply_atom(const SampledFunction& f, const KernelAtom& atom,
                           const KernelSpec& spec, double step) {
    if (!std::isfinite(step)) throw std::invalid_argument("apply_atom: non-finite step");
    if (!std::isfinite(atom.coefficient)) {
        throw std::invalid_argument("apply_atom: non-finite coefficient");
    }
    const Grid& g = *f.grid();
    std::vector<double> out(f.values());
    const double scale = step * atom.coefficient;
    if (scale != 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] -= scale * kernel_eval(spec, atom.center, g.point(i));
        }
    }
    return SampledFunction(f.grid(), std::move(out));
}

void require_matching_layout(const VectorValuedFunction& vf,
                             const VectorValuedFunction& target, const char* where) {
    if (vf.d() != target.d()) {
        throw std::invalid_argument(std::string(where) + ": component counts differ");
    }
    for (std::size_t i = 0; i < vf.d(); ++i) {
        if (!same_grid(vf.component(i).grid(), target.component(i).grid())) {
            throw std::invalid_argument(std::string(where) + ": component grids differ");
        }
    }
}

double component_sq_residual(const SampledFunction& f, const SampledFunction& target) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double r = f.value(j) - target.value(j);
        s += r * r;
    }
    return s;
}

double residual_l2(const VectorValuedFunction& vf, const VectorValuedFunction& target) {
    require_matching_layout(vf, target, "disagreement");
    double s = 0.0;
    for (std::size_t i = 0; i < vf.d(); ++i) {
        s += component_sq_residual(vf.component(i), target.component(i));
    }
    return std::sqrt(s);
}

double disagreement(const VectorValuedFunction& vf, const VectorValuedFunction& target) {
    return residual_l2(vf, target) / static_cast<double>(vf.total_points());
}

}  // namespace kteach

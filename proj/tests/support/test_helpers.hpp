#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kteach/function.hpp"
#include "kteach/rng.hpp"
#include "kteach/teaching.hpp"

namespace kteach::testing {

/// Central finite difference of the multi-learner loss along the kernel-atom
/// direction K_{x_i} for learner i. Independent oracle for the functional
/// gradient: the true directional derivative equals coefficient * K(x,x).
inline double fd_loss_derivative(const VectorValuedFunction& vf,
                                 const std::vector<TeachingExample>& examples,
                                 std::size_t learner, const KernelSpec& spec,
                                 const LossSpec& loss = {}, double h = 1e-5) {
    const auto perturb = [&](double delta) {
        std::vector<SampledFunction> comps;
        for (std::size_t i = 0; i < vf.d(); ++i) {
            if (i != learner) {
                comps.push_back(vf.component(i));
                continue;
            }
            const auto& f = vf.component(i);
            const Grid& grid = *f.grid();
            std::vector<double> v = f.values();
            for (std::size_t j = 0; j < v.size(); ++j) {
                v[j] += delta * kernel_eval(spec, examples[i].x, grid.point(j));
            }
            comps.emplace_back(f.grid(), std::move(v));
        }
        return multi_loss(VectorValuedFunction(std::move(comps)), examples, loss);
    };
    return (perturb(h) - perturb(-h)) / (2.0 * h);
}

/// One-sided sign test: p-value for observing >= wins successes out of n
/// under a fair coin. Ties must be removed by the caller.
inline double sign_test_p(std::size_t wins, std::size_t n) {
    double p = 0.0;
    for (std::size_t k = wins; k <= n; ++k) {
        double log_c = std::lgamma(static_cast<double>(n) + 1.0) -
                       std::lgamma(static_cast<double>(k) + 1.0) -
                       std::lgamma(static_cast<double>(n - k) + 1.0);
        p += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
    }
    return p;
}

inline SampledFunction random_function(const GridPtr& grid, Rng& rng, double scale = 1.0) {
    std::vector<double> v(grid->size());
    for (double& x : v) x = scale * (2.0 * rng.next_double() - 1.0);
    return SampledFunction(grid, std::move(v));
}

inline VectorValuedFunction random_vector_function(const GridPtr& grid, std::size_t d, Rng& rng,
                                                   double scale = 1.0) {
    std::vector<SampledFunction> comps;
    for (std::size_t i = 0; i < d; ++i) comps.push_back(random_function(grid, rng, scale));
    return VectorValuedFunction(std::move(comps));
}

}  // namespace kteach::testing

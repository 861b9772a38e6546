#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kteach/comm.hpp"
#include "kteach/function.hpp"
#include "kteach/kernel.hpp"
#include "kteach/rng.hpp"

namespace kteach {

/// Per-learner convex loss. Only the square loss is implemented; the
/// Lipschitz-smoothness constant of its evaluation gradient is 2.
struct LossSpec {
    double lipschitz_smoothness = 2.0;
    std::vector<double> weights;  // empty means all ones

    double weight(std::size_t i) const {
        return weights.empty() ? 1.0 : weights[i];
    }
    void validate(std::size_t d) const;
};

/// loss = (y - prediction)^2, grad = d loss / d prediction = 2 (prediction - y).
struct LossEval {
    double loss = 0.0;
    double grad = 0.0;
};
LossEval loss_value_and_grad(double prediction, double y);

struct TeachingExample {
    std::size_t learner_index = 0;
    Point x;
    double y = 0.0;
};

/// Per-learner learning rates. The descent guarantee needs
/// eta_i <= 1/(2 L_L M_K); callers may check with satisfies_descent_bound.
struct StepSizes {
    std::vector<double> etas;

    static StepSizes uniform(std::size_t d, double eta) {
        return StepSizes{std::vector<double>(d, eta)};
    }
    void validate(std::size_t d) const;
    bool satisfies_descent_bound(double lipschitz_smoothness, double kernel_bound) const;
};

struct SamplingDistribution {
    enum class Kind { UniformOverGrid, Gaussian };
    Kind kind = Kind::UniformOverGrid;
    double mean = 0.0;
    double stddev = 1.0;

    static SamplingDistribution uniform() { return {}; }
    static SamplingDistribution gaussian(double mean, double stddev);
};

/// What the teacher hands the learners in one iteration: one example per
/// learner, the mixing matrix when communication happened, and the rates.
struct TeachingRound {
    std::vector<TeachingExample> examples;
    std::optional<CommMatrix> comm_matrix;
    StepSizes step_sizes;
};

/// One trace row per update. The first block of fields is what the CSV
/// serializer emits; the rest are in-memory diagnostics.
struct TraceRecord {
    std::size_t iteration = 0;
    double loss = 0.0;           // multi-learner loss at the round's examples, before the update
    double disagreement = 0.0;   // M(f^t, f*)
    double psnr_db = 0.0;        // PSNR of f^t against the target (inf saturates)
    bool psnr_saturated = false;
    std::vector<Point> selected;
    bool comm_applied = false;

    std::vector<double> selected_abs_err;        // |f_i^t(x_i) - f*_i(x_i)|
    std::vector<double> post_update_abs_err;     // |f_i^{t+1}(x_i) - y_i|
    double loss_after_comm = 0.0;                // at the round's examples
    double loss_after_update = 0.0;              // at the round's examples
    double full_grid_loss = 0.0;                 // population loss of f^t over the whole grid
    double full_grid_loss_after_comm = 0.0;      // same, after mixing (equal when no comm)
    double comm_gain_full = 0.0;                 // full-grid gain, communicated rounds only
    double comm_upper_full = 0.0;
    double comm_ridge_slack = 0.0;               // ridge * ||A - I||_F^2
    double select_dist_to_mean = 0.0;            // sum_i ||x_i - mu_i||
    double wall_seconds = 0.0;
};

enum class Strategy { Rft, Gft };

struct TeachingConfig {
    KernelSpec kernel{};
    LossSpec loss{};
    StepSizes etas{};
    std::size_t max_iterations = 1000;
    double epsilon = 1e-3;
    std::uint64_t seed = 0;
    std::vector<SamplingDistribution> sampling;  // per learner; empty = uniform
    bool warn_on_step_bound = true;

    /// Learner i draws from stream (seed, stream_offset + i), so a slice of a
    /// larger run can reproduce that run's per-learner randomness.
    std::size_t stream_offset = 0;

    /// Called with f^t before update t and once more with the final state;
    /// observation only, must not mutate the run.
    std::function<void(std::size_t, const VectorValuedFunction&)> observer;
};

struct RunResult {
    std::vector<TraceRecord> trace;
    std::optional<VectorValuedFunction> final_function;
    bool aborted = false;
    std::string abort_reason;

    std::size_t iterations() const { return trace.size(); }
};

/// sum_i w_i (y_i - f_i(x_i))^2 for one example per learner.
double multi_loss(const VectorValuedFunction& vf,
                  const std::vector<TeachingExample>& examples,
                  const LossSpec& loss);

/// Gradient of the multi-learner loss: atom i is centered at x_i with
/// coefficient equal to the loss gradient at (f_i(x_i), y_i).
std::vector<KernelAtom> functional_gradient(const VectorValuedFunction& vf,
                                            const std::vector<TeachingExample>& examples,
                                            const LossSpec& loss = {});

/// Greedy selection: per learner, the grid index maximizing |f_i - f*_i|,
/// ties broken toward the lowest index.
std::vector<std::size_t> select_gft(const VectorValuedFunction& vf,
                                    const VectorValuedFunction& target);

/// Random selection, one draw per learner from its own seeded stream.
/// Gaussian draws are clamped to the grid's bounding box and snapped to the
/// nearest grid point.
std::vector<std::size_t> select_rft(const VectorValuedFunction& vf,
                                    const std::vector<SamplingDistribution>& dists,
                                    std::vector<Rng>& streams);

/// One vector-valued functional gradient step: optionally mix components
/// through the round's matrix, evaluate the gradient there, and apply
/// -eta_i * atom_i to component i.
VectorValuedFunction learner_update(const VectorValuedFunction& vf,
                                    const TeachingRound& round,
                                    const KernelSpec& spec,
                                    const LossSpec& loss = {});

/// Squared loss-gradient magnitude (2 (f_i(x) - f*_i(x)))^2 at one grid point.
double descent_diagnostic(const VectorValuedFunction& vf,
                          const VectorValuedFunction& target,
                          const Point& x, std::size_t learner_index);

/// 2 L(f^0) / (d * eta_min * epsilon): iteration count needed to reach an
/// epsilon-stationary point.
double iteration_bound(double initial_loss, std::size_t d, double eta_min, double epsilon);

/// The main teaching loop: while t <= T and M(f^t, f*) >= epsilon, optionally
/// solve and apply a communication matrix per the policy, select one example
/// per learner, query the target, update, and record a trace row.
RunResult run_teaching(const TeachingConfig& config,
                       const VectorValuedFunction& target,
                       const VectorValuedFunction& init,
                       Strategy strategy,
                       const CommPolicy& comm_policy);

}  // namespace kteach

#pragma once

#include <cstddef>
#include <vector>

#include "kteach/function.hpp"

namespace kteach {

/// Dense d x d mixing matrix applied across learners.
class CommMatrix {
public:
    explicit CommMatrix(std::size_t d) : d_(d), entries_(d * d, 0.0) {}
    CommMatrix(std::size_t d, std::vector<double> row_major);

    static CommMatrix identity(std::size_t d);

    std::size_t d() const { return d_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * d_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return entries_[i * d_ + j]; }
    const std::vector<double>& entries() const { return entries_; }

    /// max_ij |A - I|.
    double identity_distance() const;
    bool is_identity() const { return identity_distance() == 0.0; }

    friend bool operator==(const CommMatrix& a, const CommMatrix& b) {
        return a.d_ == b.d_ && a.entries_ == b.entries_;
    }

private:
    std::size_t d_;
    std::vector<double> entries_;
};

enum class CommMode { Never, AtStartOnly, EveryK, WhileFar };
enum class CommSolver { ClosedForm, Iterative };

struct CommPolicy {
    CommMode mode = CommMode::Never;
    std::size_t every_k = 1;       // EveryK period
    double far_threshold = 1e-2;   // WhileFar cut-off on the disagreement
    CommSolver solver = CommSolver::ClosedForm;
    std::size_t max_solver_steps = 1000;  // iterative budget T0
    double solver_tolerance = 1e-2;       // iterative disagreement target eps0
    double ridge = 1e-8;
    bool row_sum_one = false;

    void validate() const;
};

/// Least-squares mixing matrix: argmin_A sum_x ||A f(x) - f*(x)||^2
/// + ridge ||A - I||_F^2, solved row-wise. The iterative solver starts at the
/// identity and descends the same objective, accepting the identity outright
/// when the disagreement is already below the solver tolerance.
CommMatrix solve_comm_matrix(const VectorValuedFunction& vf,
                             const VectorValuedFunction& target,
                             const CommPolicy& policy);

/// Component i of the result at x is sum_j A(i,j) f_j(x); needs a shared grid.
VectorValuedFunction apply_comm(const VectorValuedFunction& vf, const CommMatrix& a);

/// Full-grid square loss sum_i sum_x (f_i(x) - target_i(x))^2.
double full_grid_loss(const VectorValuedFunction& vf, const VectorValuedFunction& target);

struct CommGain {
    double gain = 0.0;   // L(f) - L(Af) over the full grid
    double upper = 0.0;  // 2 L_L * residual l2, matching the loss aggregation scale
};

CommGain comm_gain(const VectorValuedFunction& vf, const VectorValuedFunction& target,
                   const CommMatrix& a, double lipschitz_smoothness);

bool should_communicate(std::size_t t, double disagreement_value, const CommPolicy& policy);

}  // namespace kteach

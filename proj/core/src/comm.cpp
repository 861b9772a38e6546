#include "kteach/comm.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace kteach {

namespace {

void require_shared_grid(const VectorValuedFunction& vf,
                         const VectorValuedFunction& target, const char* where) {
    require_matching_layout(vf, target, where);
    if (!vf.shares_grid()) {
        throw std::invalid_argument(std::string(where) + ": communication requires one shared grid");
    }
}

// n x d sample matrix, column i = values of component i.
Eigen::MatrixXd sample_matrix(const VectorValuedFunction& vf) {
    const std::size_t n = vf.component(0).size();
    const std::size_t d = vf.d();
    Eigen::MatrixXd m(n, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = vf.component(i).value(j);
        }
    }
    return m;
}

CommMatrix from_eigen(const Eigen::MatrixXd& a) {
    const std::size_t d = static_cast<std::size_t>(a.rows());
    CommMatrix out(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out(i, j) = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

CommMatrix solve_closed_form(const Eigen::MatrixXd& f, const Eigen::MatrixXd& fstar,
                             const CommPolicy& policy) {
    const Eigen::Index d = f.cols();
    Eigen::MatrixXd gram = f.transpose() * f;
    if (policy.ridge == 0.0) {
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        if (lu.rank() < d) {
            throw std::runtime_error(
                "solve_comm_matrix: rank-deficient sample matrix; set ridge > 0");
        }
    } else {
        gram.diagonal().array() += policy.ridge;
    }

    const Eigen::MatrixXd rhs = f.transpose() * fstar;  // column i is rhs for row i of A
    Eigen::MatrixXd a(d, d);
    if (!policy.row_sum_one) {
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        for (Eigen::Index i = 0; i < d; ++i) {
            Eigen::VectorXd b = rhs.col(i);
            b(i) += policy.ridge;  // ridge pulls row i toward e_i
            a.row(i) = ldlt.solve(b).transpose();
        }
    } else {
        // Row-wise KKT system for the constraint sum_j A(i,j) = 1.
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(d + 1, d + 1);
        kkt.topLeftCorner(d, d) = gram;
        kkt.topRightCorner(d, 1).setOnes();
        kkt.bottomLeftCorner(1, d).setOnes();
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
        for (Eigen::Index i = 0; i < d; ++i) {
            Eigen::VectorXd b = Eigen::VectorXd::Zero(d + 1);
            b.head(d) = rhs.col(i);
            b(i) += policy.ridge;
            b(d) = 1.0;
            const Eigen::VectorXd sol = lu.solve(b);
            a.row(i) = sol.head(d).transpose();
        }
    }
    return from_eigen(a);
}

CommMatrix solve_iterative(const Eigen::MatrixXd& f, const Eigen::MatrixXd& fstar,
                           const CommPolicy& policy, std::size_t total_points) {
    const Eigen::Index d = f.cols();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d);

    const auto metric = [&](const Eigen::MatrixXd& m) {
        // Same normalization as the disagreement metric.
        return (f * m.transpose() - fstar).norm() / static_cast<double>(total_points);
    };

    // Accept the identity outright when the functions are already close;
    // solving would return (numerically) the identity anyway.
    if (metric(a) < policy.solver_tolerance) return from_eigen(a);

    const Eigen::MatrixXd gram = f.transpose() * f;
    const double lipschitz = 2.0 * (gram.norm() + policy.ridge);
    const double step = 1.0 / lipschitz;
    for (std::size_t it = 0; it < policy.max_solver_steps; ++it) {
        const Eigen::MatrixXd grad =
            2.0 * (a * gram - fstar.transpose() * f) +
            2.0 * policy.ridge * (a - Eigen::MatrixXd::Identity(d, d));
        a -= step * grad;
        if (metric(a) < policy.solver_tolerance) break;
    }
    return from_eigen(a);
}

}  // namespace

CommMatrix::CommMatrix(std::size_t d, std::vector<double> row_major)
    : d_(d), entries_(std::move(row_major)) {
    if (entries_.size() != d * d) throw std::invalid_argument("CommMatrix: wrong entry count");
    for (double v : entries_) {
        if (!std::isfinite(v)) throw std::invalid_argument("CommMatrix: non-finite entry");
    }
}

CommMatrix CommMatrix::identity(std::size_t d) {
    CommMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
}

double CommMatrix::identity_distance() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t j = 0; j < d_; ++j) {
            const double ref = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(entries_[i * d_ + j] - ref));
        }
    }
    return worst;
}

void CommPolicy::validate() const {
    if (mode == CommMode::EveryK && every_k == 0) {
        throw std::invalid_argument("CommPolicy: every-k period must be positive");
    }
    if (mode == CommMode::WhileFar && !(far_threshold > 0.0)) {
        throw std::invalid_argument("CommPolicy: while-far threshold must be positive");
    }
    if (solver == CommSolver::Iterative &&
        (max_solver_steps == 0 || !(solver_tolerance > 0.0))) {
        throw std::invalid_argument("CommPolicy: iterative solver parameters must be positive");
    }
    if (ridge < 0.0 || !std::isfinite(ridge)) {
        throw std::invalid_argument("CommPolicy: ridge must be non-negative");
    }
}

CommMatrix solve_comm_matrix(const VectorValuedFunction& vf,
                             const VectorValuedFunction& target,
                             const CommPolicy& policy) {
    policy.validate();
    require_shared_grid(vf, target, "solve_comm_matrix");
    const Eigen::MatrixXd f = sample_matrix(vf);
    const Eigen::MatrixXd fstar = sample_matrix(target);
    if (policy.solver == CommSolver::ClosedForm) {
        return solve_closed_form(f, fstar, policy);
    }
    return solve_iterative(f, fstar, policy, vf.total_points());
}

VectorValuedFunction apply_comm(const VectorValuedFunction& vf, const CommMatrix& a) {
    if (a.d() != vf.d()) throw std::invalid_argument("apply_comm: matrix size mismatch");
    if (!vf.shares_grid()) {
        throw std::invalid_argument("apply_comm: communication requires one shared grid");
    }
    const std::size_t n = vf.component(0).size();
    std::vector<SampledFunction> out;
    out.reserve(vf.d());
    for (std::size_t i = 0; i < vf.d(); ++i) {
        std::vector<double> v(n, 0.0);
        for (std::size_t j = 0; j < vf.d(); ++j) {
            const double w = a(i, j);
            if (w == 0.0) continue;
            const auto& src = vf.component(j).values();
            for (std::size_t k = 0; k < n; ++k) v[k] += w * src[k];
        }
        out.emplace_back(vf.component(0).grid(), std::move(v));
    }
    return VectorValuedFunction(std::move(out));
}

double full_grid_loss(const VectorValuedFunction& vf, const VectorValuedFunction& target) {
    require_matching_layout(vf, target, "full_grid_loss");
    double s = 0.0;
    for (std::size_t i = 0; i < vf.d(); ++i) {
        s += component_sq_residual(vf.component(i), target.component(i));
    }
    return s;
}

CommGain comm_gain(const VectorValuedFunction& vf, const VectorValuedFunction& target,
                   const CommMatrix& a, double lipschitz_smoothness) {
    const double before = full_grid_loss(vf, target);
    const double after = full_grid_loss(apply_comm(vf, a), target);
    CommGain g;
    g.gain = before - after;
    g.upper = 2.0 * lipschitz_smoothness * residual_l2(vf, target);
    return g;
}

bool should_communicate(std::size_t t, double disagreement_value, const CommPolicy& policy) {
    policy.validate();
    switch (policy.mode) {
        case CommMode::Never: return false;
        case CommMode::AtStartOnly: return t == 0;
        case CommMode::EveryK: return t % policy.every_k == 0;
        case CommMode::WhileFar: return disagreement_value > policy.far_threshold;
    }
    return false;
}

}  // namespace kteach

#include "kteach/teaching.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "kteach/metrics.hpp"

namespace kteach {

namespace {

double grid_mean_distance(const Point& x, const SamplingDistribution& dist, const Grid& grid) {
    Point mu;
    if (dist.kind == SamplingDistribution::Kind::Gaussian) {
        mu = (grid.dim() == 1) ? Point::d1(dist.mean) : Point::d2(dist.mean, dist.mean);
    } else {
        double mx = 0.0, my = 0.0;
        for (double v : grid.x_axis()) mx += v;
        mx /= static_cast<double>(grid.x_axis().size());
        for (double v : grid.y_axis()) my += v;
        if (!grid.y_axis().empty()) my /= static_cast<double>(grid.y_axis().size());
        mu = (grid.dim() == 1) ? Point::d1(mx) : Point::d2(mx, my);
    }
    return std::sqrt(squared_distance(x, mu));
}

std::vector<SamplingDistribution> resolve_sampling(const std::vector<SamplingDistribution>& in,
                                                   std::size_t d) {
    if (in.empty()) return std::vector<SamplingDistribution>(d, SamplingDistribution::uniform());
    if (in.size() == 1) return std::vector<SamplingDistribution>(d, in[0]);
    if (in.size() != d) {
        throw std::invalid_argument("run_teaching: sampling distribution count must be 1 or d");
    }
    return in;
}

}  // namespace

void LossSpec::validate(std::size_t d) const {
    if (!(lipschitz_smoothness > 0.0)) {
        throw std::invalid_argument("LossSpec: lipschitz_smoothness must be positive");
    }
    if (!weights.empty() && weights.size() != d) {
        throw std::invalid_argument("LossSpec: weight count must match learner count");
    }
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("LossSpec: weights must be finite and non-negative");
        }
    }
}

LossEval loss_value_and_grad(double prediction, double y) {
    if (!std::isfinite(prediction) || !std::isfinite(y)) {
        throw std::invalid_argument("loss_value_and_grad: non-finite input");
    }
    const double r = y - prediction;
    return LossEval{r * r, 2.0 * (prediction - y)};
}

void StepSizes::validate(std::size_t d) const {
    if (etas.size() != d) throw std::invalid_argument("StepSizes: need one rate per learner");
    for (double e : etas) {
        if (!std::isfinite(e) || !(e >= 0.0)) {
            throw std::invalid_argument("StepSizes: rates must be finite and non-negative");
        }
    }
}

bool StepSizes::satisfies_descent_bound(double lipschitz_smoothness, double kernel_bound) const {
    const double bound = 1.0 / (2.0 * lipschitz_smoothness * kernel_bound);
    for (double e : etas) {
        if (e > bound) return false;
    }
    return true;
}

SamplingDistribution SamplingDistribution::gaussian(double mean, double stddev) {
    if (!(stddev > 0.0) || !std::isfinite(stddev) || !std::isfinite(mean)) {
        throw std::invalid_argument("SamplingDistribution: gaussian needs finite mean, stddev > 0");
    }
    return SamplingDistribution{Kind::Gaussian, mean, stddev};
}

double multi_loss(const VectorValuedFunction& vf,
                  const std::vector<TeachingExample>& examples,
                  const LossSpec& loss) {
    if (examples.size() != vf.d()) {
        throw std::invalid_argument("multi_loss: need one example per learner");
    }
    loss.validate(vf.d());
    double total = 0.0;
    for (const auto& ex : examples) {
        if (ex.learner_index >= vf.d()) {
            throw std::invalid_argument("multi_loss: learner index out of range");
        }
        const double pred = vf.component(ex.learner_index).value_at(ex.x);
        total += loss.weight(ex.learner_index) * loss_value_and_grad(pred, ex.y).loss;
    }
    return total;
}

std::vector<KernelAtom> functional_gradient(const VectorValuedFunction& vf,
                                            const std::vector<TeachingExample>& examples,
                                            const LossSpec& loss) {
    if (examples.size() != vf.d()) {
        throw std::invalid_argument("functional_gradient: need one example per learner");
    }
    loss.validate(vf.d());
    std::vector<KernelAtom> atoms;
    atoms.reserve(examples.size());
    for (const auto& ex : examples) {
        const double pred = vf.component(ex.learner_index).value_at(ex.x);
        const double g = loss.weight(ex.learner_index) * loss_value_and_grad(pred, ex.y).grad;
        atoms.push_back(KernelAtom{ex.learner_index, ex.x, g});
    }
    return atoms;
}

std::vector<std::size_t> select_gft(const VectorValuedFunction& vf,
                                    const VectorValuedFunction& target) {
    require_matching_layout(vf, target, "select_gft");
    std::vector<std::size_t> picks(vf.d(), 0);
    for (std::size_t i = 0; i < vf.d(); ++i) {
        const auto& f = vf.component(i);
        const auto& t = target.component(i);
        double best = -1.0;
        std::size_t best_idx = 0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            const double err = std::abs(f.value(j) - t.value(j));
            if (err > best) {
                best = err;
                best_idx = j;
            }
        }
        picks[i] = best_idx;
    }
    return picks;
}

std::vector<std::size_t> select_rft(const VectorValuedFunction& vf,
                                    const std::vector<SamplingDistribution>& dists,
                                    std::vector<Rng>& streams) {
    if (dists.size() != vf.d() || streams.size() != vf.d()) {
        throw std::invalid_argument("select_rft: need one distribution and stream per learner");
    }
    std::vector<std::size_t> picks(vf.d(), 0);
    for (std::size_t i = 0; i < vf.d(); ++i) {
        const Grid& grid = *vf.component(i).grid();
        const auto& dist = dists[i];
        if (dist.kind == SamplingDistribution::Kind::UniformOverGrid) {
            picks[i] = streams[i].next_index(grid.size());
        } else {
            Point draw;
            if (grid.dim() == 1) {
                draw = Point::d1(streams[i].next_normal(dist.mean, dist.stddev));
            } else {
                draw = Point::d2(streams[i].next_normal(dist.mean, dist.stddev),
                                 streams[i].next_normal(dist.mean, dist.stddev));
            }
            picks[i] = grid.nearest_index(draw);
        }
    }
    return picks;
}

VectorValuedFunction learner_update(const VectorValuedFunction& vf,
                                    const TeachingRound& round,
                                    const KernelSpec& spec,
                                    const LossSpec& loss) {
    round.step_sizes.validate(vf.d());
    if (round.examples.size() != vf.d()) {
        throw std::invalid_argument("learner_update: need exactly one example per learner");
    }
    const VectorValuedFunction mixed =
        round.comm_matrix ? apply_comm(vf, *round.comm_matrix) : vf;
    const auto atoms = functional_gradient(mixed, round.examples, loss);
    std::vector<SampledFunction> out;
    out.reserve(vf.d());
    for (std::size_t i = 0; i < vf.d(); ++i) {
        out.push_back(apply_atom(mixed.component(atoms[i].learner_index), atoms[i], spec,
                                 round.step_sizes.etas[i]));
    }
    return VectorValuedFunction(std::move(out));
}

double descent_diagnostic(const VectorValuedFunction& vf,
                          const VectorValuedFunction& target,
                          const Point& x, std::size_t learner_index) {
    if (learner_index >= vf.d()) {
        throw std::invalid_argument("descent_diagnostic: learner index out of range");
    }
    const double r = vf.component(learner_index).value_at(x) -
                     target.component(learner_index).value_at(x);
    const double g = 2.0 * r;
    return g * g;
}

double iteration_bound(double initial_loss, std::size_t d, double eta_min, double epsilon) {
    if (!(initial_loss >= 0.0) || !std::isfinite(initial_loss)) {
        throw std::invalid_argument("iteration_bound: initial loss must be non-negative");
    }
    if (d == 0 || !(eta_min > 0.0) || !(epsilon > 0.0)) {
        throw std::invalid_argument("iteration_bound: d, eta_min and epsilon must be positive");
    }
    return 2.0 * initial_loss / (static_cast<double>(d) * eta_min * epsilon);
}

RunResult run_teaching(const TeachingConfig& config,
                       const VectorValuedFunction& target,
                       const VectorValuedFunction& init,
                       Strategy strategy,
                       const CommPolicy& comm_policy) {
    require_matching_layout(init, target, "run_teaching");
    const std::size_t d = init.d();
    config.etas.validate(d);
    config.loss.validate(d);
    comm_policy.validate();
    if (!(config.epsilon > 0.0)) {
        throw std::invalid_argument("run_teaching: epsilon must be positive");
    }
    if (config.warn_on_step_bound &&
        !config.etas.satisfies_descent_bound(config.loss.lipschitz_smoothness,
                                             config.kernel.kernel_bound())) {
        std::cerr << "warning: step sizes exceed 1/(2 L_L M_K); descent is not guaranteed\n";
    }

    const auto sampling = resolve_sampling(config.sampling, d);
    std::vector<Rng> streams;
    streams.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        streams.push_back(Rng::stream(config.seed, config.stream_offset + i));
    }

    RunResult result;
    VectorValuedFunction f = init;
    const auto t0 = std::chrono::steady_clock::now();

    const double n_total = static_cast<double>(init.total_points());
    for (std::size_t t = 0; t < config.max_iterations; ++t) {
        const double sq_residual = full_grid_loss(f, target);
        const double m = std::sqrt(sq_residual) / n_total;
        if (m < config.epsilon) break;
        if (config.observer) config.observer(t, f);

        TraceRecord rec;
        rec.iteration = t;
        rec.disagreement = m;
        rec.full_grid_loss = sq_residual;
        try {
            std::optional<CommMatrix> a;
            if (should_communicate(t, m, comm_policy)) {
                a = solve_comm_matrix(f, target, comm_policy);
            }
            const VectorValuedFunction mixed = a ? apply_comm(f, *a) : f;

            // Example selection looks at f^t; the learners then mix and take
            // the gradient step at A f^t.
            const std::vector<std::size_t> picks =
                (strategy == Strategy::Gft) ? select_gft(f, target)
                                            : select_rft(f, sampling, streams);

            std::vector<TeachingExample> examples;
            examples.reserve(d);
            for (std::size_t i = 0; i < d; ++i) {
                const Point x = f.component(i).grid()->point(picks[i]);
                examples.push_back(TeachingExample{i, x, target.component(i).value(picks[i])});
            }

            rec.comm_applied = a.has_value();
            rec.loss = multi_loss(f, examples, config.loss);
            rec.loss_after_comm = a ? multi_loss(mixed, examples, config.loss) : rec.loss;
            rec.full_grid_loss_after_comm = a ? full_grid_loss(mixed, target) : sq_residual;
            if (a) {
                rec.comm_gain_full = sq_residual - rec.full_grid_loss_after_comm;
                rec.comm_upper_full =
                    2.0 * config.loss.lipschitz_smoothness * std::sqrt(sq_residual);
                double frob_sq = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        const double e = (*a)(i, j) - (i == j ? 1.0 : 0.0);
                        frob_sq += e * e;
                    }
                }
                rec.comm_ridge_slack = comm_policy.ridge * frob_sq;
            }
            const PsnrResult p = psnr(f, target, 1.0);
            rec.psnr_db = p.saturated ? 0.0 : p.value;
            rec.psnr_saturated = p.saturated;
            for (std::size_t i = 0; i < d; ++i) {
                rec.selected.push_back(examples[i].x);
                rec.selected_abs_err.push_back(
                    std::abs(f.component(i).value(picks[i]) - target.component(i).value(picks[i])));
                rec.select_dist_to_mean +=
                    grid_mean_distance(examples[i].x, sampling[i], *f.component(i).grid());
            }

            TeachingRound round{std::move(examples), std::nullopt, config.etas};
            VectorValuedFunction next = learner_update(mixed, round, config.kernel, config.loss);

            rec.loss_after_update = multi_loss(next, round.examples, config.loss);
            for (std::size_t i = 0; i < d; ++i) {
                rec.post_update_abs_err.push_back(
                    std::abs(next.component(i).value(picks[i]) - round.examples[i].y));
            }
            rec.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            result.trace.push_back(std::move(rec));
            f = std::move(next);
        } catch (const std::exception& e) {
            rec.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            result.trace.push_back(std::move(rec));
            result.aborted = true;
            result.abort_reason = e.what();
            break;
        }
    }

    if (config.observer) config.observer(result.trace.size(), f);
    result.final_function = std::move(f);
    return result;
}

}  // namespace kteach

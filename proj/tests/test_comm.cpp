#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kteach/comm.hpp"
#include "kteach/synthetic.hpp"
#include "support/test_helpers.hpp"

using namespace kteach;
using kteach::testing::random_vector_function;

namespace {

VectorValuedFunction analytic_triple(const GridPtr& grid) {
    std::vector<SampledFunction> comps;
    comps.push_back(synth_target(SyntheticSpec::analytic(AnalyticFamily::Exp), grid));
    comps.push_back(synth_target(SyntheticSpec::analytic(AnalyticFamily::Sin), grid));
    comps.push_back(synth_target(SyntheticSpec::analytic(AnalyticFamily::Identity), grid));
    return VectorValuedFunction(std::move(comps));
}

VectorValuedFunction cosine_pair(const GridPtr& grid) {
    std::vector<SampledFunction> comps;
    comps.push_back(synth_target(SyntheticSpec::cos(2.0), grid));
    comps.push_back(synth_target(SyntheticSpec::cos(4.0), grid));
    return VectorValuedFunction(std::move(comps));
}

double objective(const VectorValuedFunction& f, const VectorValuedFunction& target,
                 const CommMatrix& a) {
    return full_grid_loss(apply_comm(f, a), target);
}

}  // namespace

TEST_CASE("solver returns the identity when already at the target") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 32);
    Rng rng(2);
    const auto f = random_vector_function(grid, 3, rng);
    CommPolicy policy;
    const CommMatrix a = solve_comm_matrix(f, f, policy);
    CHECK(a.identity_distance() < 1e-9);
}

TEST_CASE("one-shot mixing recovers the exp/sin/linear matrix") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 64);
    const auto f0 = analytic_triple(grid);
    const CommMatrix truth(3, {2, -1, -1, 0, 1, 2, -1, 1, 1});
    const auto target = apply_comm(f0, truth);

    CommPolicy policy;
    const CommMatrix a = solve_comm_matrix(f0, target, policy);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(a(i, j) == doctest::Approx(truth(i, j)).epsilon(1e-8));
        }
    }
    CHECK(disagreement(apply_comm(f0, a), target) <= 1e-9);
    CHECK(objective(f0, target, a) <= objective(f0, target, CommMatrix::identity(3)));
}

TEST_CASE("one-shot mixing recovers the cosine-family matrix") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 64);
    const auto f0 = cosine_pair(grid);
    const CommMatrix truth(2, {1, -1, -1.0 / std::sqrt(2.0), 1});
    const auto target = apply_comm(f0, truth);

    const CommMatrix a = solve_comm_matrix(f0, target, CommPolicy{});
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(a(i, j) == doctest::Approx(truth(i, j)).epsilon(1e-8));
        }
    }
    CHECK(disagreement(apply_comm(f0, a), target) <= 1e-9);
}

TEST_CASE("apply_comm mixes componentwise and validates the grid") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 16);
    Rng rng(31);
    const auto f = random_vector_function(grid, 2, rng);

    const auto same = apply_comm(f, CommMatrix::identity(2));
    CHECK(same.component(0).values() == f.component(0).values());
    CHECK(same.component(1).values() == f.component(1).values());

    const auto zeroed = apply_comm(f, CommMatrix(2));
    for (double v : zeroed.component(0).values()) CHECK(v == 0.0);

    const auto other = Grid::linspace_1d(-2.0, 2.0, 17);
    const VectorValuedFunction mixed_grids(
        {f.component(0), SampledFunction::zeros(other)});
    CHECK_THROWS_AS(apply_comm(mixed_grids, CommMatrix::identity(2)), std::invalid_argument);
}

TEST_CASE("apply_comm is linear in the matrix") {
    const auto grid = Grid::linspace_1d(-1.0, 1.0, 12);
    Rng rng(17);
    const auto f = random_vector_function(grid, 3, rng);
    CommMatrix a(3), b(3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            a(i, j) = 2.0 * rng.next_double() - 1.0;
            b(i, j) = 2.0 * rng.next_double() - 1.0;
        }
    }
    const double alpha = 0.7, beta = -1.3;
    CommMatrix mix(3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) mix(i, j) = alpha * a(i, j) + beta * b(i, j);
    }
    const auto left = apply_comm(f, mix);
    const auto via_a = apply_comm(f, a);
    const auto via_b = apply_comm(f, b);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < grid->size(); ++k) {
            CHECK(left.component(i).value(k) ==
                  doctest::Approx(alpha * via_a.component(i).value(k) +
                                  beta * via_b.component(i).value(k))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("closed-form solution beats the identity and random perturbations") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 48);
    Rng rng(53);
    const auto f = random_vector_function(grid, 3, rng);
    const auto target = random_vector_function(grid, 3, rng);

    CommPolicy policy;
    policy.ridge = 1e-12;
    const CommMatrix a = solve_comm_matrix(f, target, policy);
    const double at_solution = objective(f, target, a);
    CHECK(at_solution <= objective(f, target, CommMatrix::identity(3)) + 1e-9);

    for (int k = 0; k < 1000; ++k) {
        CommMatrix perturbed = a;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                perturbed(i, j) += 1e-3 * (2.0 * rng.next_double() - 1.0);
            }
        }
        CHECK(at_solution <= objective(f, target, perturbed) + 1e-9);
    }
}

TEST_CASE("rank-deficient instances demand a ridge") {
    const auto grid = Grid::linspace_1d(-1.0, 1.0, 16);
    const auto line = synth_target(SyntheticSpec::analytic(AnalyticFamily::Identity), grid);
    const VectorValuedFunction degenerate({line, line});  // identical components
    const VectorValuedFunction target(
        {line, synth_target(SyntheticSpec::analytic(AnalyticFamily::Sin), grid)});

    CommPolicy no_ridge;
    no_ridge.ridge = 0.0;
    CHECK_THROWS_WITH_AS(solve_comm_matrix(degenerate, target, no_ridge),
                         doctest::Contains("ridge"), std::runtime_error);

    CommPolicy with_ridge;
    const CommMatrix a = solve_comm_matrix(degenerate, target, with_ridge);
    for (double v : a.entries()) CHECK(std::isfinite(v));
}

TEST_CASE("row-sum constraint produces stochastic-like rows") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 32);
    Rng rng(3);
    const auto f = random_vector_function(grid, 3, rng);
    const auto target = random_vector_function(grid, 3, rng);
    CommPolicy policy;
    policy.row_sum_one = true;
    const CommMatrix a = solve_comm_matrix(f, target, policy);
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 3; ++j) sum += a(i, j);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Constrained optimum cannot beat the unconstrained one.
    const CommMatrix free = solve_comm_matrix(f, target, CommPolicy{});
    CHECK(objective(f, target, free) <= objective(f, target, a) + 1e-9);
}

TEST_CASE("iterative solver accepts the identity when functions are close") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 32);
    Rng rng(8);
    const auto target = random_vector_function(grid, 2, rng);
    // Perturb the target slightly; disagreement stays below the tolerance.
    std::vector<SampledFunction> comps;
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<double> v = target.component(i).values();
        for (double& x : v) x += 1e-6;
        comps.emplace_back(grid, std::move(v));
    }
    const VectorValuedFunction near(std::move(comps));

    CommPolicy policy;
    policy.solver = CommSolver::Iterative;
    policy.solver_tolerance = 1e-2;
    const CommMatrix a = solve_comm_matrix(near, target, policy);
    CHECK(a == CommMatrix::identity(2));
}

TEST_CASE("iterative solver descends the shared objective") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 64);
    const auto f0 = analytic_triple(grid);
    const CommMatrix truth(3, {2, -1, -1, 0, 1, 2, -1, 1, 1});
    const auto target = apply_comm(f0, truth);

    CommPolicy policy;
    policy.solver = CommSolver::Iterative;
    policy.solver_tolerance = 1e-4;
    policy.max_solver_steps = 20000;
    const CommMatrix a = solve_comm_matrix(f0, target, policy);
    CHECK(disagreement(apply_comm(f0, a), target) < 1e-4);
}

TEST_CASE("comm_gain brackets the one-shot improvement") {
    const auto grid = Grid::linspace_1d(-2.0, 2.0, 64);
    const auto f0 = cosine_pair(grid);
    const CommMatrix truth(2, {1, -1, -1.0 / std::sqrt(2.0), 1});
    const auto target = apply_comm(f0, truth);

    SUBCASE("identity matrix gives zero gain") {
        const auto g = comm_gain(f0, target, CommMatrix::identity(2), 2.0);
        CHECK(g.gain == 0.0);
        CHECK(g.upper >= 0.0);
    }
    SUBCASE("at the target both sides vanish") {
        const auto g = comm_gain(target, target, CommMatrix::identity(2), 2.0);
        CHECK(g.gain == 0.0);
        CHECK(g.upper == 0.0);
    }
    SUBCASE("the recovered matrix removes the whole initial loss") {
        const CommMatrix a = solve_comm_matrix(f0, target, CommPolicy{});
        const auto g = comm_gain(f0, target, a, 2.0);
        CHECK(g.gain == doctest::Approx(full_grid_loss(f0, target)).epsilon(1e-9));
    }
}

TEST_CASE("should_communicate follows the policy") {
    CommPolicy never;
    CHECK(!should_communicate(0, 1.0, never));

    CommPolicy start;
    start.mode = CommMode::AtStartOnly;
    CHECK(should_communicate(0, 1.0, start));
    CHECK(!should_communicate(1, 1.0, start));

    CommPolicy every5;
    every5.mode = CommMode::EveryK;
    every5.every_k = 5;
    CHECK(should_communicate(0, 1.0, every5));
    CHECK(should_communicate(5, 1.0, every5));
    CHECK(!should_communicate(6, 1.0, every5));

    CommPolicy far;
    far.mode = CommMode::WhileFar;
    far.far_threshold = 1e-3;
    CHECK(should_communicate(3, 1.0, far));
    CHECK(!should_communicate(3, 1e-9, far));
}

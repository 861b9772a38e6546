#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kteach/function.hpp"
#include "kteach/grid.hpp"
#include "kteach/kernel.hpp"
#include "support/test_helpers.hpp"

using namespace kteach;
using kteach::testing::random_vector_function;

TEST_CASE("kernel_eval matches the closed form") {
    const KernelSpec spec;  // divisor 2
    CHECK(kernel_eval(spec, Point::d1(0.0), Point::d1(0.0)) == 1.0);
    CHECK(kernel_eval(spec, Point::d1(0.0), Point::d1(2.0)) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-12));
    CHECK(kernel_eval(spec, Point::d2(0.0, 0.0), Point::d2(2.0, 2.0)) ==
          doctest::Approx(0.1353352832366127).epsilon(1e-12));
}

TEST_CASE("kernel_eval validates inputs") {
    const KernelSpec spec;
    CHECK_THROWS_AS(kernel_eval(spec, Point::d1(0.0), Point::d2(0.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec(0.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec(-1.0), std::invalid_argument);
}

TEST_CASE("kernel symmetry and bound over random pairs") {
    const KernelSpec spec;
    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
        const Point a = Point::d2(rng.next_double() * 8 - 4, rng.next_double() * 8 - 4);
        const Point b = Point::d2(rng.next_double() * 8 - 4, rng.next_double() * 8 - 4);
        const double kab = kernel_eval(spec, a, b);
        CHECK(kab == kernel_eval(spec, b, a));
        CHECK(kab > 0.0);
        CHECK(kab <= spec.kernel_bound());
        CHECK((kab == 1.0) == (a == b));
    }
}

TEST_CASE("grid ordering is row-major and lookups are exact") {
    const auto grid = Grid::pixel_lattice(3, 2);
    CHECK(grid->size() == 6);
    CHECK(grid->dim() == 2);
    // y-major, then x
    CHECK(grid->point(0) == Point::d2(0.0, 0.0));
    CHECK(grid->point(1) == Point::d2(0.5, 0.0));
    CHECK(grid->point(3) == Point::d2(0.0, 1.0));
    CHECK(grid->index_of(Point::d2(0.5, 1.0)) == 4);
    CHECK(!grid->index_of(Point::d2(0.51, 1.0)).has_value());
    CHECK(!grid->index_of(Point::d1(0.5)).has_value());

    const auto line = Grid::linspace_1d(-2.0, 2.0, 5);
    CHECK(line->point(0).x == -2.0);
    CHECK(line->point(4).x == 2.0);
    CHECK(line->nearest_index(Point::d1(0.9)) == 3);
    CHECK(line->nearest_index(Point::d1(99.0)) == 4);     // clamped
    CHECK(line->nearest_index(Point::d1(-99.0)) == 0);
}

TEST_CASE("sampled function validates shape and finiteness") {
    const auto grid = Grid::linspace_1d(0.0, 1.0, 3);
    CHECK_THROWS_AS(SampledFunction(grid, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(SampledFunction(grid, {1.0, 2.0, std::nan("")}), std::invalid_argument);
    const auto f = SampledFunction::sample(grid, [](const Point& p) { return p.x; });
    CHECK(f.value_at(Point::d1(0.5)) == 0.5);
    CHECK_THROWS_AS(f.value_at(Point::d1(0.25)), std::invalid_argument);
}

TEST_CASE("eval_functional sums one value per learner") {
    const auto grid = Grid::linspace_1d(0.0, 2.0, 3);
    const auto f = SampledFunction::sample(grid, [](const Point& p) { return p.x; });
    const auto f2 = SampledFunction::sample(grid, [](const Point& p) { return 2.0 * p.x; });

    const VectorValuedFunction one({f});
    const Point x2[] = {Point::d1(2.0)};
    CHECK(eval_functional(one, x2) == 2.0);

    const auto grid13 = Grid::linspace_1d(0.0, 3.0, 4);
    const auto g1 = SampledFunction::sample(grid13, [](const Point& p) { return p.x; });
    const auto g2 = SampledFunction::sample(grid13, [](const Point& p) { return 2.0 * p.x; });
    const VectorValuedFunction two({g1, g2});
    const Point xs[] = {Point::d1(1.0), Point::d1(3.0)};
    CHECK(eval_functional(two, xs) == 7.0);

    const VectorValuedFunction zeros({SampledFunction::zeros(grid), SampledFunction::zeros(grid),
                                      SampledFunction::zeros(grid)});
    const Point zs[] = {Point::d1(0.0), Point::d1(1.0), Point::d1(2.0)};
    CHECK(eval_functional(zeros, zs) == 0.0);

    const Point off[] = {Point::d1(0.5)};
    CHECK_THROWS_AS(eval_functional(one, off), std::invalid_argument);
}

TEST_CASE("eval_functional is additive and exactly linear along atoms") {
    const auto grid = Grid::linspace_1d(-1.0, 1.0, 9);
    Rng rng(11);
    const auto f = random_vector_function(grid, 2, rng);
    const auto g = random_vector_function(grid, 2, rng);

    std::vector<SampledFunction> sums;
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<double> v(grid->size());
        for (std::size_t j = 0; j < v.size(); ++j) {
            v[j] = f.component(i).value(j) + g.component(i).value(j);
        }
        sums.emplace_back(grid, std::move(v));
    }
    const VectorValuedFunction fg(std::move(sums));
    const Point xs[] = {Point::d1(-0.5), Point::d1(0.75)};
    CHECK(eval_functional(fg, xs) ==
          doctest::Approx(eval_functional(f, xs) + eval_functional(g, xs)).epsilon(1e-15));

    // Evaluation is linear, so E[f + eps K_x] - E[f] equals eps * sum_i K(x_i,x_i)
    // with no higher-order remainder.
    const KernelSpec spec;
    const double eps = 1e-3;
    std::vector<SampledFunction> pert;
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<double> v = f.component(i).values();
        for (std::size_t j = 0; j < v.size(); ++j) {
            v[j] += eps * kernel_eval(spec, xs[i], grid->point(j));
        }
        pert.emplace_back(grid, std::move(v));
    }
    const VectorValuedFunction fp(std::move(pert));
    double kxx = 0.0;
    for (const Point& x : xs) kxx += kernel_eval(spec, x, x);
    CHECK(eval_functional(fp, xs) - eval_functional(f, xs) ==
          doctest::Approx(eps * kxx).epsilon(1e-12));
}

TEST_CASE("eval_functional_gradient returns unit atoms at the evaluation points") {
    const Point xs1[] = {Point::d1(0.0)};
    auto atoms = eval_functional_gradient(xs1);
    REQUIRE(atoms.size() == 1);
    CHECK(atoms[0].learner_index == 0);
    CHECK(atoms[0].center == Point::d1(0.0));
    CHECK(atoms[0].coefficient == 1.0);

    const Point xs2[] = {Point::d1(0.0), Point::d1(1.0)};
    atoms = eval_functional_gradient(xs2);
    REQUIRE(atoms.size() == 2);
    CHECK(atoms[1].center == Point::d1(1.0));
    const KernelSpec spec;
    // Pairing the atom with the evaluation reproduces K(x,x) = 1.
    CHECK(kernel_eval(spec, atoms[0].center, atoms[0].center) == 1.0);
}

TEST_CASE("apply_atom materializes the kernel section onto the grid") {
    const auto grid = Grid::linspace_1d(-1.0, 1.0, 3);
    const auto zero = SampledFunction::zeros(grid);
    const KernelSpec spec;
    const KernelAtom atom{0, Point::d1(0.0), 2.0};

    const auto f1 = apply_atom(zero, atom, spec, 0.5);
    CHECK(f1.value_at(Point::d1(0.0)) == -1.0);
    CHECK(f1.value_at(Point::d1(1.0)) == doctest::Approx(-0.7788007830714049).epsilon(1e-12));
    CHECK(f1.value_at(Point::d1(-1.0)) == doctest::Approx(-0.7788007830714049).epsilon(1e-12));

    CHECK(apply_atom(zero, atom, spec, 0.0).values() == zero.values());
    const KernelAtom null_atom{0, Point::d1(0.0), 0.0};
    CHECK(apply_atom(zero, null_atom, spec, 0.5).values() == zero.values());
}

TEST_CASE("disagreement matches the closed form") {
    const auto grid = Grid::linspace_1d(0.0, 1.0, 4);

    SUBCASE("identical functions") {
        Rng rng(3);
        const auto f = random_vector_function(grid, 2, rng);
        CHECK(disagreement(f, f) == 0.0);
    }
    SUBCASE("constant difference c over d components and n points gives c/sqrt(dn)") {
        const double c = 0.7;
        const std::size_t d = 3;
        std::vector<SampledFunction> fs, gs;
        for (std::size_t i = 0; i < d; ++i) {
            fs.push_back(SampledFunction::sample(grid, [&](const Point&) { return c; }));
            gs.push_back(SampledFunction::zeros(grid));
        }
        const VectorValuedFunction f(std::move(fs)), g(std::move(gs));
        const double n = static_cast<double>(grid->size());
        CHECK(disagreement(f, g) ==
              doctest::Approx(c / std::sqrt(static_cast<double>(d) * n)).epsilon(1e-14));
    }
    SUBCASE("single point, difference 3") {
        const auto g1 = Grid::linspace_1d(0.0, 0.0, 1);
        const VectorValuedFunction f({SampledFunction(g1, {3.0})});
        const VectorValuedFunction g({SampledFunction(g1, {0.0})});
        CHECK(disagreement(f, g) == 3.0);
    }
    SUBCASE("grid mismatch is an input error") {
        const auto other = Grid::linspace_1d(0.0, 1.0, 5);
        const VectorValuedFunction f({SampledFunction::zeros(grid)});
        const VectorValuedFunction g({SampledFunction::zeros(other)});
        CHECK_THROWS_AS(disagreement(f, g), std::invalid_argument);
    }
}

TEST_CASE("disagreement is a metric on random triples") {
    const auto grid = Grid::linspace_1d(-1.0, 1.0, 16);
    Rng rng(19);
    for (int k = 0; k < 50; ++k) {
        const auto a = random_vector_function(grid, 2, rng);
        const auto b = random_vector_function(grid, 2, rng);
        const auto c = random_vector_function(grid, 2, rng);
        const double ab = disagreement(a, b);
        const double ba = disagreement(b, a);
        const double ac = disagreement(a, c);
        const double cb = disagreement(c, b);
        CHECK(ab == ba);
        CHECK(ab >= 0.0);
        CHECK(ab <= ac + cb + 1e-12);
    }
    const auto a = random_vector_function(grid, 2, rng);
    CHECK(disagreement(a, a) == 0.0);
}
